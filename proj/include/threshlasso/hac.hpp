#pragma once

#include <vector>

#include "threshlasso/design.hpp"
#include "threshlasso/nodewise.hpp"

namespace threshlasso {

struct HacConfig {
  Index bandwidth = 0;  // k_n; 0 selects auto_bandwidth(n)
};

/// 1 - l / k_n for 0 <= l < k_n.
double bartlett_weight(Index l, Index k_n);

/// floor(4 (n / 100)^(2/9)), at least 1.
Index auto_bandwidth(Index n);

Index resolve_bandwidth(const HacConfig& cfg, Index n);

/// Xi(0) + sum_{l=1}^{k_n-1} K(l/k_n) (Xi(l) + Xi(l)'), Xi(l) = (1/(n-l)) sum_{i>l} s_i s_{i-l}'.
/// Rows of `scores` are time-ordered observations.
Matrix long_run_variance(const Matrix& scores, Index k_n);

struct LongRunCov {
  Matrix omega;        // lower-regime scores
  Matrix omega_tilde;  // upper-regime scores
  Matrix omega_bar;    // cross term, lower x upper
  Index k_n = 1;
};

/// The three blocks of the long-run variance of the stacked score process
/// (lower, upper); the cross block collects leads and lags in both directions.
LongRunCov long_run_cov(const Matrix& scores_lower, const Matrix& scores_upper, const HacConfig& cfg);

/// Sandwich variance built from nodewise z^2 values and the long-run blocks.
/// lower_nodes / upper_nodes are the columns j with a lower (A_j) / upper (B_j)
/// nodewise fit; scores and z^2 vectors follow those orders.
struct PsiModel {
  Index p = 0;
  std::vector<Index> lower_nodes;
  std::vector<Index> upper_nodes;
  Vector z_sq_lower;
  Vector z_sq_upper;
  LongRunCov cov;
};

/// g' Psi g for g of length 2p supported on rows the model covers.
double psi_variance(const Vector& g, const PsiModel& model);

/// Psi restricted to the listed coordinates.
Matrix psi_matrix(const PsiModel& model, const std::vector<Index>& coords);

/// Nodewise residual scores v_ij u_i per regime, from the stored gamma vectors.
struct NodewiseScores {
  std::vector<Index> lower_nodes, upper_nodes;
  Matrix lower;  // n x |lower_nodes|
  Matrix upper;  // n x |upper_nodes|
};
NodewiseScores nodewise_scores(const Sample& sample, const PrecisionEstimate& estimate, const Vector& residuals);

PsiModel build_psi(const Sample& sample, const PrecisionEstimate& estimate, const Vector& residuals,
                   const HacConfig& cfg);

}  // namespace threshlasso
