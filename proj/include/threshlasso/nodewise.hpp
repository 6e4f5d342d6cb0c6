#pragma once

#include <vector>

#include "threshlasso/design.hpp"
#include "threshlasso/lasso.hpp"

namespace threshlasso {

enum class Regime { Lower, Upper };

/// Regression of column j on the other columns within one regime, penalized by
/// the regime column norms Gamma.
struct NodewiseFit {
  Index j = 0;
  Regime regime = Regime::Lower;
  Vector gamma;  // length p - 1, columns other than j in order
  double lambda_node = 0.0;
  double residual_ms = 0.0;  // ||X_j - X_{-j} gamma||_n^2 within the regime
  double penalty = 0.0;      // |Gamma gamma|_1
  double z_sq = 0.0;         // residual_ms + lambda_node * penalty, floored
  double max_weight = 0.0;   // max of Gamma over the other columns
  bool floored = false;
  double kkt_violation = 0.0;
  int iterations = 0;
  bool converged = false;

  /// lambda_node * max_weight / z_sq
  double kkt_bound() const { return lambda_node * max_weight / z_sq; }
};

/// `regime_gram` is M(tau) for the lower regime or N(tau) for the upper one.
NodewiseFit nodewise_fit_gram(const Matrix& regime_gram, Index j, Regime regime, double lambda_node,
                              const LassoConfig& cfg = {});
NodewiseFit nodewise_fit(const Sample& sample, double tau, Index j, Regime regime, double lambda_node,
                         const LassoConfig& cfg = {});

struct PrecisionEstimate {
  double tau = 0.0;
  Index p = 0;
  double lambda_node = 0.0;
  Matrix a_hat;  // p x p, rows with has_a set
  Matrix b_hat;  // p x p, rows with has_b set
  Matrix theta;  // 2p x 2p, rows listed in rows_computed
  Vector kkt_bounds;  // length 2p, NaN outside rows_computed
  std::vector<Index> rows_computed;  // ascending
  std::vector<bool> has_a, has_b;
  Vector z_sq_lower, z_sq_upper;  // NaN where not fitted
  std::vector<NodewiseFit> fits;  // lower then upper per j, ascending j
  int floored_count = 0;

  bool has_row(Index r) const;
};

/// Nodewise rows for the coordinates in `rows` (all 2p when empty). Row j < p
/// needs B_j only; row p + j needs A_j and B_j.
PrecisionEstimate assemble_theta_gram(const Matrix& lower, const Matrix& upper, double tau, double lambda_node,
                                      const std::vector<Index>& rows = {}, const LassoConfig& cfg = {},
                                      int threads = 1);
PrecisionEstimate assemble_theta(const Sample& sample, double tau, double lambda_node,
                                 const std::vector<Index>& rows = {}, const LassoConfig& cfg = {}, int threads = 1);

/// ||theta_r' Sigma(tau) - e_r'||_inf per computed row; NaN elsewhere.
Vector kkt_residual(const PrecisionEstimate& estimate, const GramPair& gram);

}  // namespace threshlasso
