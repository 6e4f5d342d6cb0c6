#pragma once

#include <vector>

#include "threshlasso/design.hpp"
#include "threshlasso/hac.hpp"
#include "threshlasso/nodewise.hpp"
#include "threshlasso/threshold_search.hpp"

namespace threshlasso {

enum class VarianceMethod { Robust, Hac };

struct InferenceOptions {
  double alpha = 0.05;
  VarianceMethod variance = VarianceMethod::Robust;
  HacConfig hac;
  std::vector<std::vector<Index>> joint_sets;  // each tested against zero
  bool keep_sigma_xu = false;
};

struct JointTest {
  std::vector<Index> h_indices;
  double statistic = 0.0;
  Index dof = 0;
  double p_value = 1.0;
  double min_eigenvalue = 0.0;
  double max_eigenvalue = 0.0;
};

struct InferenceReport {
  double tau_hat = 0.0;
  double lambda = 0.0;
  Index n = 0;
  Index p = 0;
  double alpha_level = 0.05;
  VarianceMethod variance = VarianceMethod::Robust;
  Index bandwidth = 0;  // HAC only
  std::vector<Index> rows;  // covered coordinates, ascending
  Vector coef;       // Lasso estimate, length 2p
  Vector a_hat;      // debiased, NaN outside rows
  Vector residuals;  // y - X(tau_hat) coef
  Matrix sigma_xu;   // 2p x 2p when requested
  Vector sigma;      // sqrt(e_j' Theta Sigma_xu Theta' e_j) (or the HAC analogue)
  Vector se;         // sigma / sqrt(n)
  Vector z;          // a_hat / se under H0: alpha_j = 0
  Vector ci_lo, ci_hi;
  double critical = 0.0;  // z_{1 - alpha/2}
  std::vector<bool> degenerate;
  std::vector<bool> reject;             // individual two-sided test at alpha
  std::vector<bool> reject_bonferroni;  // family of all covered rows
  double bonferroni_threshold = 0.0;
  std::vector<JointTest> joint_tests;

  bool covers(Index r) const;
};

/// a = alpha + Theta X(tau)'(y - X(tau) alpha) / n on the rows Theta covers; NaN elsewhere.
Vector debias(const Vector& alpha_hat, double tau, const PrecisionEstimate& theta, const Sample& sample);
Vector debias(const ThresholdFit& fit, const PrecisionEstimate& theta, const Sample& sample);

/// (1/n) sum_i X_i(tau) X_i(tau)' u_i^2.
Matrix sigma_xu(const ThresholdDesign& design, const Vector& residuals);

/// g' Theta Sigma_xu Theta' g; g must be supported on computed rows.
double variance_of_contrast(const Vector& g, const PrecisionEstimate& theta, const Matrix& sigma_xu);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// a_hat -/+ z_{1-alpha/2} sigma / sqrt(n).
Interval confidence_interval(double a_hat, double sigma, Index n, double alpha);

/// |V_HH^{-1/2} sqrt(n) (a_H - null)|^2 against chi^2(h). `v_hh` is the h x h
/// block of Theta Sigma_xu Theta' (or Psi) for the coordinates in h.
JointTest chi2_joint_test(const std::vector<Index>& h, const Vector& a_hat, const Matrix& v_hh, Index n,
                          const Vector& null_values);

struct BonferroniResult {
  std::vector<bool> reject;
  double threshold = 0.0;
};

/// Rejects j iff |z_j| > z_{1 - alpha / (2 m)}, m = z.size().
BonferroniResult bonferroni_family_test(const Vector& z, double alpha);

/// Full pipeline at fit.tau_hat with a precomputed precision estimate.
InferenceReport infer(const Sample& sample, const ThresholdFit& fit, const PrecisionEstimate& theta,
                      const InferenceOptions& opts = {});

}  // namespace threshlasso
