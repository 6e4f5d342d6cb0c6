#include "threshlasso/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include <Eigen/Eigenvalues>

#include "threshlasso/errors.hpp"
#include "threshlasso/stats.hpp"

namespace threshlasso {

bool InferenceReport::covers(Index r) const { return std::binary_search(rows.begin(), rows.end(), r); }

Vector debias(const Vector& alpha_hat, double tau, const PrecisionEstimate& theta, const Sample& sample) {
  require(theta.tau == tau, "debias: precision estimate was built at a different tau");
  require(alpha_hat.size() == 2 * sample.p() && theta.p == sample.p(), "debias: dimension mismatch");
  const ThresholdDesign design = build_design(sample, tau);
  const Vector resid = sample.y - design.xaug * alpha_hat;
  const Vector grad = design.xaug.transpose() * resid / static_cast<double>(sample.n());
  Vector out = Vector::Constant(alpha_hat.size(), std::numeric_limits<double>::quiet_NaN());
  for (Index r : theta.rows_computed) out(r) = alpha_hat(r) + theta.theta.row(r).dot(grad);
  return out;
}

Vector debias(const ThresholdFit& fit, const PrecisionEstimate& theta, const Sample& sample) {
  return debias(fit.alpha_hat, fit.tau_hat, theta, sample);
}

Matrix sigma_xu(const ThresholdDesign& design, const Vector& residuals) {
  require(design.xaug.rows() == residuals.size(), "sigma_xu: residual length does not match design");
  const Matrix w = design.xaug.array().colwise() * residuals.array();
  return w.transpose() * w / static_cast<double>(residuals.size());
}

double variance_of_contrast(const Vector& g, const PrecisionEstimate& theta, const Matrix& sigma_xu) {
  const Index d = 2 * theta.p;
  require(g.size() == d, "variance_of_contrast: contrast has wrong length");
  require(sigma_xu.rows() == d && sigma_xu.cols() == d, "variance_of_contrast: Sigma_xu has wrong size");
  Vector v = Vector::Zero(d);
  for (Index r = 0; r < d; ++r) {
    if (g(r) == 0.0) continue;
    require(theta.has_row(r), "variance_of_contrast: contrast touches row " + std::to_string(r) +
                                  " which the precision estimate does not cover");
    v += g(r) * theta.theta.row(r).transpose();
  }
  return v.dot(sigma_xu * v);
}

Interval confidence_interval(double a_hat, double sigma, Index n, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InputError("alpha must lie in (0, 1)");
  require(n >= 1 && sigma >= 0.0, "confidence_interval: need n >= 1 and sigma >= 0");
  const double half = stats::normal_critical(alpha) * sigma / std::sqrt(static_cast<double>(n));
  return {a_hat - half, a_hat + half};
}

JointTest chi2_joint_test(const std::vector<Index>& h, const Vector& a_hat, const Matrix& v_hh, Index n,
                          const Vector& null_values) {
  const auto k = static_cast<Index>(h.size());
  if (k == 0) throw InputError("joint test needs a nonempty coordinate set");
  require(v_hh.rows() == k && v_hh.cols() == k, "chi2_joint_test: covariance block has wrong size");
  require(null_values.size() == k, "chi2_joint_test: null values have wrong length");
  Vector d(k);
  for (Index i = 0; i < k; ++i) {
    const Index r = h[static_cast<std::size_t>(i)];
    require(r >= 0 && r < a_hat.size(), "chi2_joint_test: coordinate out of range");
    if (!std::isfinite(a_hat(r))) throw InputError("joint test: coordinate " + std::to_string(r) + " not estimated");
    d(i) = std::sqrt(static_cast<double>(n)) * (a_hat(r) - null_values(i));
  }
  const Matrix sym = 0.5 * (v_hh + v_hh.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
  if (eig.info() != Eigen::Success) throw TestError("joint test: eigendecomposition failed");
  const Vector& ev = eig.eigenvalues();
  JointTest out;
  out.h_indices = h;
  out.dof = k;
  out.min_eigenvalue = ev.minCoeff();
  out.max_eigenvalue = ev.maxCoeff();
  const double floor = 1e-12 * sym.trace() / static_cast<double>(k);
  if (!(sym.trace() > 0.0) || out.min_eigenvalue < floor) {
    std::ostringstream msg;
    msg << "joint test: covariance block is singular (min eigenvalue " << out.min_eigenvalue << ", max "
        << out.max_eigenvalue << ", floor " << floor << ")";
    throw TestError(msg.str());
  }
  const Vector proj = eig.eigenvectors().transpose() * d;
  out.statistic = proj.cwiseAbs2().cwiseQuotient(ev).sum();
  out.p_value = stats::chi2_sf(out.statistic, static_cast<double>(k));
  return out;
}

BonferroniResult bonferroni_family_test(const Vector& z, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InputError("alpha must lie in (0, 1)");
  BonferroniResult out;
  const auto m = static_cast<double>(std::max<Index>(1, z.size()));
  out.threshold = stats::normal_critical(alpha / m);
  out.reject.resize(static_cast<std::size_t>(z.size()));
  for (Index j = 0; j < z.size(); ++j) out.reject[static_cast<std::size_t>(j)] = std::abs(z(j)) > out.threshold;
  return out;
}

InferenceReport infer(const Sample& sample, const ThresholdFit& fit, const PrecisionEstimate& theta,
                      const InferenceOptions& opts) {
  if (!(opts.alpha > 0.0 && opts.alpha < 1.0)) throw InputError("alpha must lie in (0, 1)");
  require(theta.tau == fit.tau_hat, "infer: precision estimate was built at a different tau");
  const Index n = sample.n();
  const Index p = sample.p();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const double root_n = std::sqrt(static_cast<double>(n));

  InferenceReport rep;
  rep.tau_hat = fit.tau_hat;
  rep.lambda = fit.lambda;
  rep.n = n;
  rep.p = p;
  rep.alpha_level = opts.alpha;
  rep.variance = opts.variance;
  rep.rows = theta.rows_computed;
  rep.coef = fit.alpha_hat;

  const ThresholdDesign design = build_design(sample, fit.tau_hat);
  rep.residuals = sample.y - design.xaug * fit.alpha_hat;
  const Vector grad = design.xaug.transpose() * rep.residuals / static_cast<double>(n);
  rep.a_hat = Vector::Constant(2 * p, nan);
  for (Index r : rep.rows) rep.a_hat(r) = fit.alpha_hat(r) + theta.theta.row(r).dot(grad);

  const auto m = static_cast<Index>(rep.rows.size());
  Vector var_rows(m);
  Matrix scores;  // robust: n x m contributions of each covered row
  PsiModel psi;
  if (opts.variance == VarianceMethod::Robust) {
    const Matrix w = design.xaug.array().colwise() * rep.residuals.array();
    Matrix theta_rows(m, 2 * p);
    for (Index k = 0; k < m; ++k) theta_rows.row(k) = theta.theta.row(rep.rows[static_cast<std::size_t>(k)]);
    scores = w * theta_rows.transpose();
    for (Index k = 0; k < m; ++k) var_rows(k) = scores.col(k).squaredNorm() / static_cast<double>(n);
    if (opts.keep_sigma_xu) rep.sigma_xu = w.transpose() * w / static_cast<double>(n);
  } else {
    psi = build_psi(sample, theta, rep.residuals, opts.hac);
    rep.bandwidth = psi.cov.k_n;
    for (Index k = 0; k < m; ++k) {
      Vector g = Vector::Zero(2 * p);
      g(rep.rows[static_cast<std::size_t>(k)]) = 1.0;
      var_rows(k) = psi_variance(g, psi);
    }
  }

  rep.sigma = Vector::Constant(2 * p, nan);
  rep.se = Vector::Constant(2 * p, nan);
  rep.z = Vector::Constant(2 * p, nan);
  rep.ci_lo = Vector::Constant(2 * p, nan);
  rep.ci_hi = Vector::Constant(2 * p, nan);
  rep.degenerate.assign(static_cast<std::size_t>(2 * p), false);
  rep.reject.assign(static_cast<std::size_t>(2 * p), false);
  rep.reject_bonferroni.assign(static_cast<std::size_t>(2 * p), false);
  rep.critical = stats::normal_critical(opts.alpha);

  Vector z_rows(m);
  for (Index k = 0; k < m; ++k) {
    const Index r = rep.rows[static_cast<std::size_t>(k)];
    const double sigma = std::sqrt(std::max(0.0, var_rows(k)));
    rep.sigma(r) = sigma;
    rep.se(r) = sigma / root_n;
    const Interval ci = confidence_interval(rep.a_hat(r), sigma, n, opts.alpha);
    rep.ci_lo(r) = ci.lo;
    rep.ci_hi(r) = ci.hi;
    if (sigma > 0.0) {
      rep.z(r) = rep.a_hat(r) / rep.se(r);
      rep.reject[static_cast<std::size_t>(r)] = ci.lo > 0.0 || ci.hi < 0.0;
    } else {
      rep.degenerate[static_cast<std::size_t>(r)] = true;
      rep.z(r) = 0.0;
    }
    z_rows(k) = rep.z(r);
  }
  const BonferroniResult bonf = bonferroni_family_test(z_rows, opts.alpha);
  rep.bonferroni_threshold = bonf.threshold;
  for (Index k = 0; k < m; ++k) {
    rep.reject_bonferroni[static_cast<std::size_t>(rep.rows[static_cast<std::size_t>(k)])] =
        bonf.reject[static_cast<std::size_t>(k)];
  }

  for (const auto& set : opts.joint_sets) {
    std::vector<Index> pos;
    for (Index r : set) {
      const auto it = std::lower_bound(rep.rows.begin(), rep.rows.end(), r);
      if (it == rep.rows.end() || *it != r) {
        throw InputError("joint test: coordinate " + std::to_string(r) + " is not covered by the precision estimate");
      }
      pos.push_back(static_cast<Index>(it - rep.rows.begin()));
    }
    Matrix v_hh;
    if (opts.variance == VarianceMethod::Robust) {
      Matrix sub(n, static_cast<Index>(pos.size()));
      for (std::size_t k = 0; k < pos.size(); ++k) sub.col(static_cast<Index>(k)) = scores.col(pos[k]);
      v_hh = sub.transpose() * sub / static_cast<double>(n);
    } else {
      v_hh = psi_matrix(psi, set);
    }
    rep.joint_tests.push_back(
        chi2_joint_test(set, rep.a_hat, v_hh, n, Vector::Zero(static_cast<Index>(set.size()))));
  }
  return rep;
}

}  // namespace threshlasso
