#include "threshlasso/nodewise.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "threshlasso/errors.hpp"
#include "threshlasso/parallel.hpp"

namespace threshlasso {

NodewiseFit nodewise_fit_gram(const Matrix& regime_gram, Index j, Regime regime, double lambda_node,
                              const LassoConfig& cfg) {
  const Index p = regime_gram.rows();
  require(regime_gram.cols() == p, "nodewise: Gram must be square");
  require(j >= 0 && j < p, "nodewise: column index out of range");
  if (!(lambda_node >= 0.0) || !std::isfinite(lambda_node)) {
    throw InputError("nodewise: lambda_node must be finite and non-negative");
  }
  const double gjj = regime_gram(j, j);
  if (!(gjj > 0.0)) {
    throw DegenerateColumnError("nodewise: column " + std::to_string(j + 1) + " is identically zero in the " +
                                (regime == Regime::Lower ? "lower" : "upper") + " regime");
  }

  const ExcludedGram view(regime_gram, j);
  Vector c(p - 1), gamma_w(p - 1);
  for (Index k = 0; k < p - 1; ++k) {
    const Index src = view.source(k);
    c(k) = regime_gram(src, j);
    gamma_w(k) = std::sqrt(std::max(0.0, regime_gram(src, src)));
  }
  const LassoSolution sol = solve_gram(view, c, gjj, lambda_node, gamma_w, cfg);

  NodewiseFit fit;
  fit.j = j;
  fit.regime = regime;
  fit.gamma = sol.coef;
  fit.lambda_node = lambda_node;
  fit.penalty = gamma_w.cwiseProduct(sol.coef.cwiseAbs()).sum();
  fit.residual_ms = std::max(0.0, sol.objective - lambda_node * fit.penalty);
  fit.max_weight = p > 1 ? gamma_w.maxCoeff() : 0.0;
  fit.kkt_violation = sol.kkt_violation;
  fit.iterations = sol.iterations;
  fit.converged = sol.converged;
  const double z_sq = fit.residual_ms + lambda_node * fit.penalty;
  const double floor = 1e-10 * (gjj + 1.0);
  fit.floored = !(z_sq >= floor);
  fit.z_sq = fit.floored ? floor : z_sq;
  return fit;
}

NodewiseFit nodewise_fit(const Sample& sample, double tau, Index j, Regime regime, double lambda_node,
                         const LassoConfig& cfg) {
  if (!std::isfinite(tau)) throw InputError("nodewise: tau must be finite");
  RegimeSweep sweep(sample);
  sweep.advance_to(tau);
  const Matrix g = regime == Regime::Lower ? sweep.lower_gram() : sweep.upper_gram();
  return nodewise_fit_gram(g, j, regime, lambda_node, cfg);
}

bool PrecisionEstimate::has_row(Index r) const {
  return std::binary_search(rows_computed.begin(), rows_computed.end(), r);
}

PrecisionEstimate assemble_theta_gram(const Matrix& lower, const Matrix& upper, double tau, double lambda_node,
                                      const std::vector<Index>& rows, const LassoConfig& cfg, int threads) {
  const Index p = lower.rows();
  require(upper.rows() == p && lower.cols() == p && upper.cols() == p, "assemble_theta: regime Grams differ in size");

  PrecisionEstimate est;
  est.tau = tau;
  est.p = p;
  est.lambda_node = lambda_node;
  if (rows.empty()) {
    for (Index r = 0; r < 2 * p; ++r) est.rows_computed.push_back(r);
  } else {
    est.rows_computed = rows;
    std::sort(est.rows_computed.begin(), est.rows_computed.end());
    est.rows_computed.erase(std::unique(est.rows_computed.begin(), est.rows_computed.end()),
                            est.rows_computed.end());
    for (Index r : est.rows_computed) {
      if (r < 0 || r >= 2 * p) throw InputError("assemble_theta: row " + std::to_string(r) + " outside [0, 2p)");
    }
  }
  est.has_a.assign(static_cast<std::size_t>(p), false);
  est.has_b.assign(static_cast<std::size_t>(p), false);
  for (Index r : est.rows_computed) {
    est.has_b[static_cast<std::size_t>(r % p)] = true;
    if (r >= p) est.has_a[static_cast<std::size_t>(r - p)] = true;
  }

  struct Task {
    Index j;
    Regime regime;
  };
  std::vector<Task> tasks;
  for (Index j = 0; j < p; ++j) {
    if (est.has_a[static_cast<std::size_t>(j)]) tasks.push_back({j, Regime::Lower});
    if (est.has_b[static_cast<std::size_t>(j)]) tasks.push_back({j, Regime::Upper});
  }
  est.fits.resize(tasks.size());
  parallel_for(tasks.size(), resolve_threads(threads), [&](std::size_t t) {
    const Task& task = tasks[t];
    est.fits[t] = nodewise_fit_gram(task.regime == Regime::Lower ? lower : upper, task.j, task.regime,
                                    lambda_node, cfg);
  });

  const double nan = std::numeric_limits<double>::quiet_NaN();
  est.a_hat = Matrix::Zero(p, p);
  est.b_hat = Matrix::Zero(p, p);
  est.z_sq_lower = Vector::Constant(p, nan);
  est.z_sq_upper = Vector::Constant(p, nan);
  Vector bound_a = Vector::Constant(p, nan), bound_b = Vector::Constant(p, nan);
  for (const NodewiseFit& fit : est.fits) {
    Matrix& target = fit.regime == Regime::Lower ? est.a_hat : est.b_hat;
    const double inv = 1.0 / fit.z_sq;
    for (Index k = 0; k < p - 1; ++k) {
      const Index col = k < fit.j ? k : k + 1;
      target(fit.j, col) = -fit.gamma(k) * inv;
    }
    target(fit.j, fit.j) = inv;
    if (fit.regime == Regime::Lower) {
      est.z_sq_lower(fit.j) = fit.z_sq;
      bound_a(fit.j) = fit.kkt_bound();
    } else {
      est.z_sq_upper(fit.j) = fit.z_sq;
      bound_b(fit.j) = fit.kkt_bound();
    }
    if (fit.floored) ++est.floored_count;
  }

  est.theta = Matrix::Zero(2 * p, 2 * p);
  est.kkt_bounds = Vector::Constant(2 * p, nan);
  for (Index r : est.rows_computed) {
    const Index j = r % p;
    if (r < p) {
      est.theta.row(r).head(p) = est.b_hat.row(j);
      est.theta.row(r).tail(p) = -est.b_hat.row(j);
      est.kkt_bounds(r) = bound_b(j);
    } else {
      est.theta.row(r).head(p) = -est.b_hat.row(j);
      est.theta.row(r).tail(p) = est.a_hat.row(j) + est.b_hat.row(j);
      est.kkt_bounds(r) = bound_a(j) + bound_b(j);
    }
  }
  return est;
}

PrecisionEstimate assemble_theta(const Sample& sample, double tau, double lambda_node, const std::vector<Index>& rows,
                                 const LassoConfig& cfg, int threads) {
  if (!std::isfinite(tau)) throw InputError("assemble_theta: tau must be finite");
  RegimeSweep sweep(sample);
  sweep.advance_to(tau);
  return assemble_theta_gram(sweep.lower_gram(), sweep.upper_gram(), tau, lambda_node, rows, cfg, threads);
}

Vector kkt_residual(const PrecisionEstimate& estimate, const GramPair& gram) {
  const Index d = 2 * estimate.p;
  require(gram.sigma_hat.rows() == d, "kkt_residual: Gram does not match the estimate");
  Vector out = Vector::Constant(d, std::numeric_limits<double>::quiet_NaN());
  for (Index r : estimate.rows_computed) {
    Eigen::RowVectorXd row = estimate.theta.row(r) * gram.sigma_hat;
    row(r) -= 1.0;
    out(r) = row.cwiseAbs().maxCoeff();
  }
  return out;
}

}  // namespace threshlasso
