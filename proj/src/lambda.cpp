#include "threshlasso/lambda.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "threshlasso/errors.hpp"

namespace threshlasso {

double plugin_lambda(double sigma_hat, Index p, Index n) {
  if (p < 2 || n < 2) throw InputError("plugin lambda needs p >= 2 and n >= 2");
  return 4.0 * sigma_hat * std::sqrt(2.0 * std::log(static_cast<double>(p)) / static_cast<double>(n));
}

double root_log_ratio(Index p, Index n) {
  if (p < 2 || n < 2) throw InputError("sqrt(log p / n) needs p >= 2 and n >= 2");
  return std::sqrt(std::log(static_cast<double>(p)) / static_cast<double>(n));
}

double lambda_max(const ThresholdSystem& sys) {
  double hi = 0.0;
  for (Index j = 0; j < sys.xty.size(); ++j) {
    if (sys.weights(j) > 0.0) hi = std::max(hi, 2.0 * std::abs(sys.xty(j)) / sys.weights(j));
  }
  return hi;
}

std::vector<double> lambda_path(double hi, int count, double ratio) {
  if (!(hi > 0.0) || count < 1 || !(ratio > 0.0 && ratio < 1.0)) {
    throw InputError("lambda path needs hi > 0, count >= 1 and ratio in (0, 1)");
  }
  std::vector<double> path(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    const double frac = count == 1 ? 0.0 : static_cast<double>(k) / (count - 1);
    path[static_cast<std::size_t>(k)] = hi * std::pow(ratio, frac);
  }
  return path;
}

namespace {

double sample_sd(const Vector& y) {
  const double mean = y.mean();
  return std::sqrt((y.array() - mean).square().sum() / static_cast<double>(y.size() - 1));
}

double sigma_from_fit(const LassoSolution& sol, const ThresholdSystem& sys, Index n) {
  const double rss = std::max(0.0, sol.objective - sol.lambda * sys.weights.cwiseProduct(sol.coef.cwiseAbs()).sum());
  const double dof = std::max<double>(1.0, static_cast<double>(n - sol.active_count()));
  return std::sqrt(rss * static_cast<double>(n) / dof);
}

double midpoint(const RegimeGrid& grid) {
  if (grid.candidates.empty()) throw InputError("lambda selection needs a nonempty grid");
  return grid.candidates[grid.candidates.size() / 2];
}

}  // namespace

double estimate_noise_scale(const Sample& sample, double tau, const LassoConfig& cfg,
                            const std::vector<Index>& unpenalized, int refits) {
  if (refits < 0) throw InputError("sigma refits must be non-negative");
  const Index n = sample.n();
  const Index p = sample.p();
  RegimeSweep sweep(sample);
  sweep.advance_to(tau);
  const ThresholdSystem sys = threshold_system(sweep, unpenalized);
  const double lambda0 = root_log_ratio(p, n) * sample_sd(sample.y);
  LassoSolution fit = fit_system(sys, lambda0, cfg);
  double sigma = sigma_from_fit(fit, sys, n);
  for (int k = 0; k < refits; ++k) {
    fit = fit_system(sys, plugin_lambda(sigma, p, n), cfg, &fit.coef);
    sigma = sigma_from_fit(fit, sys, n);
  }
  return sigma;
}

LambdaChoice select_lambda(const Sample& sample, const RegimeGrid& grid, const LambdaSpec& spec,
                           const LassoConfig& cfg, const std::vector<Index>& unpenalized) {
  LambdaChoice out;
  out.tau_used = midpoint(grid);
  const Index n = sample.n();
  const Index p = sample.p();

  if (spec.rule == LambdaRule::Fixed) {
    if (!(spec.value >= 0.0) || !std::isfinite(spec.value)) throw InputError("fixed lambda must be finite and >= 0");
    out.lambda = spec.value;
    return out;
  }

  if (spec.rule == LambdaRule::Plugin || spec.rule == LambdaRule::Path) {
    out.sigma_hat = estimate_noise_scale(sample, out.tau_used, cfg, unpenalized, spec.sigma_refits);
    const double scale = std::max(1.0, sample_sd(sample.y));
    if (!(out.sigma_hat > 1e-12 * scale)) {
      out.fallback = true;
      out.warning = "noise scale estimate is zero (perfect fit); using lambda = sqrt(log p / n)";
      out.lambda = root_log_ratio(p, n);
    } else {
      out.lambda = plugin_lambda(out.sigma_hat, p, n);
    }
    if (spec.rule == LambdaRule::Plugin) return out;
  }

  RegimeSweep sweep(sample);
  sweep.advance_to(out.tau_used);
  const ThresholdSystem sys = threshold_system(sweep, unpenalized);
  const double hi = lambda_max(sys);
  if (!(hi > 0.0)) throw EstimationError("lambda path: every penalized coordinate is already zero at lambda = 0");
  out.path = lambda_path(hi, spec.path_count, spec.path_ratio);
  if (spec.rule == LambdaRule::Path) return out;

  // K-fold cross validation at the grid midpoint; fold of row i is i mod K.
  const int folds = spec.cv_folds;
  if (folds < 2 || folds > n) throw InputError("cross validation needs 2 <= folds <= n");
  out.cv_error.assign(out.path.size(), 0.0);
  const ThresholdDesign full_design = build_design(sample, out.tau_used);
  for (int f = 0; f < folds; ++f) {
    std::vector<Index> train, test;
    for (Index i = 0; i < n; ++i) (i % folds == f ? test : train).push_back(i);
    Sample tr;
    tr.y.resize(static_cast<Index>(train.size()));
    tr.x.resize(static_cast<Index>(train.size()), p);
    tr.q.resize(static_cast<Index>(train.size()));
    for (std::size_t k = 0; k < train.size(); ++k) {
      tr.y(static_cast<Index>(k)) = sample.y(train[k]);
      tr.x.row(static_cast<Index>(k)) = sample.x.row(train[k]);
      tr.q(static_cast<Index>(k)) = sample.q(train[k]);
    }
    RegimeSweep tr_sweep(tr);
    tr_sweep.advance_to(out.tau_used);
    const ThresholdSystem tr_sys = threshold_system(tr_sweep, unpenalized);
    Vector warm = Vector::Zero(2 * p);
    for (std::size_t k = 0; k < out.path.size(); ++k) {
      const LassoSolution sol = fit_system(tr_sys, out.path[k], cfg, &warm);
      warm = sol.coef;
      double sse = 0.0;
      for (Index i : test) {
        const double e = sample.y(i) - full_design.xaug.row(i).dot(sol.coef);
        sse += e * e;
      }
      out.cv_error[k] += sse / static_cast<double>(n);
    }
  }
  std::size_t best = 0;
  for (std::size_t k = 1; k < out.path.size(); ++k) {
    if (out.cv_error[k] < out.cv_error[best]) best = k;
  }
  out.lambda = out.path[best];
  return out;
}

}  // namespace threshlasso
