#include "threshlasso/lp.hpp"

#include <cmath>
#include <string>

#include "threshlasso/errors.hpp"
#include "threshlasso/nodewise.hpp"
#include "threshlasso/threshold_search.hpp"

namespace threshlasso {

namespace {

void validate_lp(const LpData& data, const LpSpec& spec) {
  const Index t = data.y.size();
  if (data.shock.size() != t || data.q.size() != t) throw InputError("lp: y, shock and q must have equal length");
  if (data.slow.cols() > 0 && data.slow.rows() != t) throw InputError("lp: slow controls have the wrong length");
  if (data.fast.cols() > 0 && data.fast.rows() != t) throw InputError("lp: fast controls have the wrong length");
  if (spec.h_max < 0) throw InputError("lp: h_max must be non-negative");
  if (spec.lags < 0) throw InputError("lp: lags must be non-negative");
  if (!data.y.allFinite() || !data.shock.allFinite() || !data.q.allFinite() ||
      (data.slow.size() > 0 && !data.slow.allFinite()) || (data.fast.size() > 0 && !data.fast.allFinite())) {
    throw InputError("lp: series contain non-finite values");
  }
}

}  // namespace

Sample lp_sample(const LpData& data, const LpSpec& spec, int h, LpLayout* layout) {
  validate_lp(data, spec);
  const Index t_len = data.y.size();
  const Index k = spec.lags;
  const Index ns = data.slow.cols();
  const Index nf = data.fast.cols();
  const Index n = t_len - k - h;
  const Index p = 1 + (spec.include_response ? 1 : 0) + ns + k * (ns + 2 + nf) + 1;
  // Shock and intercept in both regimes stay unpenalized.
  const Index min_n = 4 * 4 + 10;
  if (n < min_n) {
    throw InputError("lp: horizon " + std::to_string(h) + " leaves " + std::to_string(std::max<Index>(n, 0)) +
                     " usable observations after " + std::to_string(k) + " lags; need at least " +
                     std::to_string(min_n));
  }

  LpLayout lay;
  lay.p = p;
  lay.names.push_back("shock");
  if (spec.include_response) lay.names.push_back("y");
  for (Index s = 0; s < ns; ++s) lay.names.push_back("slow" + std::to_string(s + 1));
  for (Index l = 1; l <= k; ++l) {
    const std::string suffix = "_lag" + std::to_string(l);
    for (Index s = 0; s < ns; ++s) lay.names.push_back("slow" + std::to_string(s + 1) + suffix);
    lay.names.push_back("y" + suffix);
    lay.names.push_back("shock" + suffix);
    for (Index f = 0; f < nf; ++f) lay.names.push_back("fast" + std::to_string(f + 1) + suffix);
  }
  lay.names.push_back("intercept");
  lay.shock = 0;
  lay.intercept = p - 1;

  Sample s;
  s.time_ordered = true;
  s.y.resize(n);
  s.q.resize(n);
  s.x.resize(n, p);
  for (Index i = 0; i < n; ++i) {
    const Index t = i + k;
    s.y(i) = data.y(t + h);
    s.q(i) = data.q(t);
    Index c = 0;
    s.x(i, c++) = data.shock(t);
    if (spec.include_response) s.x(i, c++) = data.y(t);
    for (Index j = 0; j < ns; ++j) s.x(i, c++) = data.slow(t, j);
    for (Index l = 1; l <= k; ++l) {
      for (Index j = 0; j < ns; ++j) s.x(i, c++) = data.slow(t - l, j);
      s.x(i, c++) = data.y(t - l);
      s.x(i, c++) = data.shock(t - l);
      for (Index j = 0; j < nf; ++j) s.x(i, c++) = data.fast(t - l, j);
    }
    s.x(i, c++) = 1.0;
  }
  validate_sample(s);
  if (layout != nullptr) *layout = lay;
  return s;
}

LpResult lp_fit(const LpData& data, const LpSpec& spec) {
  validate_lp(data, spec);
  LpResult out;
  const Sample s0 = lp_sample(data, spec, 0, &out.layout);
  const Index p = out.layout.p;
  const Index js = out.layout.shock;
  const Index jc = out.layout.intercept;
  const std::vector<Index> unpenalized = {js, jc, p + js, p + jc};
  const std::vector<Index> rows = {js, p + js};

  const RegimeGrid grid = make_grid(s0, spec.grid);
  const LambdaChoice lambda0 = select_lambda(s0, grid, spec.lambda, spec.lasso, unpenalized);
  ProfileOptions popts;
  popts.unpenalized = unpenalized;
  const ThresholdFit fit0 = profile_fit(s0, grid, lambda0.lambda, spec.lasso, popts);
  out.tau_hat = fit0.tau_hat;
  out.grid = fit0.grid;
  out.profile = fit0.profile;

  InferenceOptions iopts;
  iopts.alpha = spec.alpha;
  iopts.variance = VarianceMethod::Hac;
  iopts.hac = spec.hac;

  for (int h = 0; h <= spec.h_max; ++h) {
    const Sample sh = h == 0 ? s0 : lp_sample(data, spec, h);
    LpHorizon hz;
    hz.horizon = h;
    hz.n_eff = sh.n();
    ThresholdFit fit;
    if (h == 0) {
      hz.lambda = lambda0.lambda;
      fit = fit0;
    } else {
      // Noise scale grows with the horizon, so the plugin level is re-estimated
      // per horizon at the same auxiliary tau; the threshold stays at tau_hat.
      hz.lambda = select_lambda(sh, grid, spec.lambda, spec.lasso, unpenalized).lambda;
      fit.solution = refit_at(sh, out.tau_hat, hz.lambda, spec.lasso, unpenalized);
      fit.alpha_hat = fit.solution.coef;
      fit.tau_hat = out.tau_hat;
      fit.lambda = hz.lambda;
      fit.grid = {out.tau_hat};
      fit.profile = Vector::Constant(1, fit.solution.objective);
      fit.argmin_set = {0};
      fit.unpenalized = unpenalized;
    }
    hz.solution = fit.solution;
    const double lambda_node = spec.lambda_node > 0.0 ? spec.lambda_node : root_log_ratio(p, sh.n());
    const PrecisionEstimate theta = assemble_theta(sh, out.tau_hat, lambda_node, rows, spec.lasso, spec.threads);
    hz.report = infer(sh, fit, theta, iopts);
    if (h == 0) out.bandwidth = hz.report.bandwidth;

    const InferenceReport& rep = hz.report;
    const double crit = rep.critical;
    const double root_n = std::sqrt(static_cast<double>(sh.n()));
    IrfPoint upper;
    upper.horizon = h;
    upper.regime = "upper";
    upper.estimate = rep.a_hat(js);
    upper.lasso = fit.alpha_hat(js);
    upper.se = rep.se(js);
    upper.ci_lo = upper.estimate - crit * upper.se;
    upper.ci_hi = upper.estimate + crit * upper.se;

    const PsiModel psi = build_psi(sh, theta, rep.residuals, spec.hac);
    Vector g = Vector::Zero(2 * p);
    g(js) = 1.0;
    g(p + js) = 1.0;
    IrfPoint lower;
    lower.horizon = h;
    lower.regime = "lower";
    lower.estimate = rep.a_hat(js) + rep.a_hat(p + js);
    lower.lasso = fit.alpha_hat(js) + fit.alpha_hat(p + js);
    lower.se = std::sqrt(std::max(0.0, psi_variance(g, psi))) / root_n;
    lower.ci_lo = lower.estimate - crit * lower.se;
    lower.ci_hi = lower.estimate + crit * lower.se;
    hz.delta_z = rep.z(p + js);

    out.irf.push_back(upper);
    out.irf.push_back(lower);
    out.horizons.push_back(std::move(hz));
  }
  return out;
}

}  // namespace threshlasso
