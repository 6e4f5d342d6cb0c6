#include "threshlasso/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <string>

#include "threshlasso/errors.hpp"
#include "threshlasso/inference.hpp"
#include "threshlasso/nodewise.hpp"
#include "threshlasso/parallel.hpp"
#include "threshlasso/stats.hpp"
#include "threshlasso/threshold_search.hpp"

namespace threshlasso {

void validate_mc_config(const McConfig& cfg) {
  if (cfg.n < 10) throw InputError("simulate: n must be at least 10");
  if (cfg.two_p < 4 || cfg.two_p % 2 != 0) throw InputError("simulate: 2p must be an even number >= 4");
  if (cfg.s0 < 0 || cfg.s0 > cfg.p()) throw InputError("simulate: s0 must lie in [0, p]");
  if (cfg.b1 != 0.0 && 2 * cfg.s0 > cfg.p()) throw InputError("simulate: threshold effect needs 2 s0 <= p");
  if (!(cfg.tau0 > 0.0 && cfg.tau0 < 1.0)) throw InputError("simulate: tau0 must lie in (0, 1)");
  if (cfg.n_reps < 1) throw InputError("simulate: n_reps must be at least 1");
  if (!(cfg.alpha_level > 0.0 && cfg.alpha_level < 1.0)) throw InputError("simulate: alpha must lie in (0, 1)");
  if (!(cfg.noise_var >= 0.0)) throw InputError("simulate: noise_var must be non-negative");
  if (!(std::abs(cfg.rho_qx) < 1.0)) throw InputError("simulate: rho_qx must lie in (-1, 1)");
  if (!(std::abs(cfg.toeplitz) < 1.0)) throw InputError("simulate: Toeplitz coefficient must lie in (-1, 1)");
}

namespace {

struct PresetRow {
  const char* name;
  Index n, two_p, s0;
  double b, b1, rho, tau0;
};

constexpr PresetRow kPresets[] = {
    {"table1-row1", 400, 600, 15, 1.0, 0.5, 0.0, 0.5},   {"table1-row2", 400, 600, 15, 1.0, 0.0, 0.0, 0.5},
    {"table1-row3", 400, 600, 45, 1.0, 0.5, 0.0, 0.5},   {"table1-row4", 400, 600, 45, 1.0, 0.0, 0.0, 0.5},
    {"table1-row5", 400, 600, 15, 0.5, 0.25, 0.0, 0.5},  {"table1-row6", 400, 600, 15, 0.5, 0.0, 0.0, 0.5},
    {"table1-row7", 400, 600, 15, 1.0, 0.5, 0.5, 0.5},   {"table1-row8", 400, 600, 15, 1.0, 0.0, 0.5, 0.5},
    {"table1-row9", 400, 600, 15, 1.0, 0.5, 0.0, 0.4},   {"table1-row10", 400, 600, 15, 1.0, 0.0, 0.0, 0.4},
    {"table2-row1", 400, 600, 15, 0.5, 0.25, 0.0, 0.5},  {"table2-row2", 400, 600, 30, 0.5, 0.25, 0.0, 0.5},
    {"table2-row3", 400, 600, 15, 0.5, 0.1, 0.0, 0.5},   {"table2-row4", 1000, 1200, 15, 0.5, 0.25, 0.0, 0.5},
    {"table2-row5", 1000, 1200, 30, 0.5, 0.25, 0.0, 0.5}, {"table2-row6", 1000, 1200, 15, 0.5, 0.1, 0.0, 0.5},
    {"smoke", 200, 200, 8, 1.0, 0.5, 0.0, 0.5},
};

}  // namespace

std::vector<std::string> preset_names() {
  std::vector<std::string> out;
  for (const auto& row : kPresets) out.emplace_back(row.name);
  return out;
}

McConfig preset(const std::string& name) {
  for (const auto& row : kPresets) {
    if (name == row.name) {
      McConfig cfg;
      cfg.name = row.name;
      cfg.n = row.n;
      cfg.two_p = row.two_p;
      cfg.s0 = row.s0;
      cfg.b = row.b;
      cfg.b1 = row.b1;
      cfg.rho_qx = row.rho;
      cfg.tau0 = row.tau0;
      cfg.n_reps = name == "smoke" ? 10 : 20;
      return cfg;
    }
  }
  std::string known;
  for (const auto& row : kPresets) known += std::string(known.empty() ? "" : ", ") + row.name;
  throw InputError("unknown preset '" + name + "' (known: " + known + ")");
}

double McRng::uniform() {
  for (;;) {
    const double u = static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    if (u > 0.0) return u;
  }
}

double McRng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

std::uint64_t stream_seed(std::uint64_t master, std::uint64_t rep) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(master) ^ (rep + 0x632be59bd9b4e019ULL));
}

McDraw gen_sample(const McConfig& cfg, int rep) {
  validate_mc_config(cfg);
  const Index n = cfg.n;
  const Index p = cfg.p();
  McRng rng(stream_seed(cfg.seed, static_cast<std::uint64_t>(rep)));
  const double rho = cfg.toeplitz;
  const double innov = std::sqrt(1.0 - rho * rho);
  const double noise_sd = std::sqrt(cfg.noise_var);
  const double cop = std::sqrt(1.0 - cfg.rho_qx * cfg.rho_qx);

  McDraw draw;
  draw.tau0 = cfg.tau0;
  draw.alpha0 = Vector::Zero(2 * p);
  for (Index j = 0; j < cfg.s0; ++j) draw.alpha0(j) = cfg.b;
  if (cfg.b1 != 0.0) {
    for (Index j = cfg.s0; j < 2 * cfg.s0; ++j) draw.alpha0(p + j) = cfg.b1;
  }

  Sample& s = draw.sample;
  s.y.resize(n);
  s.x.resize(n, p);
  s.q.resize(n);
  for (Index i = 0; i < n; ++i) {
    // Stationary AR(1) across columns gives corr(x_j, x_k) = rho^|j-k|.
    double prev = rng.normal();
    s.x(i, 0) = prev;
    for (Index j = 1; j < p; ++j) {
      prev = rho * prev + innov * rng.normal();
      s.x(i, j) = prev;
    }
    const double e = rng.normal();
    const double u = noise_sd * rng.normal();
    const double uq = rng.uniform();
    s.q(i) = cfg.rho_qx == 0.0 ? uq : stats::normal_cdf(cfg.rho_qx * s.x(i, 1) + cop * e);
    double mean = 0.0;
    for (Index j = 0; j < p; ++j) {
      if (draw.alpha0(j) != 0.0) mean += draw.alpha0(j) * s.x(i, j);
      if (s.q(i) < cfg.tau0 && draw.alpha0(p + j) != 0.0) mean += draw.alpha0(p + j) * s.x(i, j);
    }
    s.y(i) = mean + u;
  }
  return draw;
}

RepRecord run_replication(const McConfig& cfg, int rep) {
  RepRecord rec;
  rec.rep = rep;
  try {
    const McDraw draw = gen_sample(cfg, rep);
    const Sample& s = draw.sample;
    const Index n = s.n();
    const Index p = s.p();
    rec.alpha0 = draw.alpha0;

    const RegimeGrid grid = make_grid(s, cfg.grid);
    const LambdaChoice lam = select_lambda(s, grid, cfg.lambda, cfg.lasso);
    rec.lambda = lam.lambda;
    rec.sigma_hat = lam.sigma_hat;
    const ThresholdFit fit = profile_fit(s, grid, lam.lambda, cfg.lasso);
    rec.tau_hat = fit.tau_hat;
    rec.tau_err = std::abs(fit.tau_hat - draw.tau0);
    rec.grid = fit.grid;
    if (cfg.keep_profiles) rec.profile = fit.profile;

    const double lambda_node = cfg.lambda_node > 0.0 ? cfg.lambda_node : root_log_ratio(p, n);
    const PrecisionEstimate theta = assemble_theta(s, fit.tau_hat, lambda_node, {}, cfg.lasso, 1);
    InferenceOptions iopts;
    iopts.alpha = cfg.alpha_level;
    const InferenceReport rep_out = infer(s, fit, theta, iopts);

    auto note_fit = [&](bool converged, double kkt) {
      ++rec.fits;
      if (!converged) {
        ++rec.nonconverged;
      } else {
        rec.max_kkt = std::max(rec.max_kkt, kkt);
        if (kkt > 1e-6) ++rec.kkt_failures;
      }
    };
    for (const auto& st : fit.stats) note_fit(st.converged, st.kkt_violation);
    for (const auto& nf : theta.fits) note_fit(nf.converged, nf.kkt_violation);

    const GramPair gp = gram(s, fit.tau_hat);
    const Vector resid_rows = kkt_residual(theta, gp);
    for (Index r : theta.rows_computed) {
      ++rec.bound_rows;
      const double excess = resid_rows(r) - theta.kkt_bounds(r);
      rec.max_bound_excess = std::max(rec.max_bound_excess, excess);
      if (excess > 1e-8) ++rec.bound_violations;
    }

    const Index d = 2 * p;
    rec.a_hat = rep_out.a_hat;
    rec.ci_length.resize(d);
    rec.z.resize(d);
    rec.hit.resize(static_cast<std::size_t>(d));
    rec.reject_bonferroni = rep_out.reject_bonferroni;
    for (Index j = 0; j < d; ++j) {
      rec.ci_length(j) = rep_out.ci_hi(j) - rep_out.ci_lo(j);
      rec.hit[static_cast<std::size_t>(j)] = rep_out.ci_lo(j) <= draw.alpha0(j) && draw.alpha0(j) <= rep_out.ci_hi(j);
      rec.z(j) = rep_out.se(j) > 0.0 ? (rep_out.a_hat(j) - draw.alpha0(j)) / rep_out.se(j) : 0.0;
    }

    const ThresholdDesign at_hat = build_design(s, fit.tau_hat);
    const ThresholdDesign at_true = build_design(s, draw.tau0);
    const Vector f_diff = at_hat.xaug * fit.alpha_hat - at_true.xaug * draw.alpha0;
    rec.prediction_norm = std::sqrt(f_diff.squaredNorm() / static_cast<double>(n));

    // Delta = sqrt(n) (Theta Sigma - I)(alpha_hat - alpha0).
    const Vector err = fit.alpha_hat - draw.alpha0;
    const Vector sig_err = at_hat.xaug.transpose() * (at_hat.xaug * err) / static_cast<double>(n);
    const Vector delta = std::sqrt(static_cast<double>(n)) * (theta.theta * sig_err - err);
    double ratio = 0.0;
    Index counted = 0;
    for (Index j = 0; j < d; ++j) {
      if (rep_out.sigma(j) > 0.0) {
        ratio += std::abs(delta(j)) / rep_out.sigma(j);
        ++counted;
      }
    }
    rec.delta_ratio = counted > 0 ? ratio / static_cast<double>(counted) : 0.0;
    rec.ok = true;
  } catch (const Error& e) {
    rec.ok = false;
    rec.error = e.what();
  }
  return rec;
}

McReport aggregate(const McConfig& cfg, std::vector<RepRecord> records) {
  McReport out;
  out.config = cfg;
  out.has_tau_error = cfg.b1 != 0.0;
  std::sort(records.begin(), records.end(), [](const RepRecord& a, const RepRecord& b) { return a.rep < b.rep; });
  const Index p = cfg.p();
  const Index d = 2 * p;
  std::vector<double> len_sum(static_cast<std::size_t>(p), 0.0), hit_sum(static_cast<std::size_t>(p), 0.0);
  double power_sum = 0.0, power_all_sum = 0.0, fwer_sum = 0.0;
  for (const RepRecord& rec : records) {
    out.fits += rec.fits;
    out.nonconverged += rec.nonconverged;
    out.kkt_failures += rec.kkt_failures;
    out.max_kkt = std::max(out.max_kkt, rec.max_kkt);
    out.bound_rows += rec.bound_rows;
    out.bound_violations += rec.bound_violations;
    out.max_bound_excess = std::max(out.max_bound_excess, rec.max_bound_excess);
    if (!rec.ok) {
      ++out.n_failed;
      continue;
    }
    ++out.n_success;
    out.mean_abs_tau_err += rec.tau_err;
    out.mean_lambda += rec.lambda;
    out.mean_delta_ratio += rec.delta_ratio;
    out.prediction_norm.push_back(rec.prediction_norm);
    for (Index j = 0; j < p; ++j) {
      len_sum[static_cast<std::size_t>(j)] += rec.ci_length(j);
      hit_sum[static_cast<std::size_t>(j)] += rec.hit[static_cast<std::size_t>(j)] ? 1.0 : 0.0;
    }
    Index supp_beta = 0, rej_beta = 0, supp_all = 0, rej_all = 0;
    bool false_rejection = false;
    for (Index j = 0; j < d; ++j) {
      const bool rej = rec.reject_bonferroni[static_cast<std::size_t>(j)];
      if (rec.alpha0(j) != 0.0) {
        ++supp_all;
        rej_all += rej ? 1 : 0;
        if (j < p) {
          ++supp_beta;
          rej_beta += rej ? 1 : 0;
        }
      } else {
        if (rej) false_rejection = true;
        out.z_pool.push_back(rec.z(j));
      }
    }
    fwer_sum += false_rejection ? 1.0 : 0.0;
    power_sum += supp_beta > 0 ? static_cast<double>(rej_beta) / static_cast<double>(supp_beta) : 0.0;
    power_all_sum += supp_all > 0 ? static_cast<double>(rej_all) / static_cast<double>(supp_all) : 0.0;
  }
  if (out.n_success == 0) throw EstimationError("aggregate: no successful replications");
  const double r = out.n_success;
  out.mean_abs_tau_err /= r;
  out.mean_lambda /= r;
  out.mean_delta_ratio /= r;
  out.fwer = fwer_sum / r;
  out.power = power_sum / r;
  out.power_all = power_all_sum / r;

  double ell = 0.0, ell_s = 0.0, ell_sc = 0.0, cov = 0.0, cov_s = 0.0, cov_sc = 0.0;
  Index ns = 0, nsc = 0;
  for (Index j = 0; j < p; ++j) {
    const double l = len_sum[static_cast<std::size_t>(j)] / r;
    const double c = hit_sum[static_cast<std::size_t>(j)] / r;
    ell += l;
    cov += c;
    if (cfg.b != 0.0 && j < cfg.s0) {
      ell_s += l;
      cov_s += c;
      ++ns;
    } else {
      ell_sc += l;
      cov_sc += c;
      ++nsc;
    }
  }
  out.ell = ell / static_cast<double>(p);
  out.cov = cov / static_cast<double>(p);
  out.ell_s = ns > 0 ? ell_s / static_cast<double>(ns) : 0.0;
  out.cov_s = ns > 0 ? cov_s / static_cast<double>(ns) : 0.0;
  out.ell_sc = nsc > 0 ? ell_sc / static_cast<double>(nsc) : 0.0;
  out.cov_sc = nsc > 0 ? cov_sc / static_cast<double>(nsc) : 0.0;

  if (out.z_pool.size() >= 2) {
    out.ks_statistic = stats::ks_statistic_normal(out.z_pool);
    out.ks_pvalue = stats::ks_pvalue(out.ks_statistic, out.z_pool.size());
    const stats::LineFit line = stats::qq_normal_fit(out.z_pool);
    out.qq_slope = line.slope;
    out.qq_intercept = line.intercept;
  }
  out.records = std::move(records);
  return out;
}

McReport run_monte_carlo(const McConfig& cfg) {
  validate_mc_config(cfg);
  std::vector<RepRecord> records(static_cast<std::size_t>(cfg.n_reps));
  parallel_for(records.size(), resolve_threads(cfg.threads),
               [&](std::size_t k) { records[k] = run_replication(cfg, static_cast<int>(k)); });
  return aggregate(cfg, std::move(records));
}

}  // namespace threshlasso
