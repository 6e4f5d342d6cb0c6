#include "threshlasso/report_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "threshlasso/errors.hpp"
#include "threshlasso/stats.hpp"

namespace threshlasso {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string coord_block(Index k, Index p) { return k < p ? "beta" : "delta"; }

std::string coord_name(Index k, const std::vector<std::string>& x_names) {
  const Index p = static_cast<Index>(x_names.size());
  if (p == 0) return "x" + std::to_string(k + 1);
  return x_names[static_cast<std::size_t>(k % p)];
}

namespace {

std::vector<std::string> default_names(Index p) {
  std::vector<std::string> out;
  for (Index j = 0; j < p; ++j) out.push_back("x" + std::to_string(j + 1));
  return out;
}

const std::vector<std::string>& names_or(const std::vector<std::string>& names, Index p,
                                         std::vector<std::string>& store) {
  if (static_cast<Index>(names.size()) == p) return names;
  store = default_names(p);
  return store;
}

Json vec_json(const Vector& v) {
  Json a = Json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

const char* variance_name(VarianceMethod m) { return m == VarianceMethod::Hac ? "hac" : "robust"; }

const char* rule_name(LambdaRule r) {
  switch (r) {
    case LambdaRule::Plugin: return "plugin";
    case LambdaRule::Fixed: return "fixed";
    case LambdaRule::Path: return "path";
    case LambdaRule::CrossValidation: return "cv";
  }
  return "plugin";
}

const char* grid_mode_name(GridMode m) {
  switch (m) {
    case GridMode::QuantileCount: return "quantile";
    case GridMode::ObservedValues: return "observed";
    case GridMode::FixedStep: return "step";
  }
  return "quantile";
}

double two_sided_p(double z) { return 2.0 * stats::normal_cdf(-std::abs(z)); }

}  // namespace

Json fit_json(const ThresholdFit& fit, const LambdaChoice& lambda, const std::vector<std::string>& x_names, Index n) {
  std::vector<std::string> store;
  const Index p = fit.p();
  const auto& names = names_or(x_names, p, store);
  Json j;
  j["tau_hat"] = fit.tau_hat;
  j["tau_index"] = fit.tau_index;
  j["lambda"] = fit.lambda;
  j["sigma_hat"] = lambda.sigma_hat;
  j["lambda_fallback"] = lambda.fallback;
  j["warning"] = lambda.warning;
  j["n"] = n;
  j["p"] = p;
  j["objective"] = fit.solution.objective;
  j["kkt_violation"] = fit.solution.kkt_violation;
  j["converged"] = fit.solution.converged;
  j["iterations"] = fit.solution.iterations;
  j["active_count"] = fit.solution.active_count();
  j["x_names"] = names;
  j["unpenalized"] = fit.unpenalized;
  j["coef"] = vec_json(fit.alpha_hat);
  j["grid"] = fit.grid;
  j["profile"] = vec_json(fit.profile);
  j["argmin_set"] = fit.argmin_set;
  return j;
}

std::string coef_csv(const ThresholdFit& fit, const std::vector<std::string>& x_names) {
  std::vector<std::string> store;
  const Index p = fit.p();
  const auto& names = names_or(x_names, p, store);
  std::ostringstream out;
  out << "index,name,block,coef\n";
  for (Index k = 0; k < 2 * p; ++k) {
    out << k << ',' << coord_name(k, names) << ',' << coord_block(k, p) << ',' << format_double(fit.alpha_hat(k))
        << '\n';
  }
  return out.str();
}

Json inference_json(const InferenceReport& rep, const std::vector<std::string>& x_names) {
  std::vector<std::string> store;
  const auto& names = names_or(x_names, rep.p, store);
  Json j;
  j["tau_hat"] = rep.tau_hat;
  j["lambda"] = rep.lambda;
  j["n"] = rep.n;
  j["p"] = rep.p;
  j["alpha"] = rep.alpha_level;
  j["variance"] = variance_name(rep.variance);
  j["bandwidth"] = rep.bandwidth;
  j["critical"] = rep.critical;
  j["bonferroni_threshold"] = rep.bonferroni_threshold;
  Json coefs = Json::array();
  for (std::size_t k = 0; k < rep.rows.size(); ++k) {
    const Index r = rep.rows[k];
    Json c;
    c["index"] = r;
    c["name"] = coord_name(r, names);
    c["block"] = coord_block(r, rep.p);
    c["coef"] = rep.coef(r);
    c["a_hat"] = rep.a_hat(r);
    c["se"] = rep.se(r);
    c["z"] = rep.z(r);
    c["p_value"] = two_sided_p(rep.z(r));
    c["ci_lo"] = rep.ci_lo(r);
    c["ci_hi"] = rep.ci_hi(r);
    c["reject"] = static_cast<bool>(rep.reject[static_cast<std::size_t>(r)]);
    c["reject_bonferroni"] = static_cast<bool>(rep.reject_bonferroni[static_cast<std::size_t>(r)]);
    c["degenerate"] = static_cast<bool>(rep.degenerate[static_cast<std::size_t>(r)]);
    coefs.push_back(std::move(c));
  }
  j["coefficients"] = std::move(coefs);
  Json tests = Json::array();
  for (const JointTest& t : rep.joint_tests) {
    Json c;
    c["indices"] = t.h_indices;
    c["statistic"] = t.statistic;
    c["dof"] = t.dof;
    c["p_value"] = t.p_value;
    c["min_eigenvalue"] = t.min_eigenvalue;
    c["max_eigenvalue"] = t.max_eigenvalue;
    tests.push_back(std::move(c));
  }
  j["joint_tests"] = std::move(tests);
  return j;
}

std::string inference_csv(const InferenceReport& rep, const std::vector<std::string>& x_names) {
  std::vector<std::string> store;
  const auto& names = names_or(x_names, rep.p, store);
  std::ostringstream out;
  out << "index,name,block,coef,a_hat,se,z,p_value,ci_lo,ci_hi,reject,reject_bonferroni,degenerate\n";
  for (Index r : rep.rows) {
    const auto u = static_cast<std::size_t>(r);
    out << r << ',' << coord_name(r, names) << ',' << coord_block(r, rep.p) << ',' << format_double(rep.coef(r)) << ','
        << format_double(rep.a_hat(r)) << ',' << format_double(rep.se(r)) << ',' << format_double(rep.z(r)) << ','
        << format_double(two_sided_p(rep.z(r))) << ',' << format_double(rep.ci_lo(r)) << ','
        << format_double(rep.ci_hi(r)) << ',' << int(rep.reject[u]) << ',' << int(rep.reject_bonferroni[u]) << ','
        << int(rep.degenerate[u]) << '\n';
  }
  return out.str();
}

Json lp_json(const LpResult& res) {
  Json j;
  j["tau_hat"] = res.tau_hat;
  j["bandwidth"] = res.bandwidth;
  j["p"] = res.layout.p;
  j["regressors"] = res.layout.names;
  j["grid"] = res.grid;
  j["profile"] = vec_json(res.profile);
  Json hs = Json::array();
  for (const LpHorizon& h : res.horizons) {
    Json c;
    c["horizon"] = h.horizon;
    c["n_eff"] = h.n_eff;
    c["lambda"] = h.lambda;
    c["objective"] = h.solution.objective;
    c["kkt_violation"] = h.solution.kkt_violation;
    c["converged"] = h.solution.converged;
    c["delta_z"] = h.delta_z;
    hs.push_back(std::move(c));
  }
  j["horizons"] = std::move(hs);
  Json irf = Json::array();
  for (const IrfPoint& pt : res.irf) {
    Json c;
    c["horizon"] = pt.horizon;
    c["regime"] = pt.regime;
    c["estimate"] = pt.estimate;
    c["lasso"] = pt.lasso;
    c["se"] = pt.se;
    c["ci_lo"] = pt.ci_lo;
    c["ci_hi"] = pt.ci_hi;
    irf.push_back(std::move(c));
  }
  j["irf"] = std::move(irf);
  return j;
}

std::string irf_csv(const LpResult& res) {
  std::ostringstream out;
  out << "horizon,regime,estimate,se,ci_lo,ci_hi\n";
  for (const IrfPoint& pt : res.irf) {
    out << pt.horizon << ',' << pt.regime << ',' << format_double(pt.estimate) << ',' << format_double(pt.se) << ','
        << format_double(pt.ci_lo) << ',' << format_double(pt.ci_hi) << '\n';
  }
  return out.str();
}

Json mc_config_json(const McConfig& cfg) {
  Json c;
  c["name"] = cfg.name;
  c["n"] = cfg.n;
  c["two_p"] = cfg.two_p;
  c["s0"] = cfg.s0;
  c["b"] = cfg.b;
  c["b1"] = cfg.b1;
  c["rho_qx"] = cfg.rho_qx;
  c["tau0"] = cfg.tau0;
  c["n_reps"] = cfg.n_reps;
  c["seed"] = cfg.seed;
  c["alpha_level"] = cfg.alpha_level;
  c["noise_var"] = cfg.noise_var;
  c["toeplitz"] = cfg.toeplitz;
  c["grid_lo"] = cfg.grid.lo;
  c["grid_hi"] = cfg.grid.hi;
  c["grid_mode"] = grid_mode_name(cfg.grid.mode);
  c["grid_step"] = cfg.grid.step;
  c["grid_points"] = cfg.grid.count;
  c["lambda_rule"] = rule_name(cfg.lambda.rule);
  c["lambda_value"] = cfg.lambda.value;
  c["sigma_refits"] = cfg.lambda.sigma_refits;
  c["lambda_node"] = cfg.lambda_node;
  c["tol"] = cfg.lasso.tol;
  c["max_iter"] = cfg.lasso.max_iter;
  return c;
}

Json mc_json(const McReport& rep) {
  Json j;
  j["config"] = mc_config_json(rep.config);
  j["n_success"] = rep.n_success;
  j["n_failed"] = rep.n_failed;
  // Omitted entirely for null models, which have no threshold to recover.
  if (rep.has_tau_error) j["mean_abs_tau_err"] = rep.mean_abs_tau_err;
  j["ell"] = rep.ell;
  j["ell_S"] = rep.ell_s;
  j["ell_Sc"] = rep.ell_sc;
  j["cov"] = rep.cov;
  j["cov_S"] = rep.cov_s;
  j["cov_Sc"] = rep.cov_sc;
  j["fwer"] = rep.fwer;
  j["power"] = rep.power;
  j["power_all"] = rep.power_all;
  j["mean_lambda"] = rep.mean_lambda;
  j["mean_delta_ratio"] = rep.mean_delta_ratio;
  j["ks_statistic"] = rep.ks_statistic;
  j["ks_pvalue"] = rep.ks_pvalue;
  j["qq_slope"] = rep.qq_slope;
  j["qq_intercept"] = rep.qq_intercept;
  j["z_pool_size"] = rep.z_pool.size();
  j["prediction_norm"] = rep.prediction_norm;
  Json d;
  d["fits"] = rep.fits;
  d["nonconverged"] = rep.nonconverged;
  d["kkt_failures"] = rep.kkt_failures;
  d["max_kkt"] = rep.max_kkt;
  d["bound_rows"] = rep.bound_rows;
  d["bound_violations"] = rep.bound_violations;
  d["max_bound_excess"] = rep.max_bound_excess;
  j["diagnostics"] = std::move(d);
  Json recs = Json::array();
  for (const RepRecord& r : rep.records) {
    Json c;
    c["rep"] = r.rep;
    c["ok"] = r.ok;
    c["error"] = r.error;
    c["tau_hat"] = r.tau_hat;
    c["tau_err"] = r.tau_err;
    c["lambda"] = r.lambda;
    c["sigma_hat"] = r.sigma_hat;
    c["prediction_norm"] = r.prediction_norm;
    c["delta_ratio"] = r.delta_ratio;
    c["fits"] = r.fits;
    c["nonconverged"] = r.nonconverged;
    c["max_kkt"] = r.max_kkt;
    c["bound_violations"] = r.bound_violations;
    recs.push_back(std::move(c));
  }
  j["records"] = std::move(recs);
  return j;
}

std::string zscores_csv(const McReport& rep) {
  std::ostringstream out;
  out << "rep,index,block,null,z\n";
  for (const RepRecord& r : rep.records) {
    if (!r.ok) continue;
    const Index p = r.alpha0.size() / 2;
    for (Index k = 0; k < r.z.size(); ++k) {
      out << r.rep << ',' << k << ',' << coord_block(k, p) << ',' << int(r.alpha0(k) == 0.0) << ','
          << format_double(r.z(k)) << '\n';
    }
  }
  return out.str();
}

std::string ci_lengths_csv(const McReport& rep) {
  std::ostringstream out;
  out << "rep,index,block,active,length,hit\n";
  for (const RepRecord& r : rep.records) {
    if (!r.ok) continue;
    const Index p = r.alpha0.size() / 2;
    for (Index k = 0; k < r.ci_length.size(); ++k) {
      out << r.rep << ',' << k << ',' << coord_block(k, p) << ',' << int(r.alpha0(k) != 0.0) << ','
          << format_double(r.ci_length(k)) << ',' << int(r.hit[static_cast<std::size_t>(k)]) << '\n';
    }
  }
  return out.str();
}

std::string profile_csv(const std::vector<double>& grid, const Vector& profile) {
  std::ostringstream out;
  out << "tau,objective\n";
  for (std::size_t k = 0; k < grid.size() && static_cast<Index>(k) < profile.size(); ++k) {
    out << format_double(grid[k]) << ',' << format_double(profile(static_cast<Index>(k))) << '\n';
  }
  return out.str();
}

FixedCoefficients read_fit_json(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw InputError("cannot open '" + path + "'");
  Json j;
  try {
    f >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InputError("'" + path + "' is not valid JSON: " + e.what());
  }
  FixedCoefficients out;
  try {
    out.tau = j.at("tau_hat").get<double>();
    out.lambda = j.at("lambda").get<double>();
    out.objective = j.at("objective").get<double>();
    const auto c = j.at("coef").get<std::vector<double>>();
    out.coef = Eigen::Map<const Vector>(c.data(), static_cast<Index>(c.size()));
  } catch (const nlohmann::json::exception& e) {
    throw InputError("'" + path + "' lacks fit fields: " + e.what());
  }
  return out;
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot write '" + path + "'");
  f << content;
  if (!f) throw InputError("write failed for '" + path + "'");
}

void write_json(const std::string& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

}  // namespace threshlasso
