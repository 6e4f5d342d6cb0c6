#include "threshlasso/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include "threshlasso/csv.hpp"
#include "threshlasso/errors.hpp"
#include "threshlasso/inference.hpp"
#include "threshlasso/lambda.hpp"
#include "threshlasso/lp.hpp"
#include "threshlasso/montecarlo.hpp"
#include "threshlasso/nodewise.hpp"
#include "threshlasso/parallel.hpp"
#include "threshlasso/report_io.hpp"
#include "threshlasso/threshold_search.hpp"

namespace threshlasso::cli {

namespace {

struct Settings {
  std::string input;
  std::string output = ".";
  std::string config;
  std::string y = "y";
  std::string q = "q";
  std::string x;
  double grid_lo = 0.15;
  double grid_hi = 0.85;
  int grid_points = 71;
  double grid_step = 0.0;  // > 0 switches to fixed-step thresholds
  std::string lambda = "plugin";
  double lambda_node = 0.0;
  double alpha = 0.05;
  std::string variance;  // robust | hac; empty picks hac iff --bandwidth given
  int bandwidth = 0;
  std::vector<std::string> joint;
  std::string coef_from;
  int hmax = 5;
  int lags = 4;
  std::string shock = "shock";
  std::string slow;
  std::string fast;
  bool include_response = false;
  std::string preset;
  std::uint64_t seed = 1;
  int threads = 0;
  int reps = 0;
  bool keep_profiles = false;
  Index n = 0, two_p = 0, s0 = -1;
  double b = std::numeric_limits<double>::quiet_NaN();
  double b1 = std::numeric_limits<double>::quiet_NaN();
  double rho = std::numeric_limits<double>::quiet_NaN();
  double tau0 = std::numeric_limits<double>::quiet_NaN();
  double noise_var = std::numeric_limits<double>::quiet_NaN();
  double tol = 1e-7;
  int max_iter = 10000;
};

struct Binding {
  std::vector<std::string> keys;
  CLI::Option* option;
  std::function<void(const Json&)> set;
};

using Registry = std::vector<Binding>;

template <class T>
CLI::Option* bind_opt(CLI::App* app, Registry& reg, const std::string& flag, T& var, const std::string& desc,
                  std::vector<std::string> extra_keys = {}) {
  CLI::Option* opt = app->add_option(flag, var, desc);
  std::string key = flag.substr(2);
  std::vector<std::string> keys{key};
  std::replace(key.begin(), key.end(), '-', '_');
  if (key != keys.front()) keys.push_back(key);
  for (auto& k : extra_keys) keys.push_back(std::move(k));
  reg.push_back({keys, opt, [&var, flag](const Json& j) {
                   try {
                     var = j.get<T>();
                   } catch (const nlohmann::json::exception&) {
                     throw InputError("config value for " + flag + " has the wrong type");
                   }
                 }});
  return opt;
}

CLI::Option* bind_flag(CLI::App* app, Registry& reg, const std::string& flag, bool& var, const std::string& desc) {
  CLI::Option* opt = app->add_flag(flag, var, desc);
  std::string key = flag.substr(2);
  std::vector<std::string> keys{key};
  std::replace(key.begin(), key.end(), '-', '_');
  if (key != keys.front()) keys.push_back(key);
  reg.push_back({keys, opt, [&var, flag](const Json& j) {
                   if (!j.is_boolean()) throw InputError("config value for " + flag + " must be a boolean");
                   var = j.get<bool>();
                 }});
  return opt;
}

void add_common(CLI::App* app, Registry& reg, Settings& s) {
  bind_opt(app, reg, "--output", s.output, "Output directory (created if missing)");
  bind_opt(app, reg, "--threads", s.threads, "Worker threads (default THRESHLASSO_THREADS or all cores)");
  bind_opt(app, reg, "--tol", s.tol, "Lasso convergence tolerance");
  bind_opt(app, reg, "--max-iter", s.max_iter, "Lasso sweep limit");
  app->add_option("--config", s.config, "JSON file of option values; flags win");
}

void add_estimation(CLI::App* app, Registry& reg, Settings& s) {
  bind_opt(app, reg, "--input", s.input, "Input CSV with a header row (required, flag or config)");
  bind_opt(app, reg, "--q", s.q, "Threshold variable column");
  bind_opt(app, reg, "--grid-lo", s.grid_lo, "Lower end of the threshold band");
  bind_opt(app, reg, "--grid-hi", s.grid_hi, "Upper end of the threshold band");
  bind_opt(app, reg, "--grid-points", s.grid_points, "Quantile grid size");
  bind_opt(app, reg, "--grid-step", s.grid_step, "Fixed threshold step (band read as threshold values)");
  bind_opt(app, reg, "--lambda", s.lambda, "plugin, cv, or a number");
  bind_opt(app, reg, "--alpha", s.alpha, "Significance level");
  bind_opt(app, reg, "--lambda-node", s.lambda_node, "Nodewise penalty (0: sqrt(log p / n))");
}

GridSpec grid_spec(const Settings& s) {
  GridSpec g;
  g.lo = s.grid_lo;
  g.hi = s.grid_hi;
  g.count = s.grid_points;
  if (s.grid_step > 0.0) {
    g.mode = GridMode::FixedStep;
    g.step = s.grid_step;
  }
  return g;
}

LambdaSpec lambda_spec(const Settings& s) {
  LambdaSpec l;
  if (s.lambda == "plugin") return l;
  if (s.lambda == "cv") {
    l.rule = LambdaRule::CrossValidation;
    return l;
  }
  double v = 0.0;
  const char* first = s.lambda.data();
  const char* last = first + s.lambda.size();
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last || !(v >= 0.0) || !std::isfinite(v)) {
    throw InputError("--lambda must be plugin, cv, or a non-negative number, got '" + s.lambda + "'");
  }
  l.rule = LambdaRule::Fixed;
  l.value = v;
  return l;
}

LassoConfig lasso_config(const Settings& s) {
  LassoConfig c;
  c.tol = s.tol;
  c.max_iter = s.max_iter;
  validate_config(c);
  return c;
}

std::vector<Index> parse_indices(const std::string& text, Index bound) {
  std::vector<Index> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    long long v = 0;
    const char* first = item.data();
    const char* last = first + item.size();
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last || v < 0 || v >= bound) {
      throw InputError("index list '" + text + "' needs integers in [0, " + std::to_string(bound) + ")");
    }
    out.push_back(static_cast<Index>(v));
  }
  if (out.empty()) throw InputError("empty index list");
  return out;
}

std::string out_path(const Settings& s, const std::string& file) {
  return (std::filesystem::path(s.output) / file).string();
}

void ensure_output(const Settings& s) {
  std::error_code ec;
  std::filesystem::create_directories(s.output, ec);
  if (ec) throw InputError("cannot create output directory '" + s.output + "': " + ec.message());
}

struct Fitted {
  Sample sample;
  std::vector<std::string> names;
  ThresholdFit fit;
  LambdaChoice lambda;
};

Fitted run_fit(const Settings& s) {
  Fitted f;
  ColumnMapping m;
  m.y = s.y;
  m.q = s.q;
  m.x = s.x;
  f.sample = read_sample(s.input, m, &f.names);
  const LassoConfig cfg = lasso_config(s);
  const RegimeGrid grid = make_grid(f.sample, grid_spec(s));
  f.lambda = select_lambda(f.sample, grid, lambda_spec(s), cfg);
  ProfileOptions po;
  po.threads = resolve_threads(s.threads);
  f.fit = profile_fit(f.sample, grid, f.lambda.lambda, cfg, po);
  return f;
}

Fitted load_fit(const Settings& s) {
  Fitted f;
  ColumnMapping m;
  m.y = s.y;
  m.q = s.q;
  m.x = s.x;
  f.sample = read_sample(s.input, m, &f.names);
  const FixedCoefficients fc = read_fit_json(s.coef_from);
  if (fc.coef.size() != 2 * f.sample.p()) {
    throw InputError("'" + s.coef_from + "' has " + std::to_string(fc.coef.size()) + " coefficients, data needs " +
                     std::to_string(2 * f.sample.p()));
  }
  const ThresholdDesign d = build_design(f.sample, fc.tau);
  f.fit.alpha_hat = fc.coef;
  f.fit.tau_hat = fc.tau;
  f.fit.lambda = fc.lambda;
  f.fit.grid = {fc.tau};
  f.fit.solution.coef = fc.coef;
  f.fit.solution.lambda = fc.lambda;
  f.fit.solution.objective = objective(d, f.sample.y, fc.coef, fc.lambda);
  f.fit.solution.converged = true;
  f.fit.profile = Vector::Constant(1, f.fit.solution.objective);
  f.fit.argmin_set = {0};
  f.lambda.lambda = fc.lambda;
  return f;
}

void write_fit(const Settings& s, const Fitted& f) {
  write_json(out_path(s, "fit.json"), fit_json(f.fit, f.lambda, f.names, f.sample.n()));
  write_text(out_path(s, "coef.csv"), coef_csv(f.fit, f.names));
}

int cmd_fit(const Settings& s, std::ostream& out) {
  ensure_output(s);
  const Fitted f = run_fit(s);
  write_fit(s, f);
  if (!f.lambda.warning.empty()) out << "warning: " << f.lambda.warning << "\n";
  out << "tau_hat " << format_double(f.fit.tau_hat) << " lambda " << format_double(f.fit.lambda) << " active "
      << f.fit.solution.active_count() << "\n";
  return 0;
}

int cmd_infer(const Settings& s, std::ostream& out) {
  ensure_output(s);
  const Fitted f = s.coef_from.empty() ? run_fit(s) : load_fit(s);
  const Index p = f.sample.p();
  InferenceOptions io;
  io.alpha = s.alpha;
  io.hac.bandwidth = s.bandwidth;
  if (s.variance == "hac" || (s.variance.empty() && s.bandwidth > 0)) {
    io.variance = VarianceMethod::Hac;
  } else if (!s.variance.empty() && s.variance != "robust") {
    throw InputError("--variance must be robust or hac");
  }
  for (const std::string& j : s.joint) io.joint_sets.push_back(parse_indices(j, 2 * p));
  const double lambda_node = s.lambda_node > 0.0 ? s.lambda_node : root_log_ratio(p, f.sample.n());
  const PrecisionEstimate theta =
      assemble_theta(f.sample, f.fit.tau_hat, lambda_node, {}, lasso_config(s), resolve_threads(s.threads));
  const InferenceReport rep = infer(f.sample, f.fit, theta, io);
  write_fit(s, f);
  write_json(out_path(s, "report.json"), inference_json(rep, f.names));
  write_text(out_path(s, "report.csv"), inference_csv(rep, f.names));
  Index rejected = 0;
  for (bool r : rep.reject_bonferroni) rejected += r ? 1 : 0;
  out << "tau_hat " << format_double(rep.tau_hat) << " bonferroni_rejections " << rejected << "\n";
  return 0;
}

int cmd_lp(const Settings& s, std::ostream& out) {
  ensure_output(s);
  const CsvTable table = read_csv(s.input);
  LpMapping m;
  m.y = s.y;
  m.q = s.q;
  m.shock = s.shock;
  m.slow = s.slow;
  m.fast = s.fast;
  const LpData data = table_lp_data(table, m);
  LpSpec spec;
  spec.h_max = s.hmax;
  spec.lags = s.lags;
  spec.include_response = s.include_response;
  spec.alpha = s.alpha;
  spec.lambda_node = s.lambda_node;
  spec.hac.bandwidth = s.bandwidth;
  spec.grid = grid_spec(s);
  spec.lambda = lambda_spec(s);
  spec.lasso = lasso_config(s);
  spec.threads = resolve_threads(s.threads);
  const LpResult res = lp_fit(data, spec);
  write_text(out_path(s, "irf.csv"), irf_csv(res));
  write_json(out_path(s, "lp_report.json"), lp_json(res));
  out << "tau_hat " << format_double(res.tau_hat) << " horizons " << res.horizons.size() << " bandwidth "
      << res.bandwidth << "\n";
  return 0;
}

int cmd_simulate(const Settings& s, std::ostream& out) {
  ensure_output(s);
  McConfig cfg = s.preset.empty() ? McConfig{} : preset(s.preset);
  if (s.n > 0) cfg.n = s.n;
  if (s.two_p > 0) cfg.two_p = s.two_p;
  if (s.s0 >= 0) cfg.s0 = s.s0;
  if (!std::isnan(s.b)) cfg.b = s.b;
  if (!std::isnan(s.b1)) cfg.b1 = s.b1;
  if (!std::isnan(s.rho)) cfg.rho_qx = s.rho;
  if (!std::isnan(s.tau0)) cfg.tau0 = s.tau0;
  if (!std::isnan(s.noise_var)) cfg.noise_var = s.noise_var;
  if (s.reps > 0) cfg.n_reps = s.reps;
  cfg.seed = s.seed;
  cfg.alpha_level = s.alpha;
  cfg.lambda = lambda_spec(s);
  cfg.lambda_node = s.lambda_node;
  cfg.lasso = lasso_config(s);
  cfg.threads = resolve_threads(s.threads);
  cfg.keep_profiles = s.keep_profiles;
  validate_mc_config(cfg);
  const McReport rep = run_monte_carlo(cfg);
  write_json(out_path(s, "mc_report.json"), mc_json(rep));
  write_text(out_path(s, "zscores.csv"), zscores_csv(rep));
  write_text(out_path(s, "ci_lengths.csv"), ci_lengths_csv(rep));
  if (cfg.keep_profiles) {
    for (const RepRecord& r : rep.records) {
      if (r.ok) write_text(out_path(s, "profile_" + std::to_string(r.rep) + ".csv"), profile_csv(r.grid, r.profile));
    }
  }
  out << cfg.name << " reps " << rep.n_success << "/" << cfg.n_reps << " cov " << format_double(rep.cov) << " ell "
      << format_double(rep.ell) << " fwer " << format_double(rep.fwer) << " power " << format_double(rep.power)
      << "\n";
  return 0;
}

void apply_config(const std::string& path, const Registry& reg) {
  std::ifstream f(path);
  if (!f) throw InputError("cannot open config '" + path + "'");
  Json j;
  try {
    f >> j;
  } catch (const nlohmann::json::exception&) {
    throw InputError("config '" + path + "' is not valid JSON");
  }
  if (!j.is_object()) throw InputError("config '" + path + "' must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    const auto it = std::find_if(reg.begin(), reg.end(), [&](const Binding& b) {
      return std::find(b.keys.begin(), b.keys.end(), key) != b.keys.end();
    });
    if (it == reg.end()) throw InputError("unknown config key '" + key + "'");
    if (it->option->count() == 0) it->set(value);
  }
}

std::string one_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ';');
  return s;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args(argv, argv + argc);
  return run(args, out, err);
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Settings s;
  CLI::App app{"High-dimensional threshold regression with debiased Lasso inference", "threshlasso"};
  app.require_subcommand(1);
  std::map<CLI::App*, Registry> regs;

  CLI::App* fit = app.add_subcommand("fit", "Estimate tau and the Lasso coefficients");
  CLI::App* inf = app.add_subcommand("infer", "Fit, then debias and report confidence intervals");
  CLI::App* lp = app.add_subcommand("lp", "Threshold local projections");
  CLI::App* sim = app.add_subcommand("simulate", "Monte Carlo replications");

  for (CLI::App* sub : {fit, inf}) {
    Registry& r = regs[sub];
    add_common(sub, r, s);
    add_estimation(sub, r, s);
    bind_opt(sub, r, "--y", s.y, "Response column");
    bind_opt(sub, r, "--x", s.x, "Covariates: names, or first:last ranges (default all others)");
  }
  {
    Registry& r = regs[inf];
    bind_opt(inf, r, "--variance", s.variance, "robust or hac");
    bind_opt(inf, r, "--bandwidth", s.bandwidth, "HAC bandwidth k_n (0: automatic)");
    bind_opt(inf, r, "--joint", s.joint, "Comma separated coordinate indices for a chi-square test (repeatable)");
    bind_opt(inf, r, "--coef-from", s.coef_from, "Reuse tau and coefficients from a fit.json");
  }
  {
    Registry& r = regs[lp];
    add_common(lp, r, s);
    add_estimation(lp, r, s);
    bind_opt(lp, r, "--y", s.y, "Response column");
    bind_opt(lp, r, "--shock", s.shock, "Shock column");
    bind_opt(lp, r, "--slow", s.slow, "Controls entering contemporaneously and lagged");
    bind_opt(lp, r, "--fast", s.fast, "Controls entering lagged only (default: all remaining columns)");
    bind_opt(lp, r, "--hmax", s.hmax, "Largest horizon", {"h_max"});
    bind_opt(lp, r, "--lags", s.lags, "Number of lags");
    bind_opt(lp, r, "--bandwidth", s.bandwidth, "HAC bandwidth k_n (0: automatic)");
    bind_flag(lp, r, "--include-response", s.include_response, "Add y_t as a regressor");
  }
  {
    Registry& r = regs[sim];
    add_common(sim, r, s);
    bind_opt(sim, r, "--preset", s.preset, "table1-row1..10, table2-row1..6, smoke");
    bind_opt(sim, r, "--seed", s.seed, "Master seed");
    bind_opt(sim, r, "--reps", s.reps, "Replications (default from the preset)", {"n_reps"});
    bind_opt(sim, r, "--n", s.n, "Sample size");
    bind_opt(sim, r, "--two-p", s.two_p, "Number of coefficients 2p");
    bind_opt(sim, r, "--s0", s.s0, "Sparsity");
    bind_opt(sim, r, "--b", s.b, "Nonzero beta value");
    bind_opt(sim, r, "--b1", s.b1, "Nonzero delta value");
    bind_opt(sim, r, "--rho", s.rho, "Correlation of q's latent normal with x2", {"rho_qx"});
    bind_opt(sim, r, "--tau0", s.tau0, "True threshold");
    bind_opt(sim, r, "--noise-var", s.noise_var, "Error variance");
    bind_opt(sim, r, "--lambda", s.lambda, "plugin, cv, or a number");
    bind_opt(sim, r, "--lambda-node", s.lambda_node, "Nodewise penalty (0: sqrt(log p / n))");
    bind_opt(sim, r, "--alpha", s.alpha, "Significance level");
    bind_flag(sim, r, "--keep-profiles", s.keep_profiles, "Write profile_<rep>.csv per replication");
  }

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
    try {
      app.parse(rev);
    } catch (const CLI::CallForHelp&) {
      out << app.help();
      return 0;
    } catch (const CLI::CallForAllHelp&) {
      out << app.help("", CLI::AppFormatMode::All);
      return 0;
    } catch (const CLI::ParseError& e) {
      const auto subs = app.get_subcommands();
      if (!subs.empty() && e.get_exit_code() == 0) {
        out << subs.front()->help();
        return 0;
      }
      err << "error: " << one_line(e.what()) << "\n";
      return 1;
    }
    CLI::App* active = app.get_subcommands().front();
    if (!s.config.empty()) apply_config(s.config, regs[active]);
    if (active != sim && s.input.empty()) throw InputError("--input is required");
    if (active == fit) return cmd_fit(s, out);
    if (active == inf) return cmd_infer(s, out);
    if (active == lp) return cmd_lp(s, out);
    return cmd_simulate(s, out);
  } catch (const InputError& e) {
    err << "error: " << one_line(e.what()) << "\n";
    return 1;
  } catch (const ContractError& e) {
    err << "error: " << one_line(e.what()) << "\n";
    return 1;
  } catch (const EstimationError& e) {
    err << "error: " << one_line(e.what()) << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << one_line(e.what()) << "\n";
    return 2;
  }
}

}  // namespace threshlasso::cli
