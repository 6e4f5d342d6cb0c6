#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "threshlasso/design.hpp"
#include "threshlasso/lambda.hpp"
#include "threshlasso/lasso.hpp"

namespace threshlasso {

struct McConfig {
  std::string name = "custom";
  Index n = 400;
  Index two_p = 600;
  Index s0 = 15;
  double b = 1.0;
  double b1 = 0.5;
  double rho_qx = 0.0;
  double tau0 = 0.5;
  int n_reps = 20;
  std::uint64_t seed = 1;
  double alpha_level = 0.05;
  double noise_var = 0.5;
  double toeplitz = 0.9;
  GridSpec grid{0.15, 0.85, GridMode::FixedStep, 71, 0.01};
  LambdaSpec lambda;
  LassoConfig lasso;
  double lambda_node = 0.0;  // 0 selects sqrt(log p / n)
  int threads = 1;
  bool keep_profiles = false;

  Index p() const { return two_p / 2; }
};

void validate_mc_config(const McConfig& cfg);

/// Named configurations: table1-row1..10, table2-row1..6, smoke.
std::vector<std::string> preset_names();
McConfig preset(const std::string& name);

/// Portable generator: 64-bit Mersenne Twister with a Box-Muller normal and a
/// 53-bit uniform, so draws do not depend on the standard library vendor.
class McRng {
 public:
  explicit McRng(std::uint64_t seed) : eng_(seed) {}
  double uniform();  // (0, 1)
  double normal();

 private:
  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Seed of the stream for replication `rep`.
std::uint64_t stream_seed(std::uint64_t master, std::uint64_t rep);

struct McDraw {
  Sample sample;
  Vector alpha0;  // (beta0, delta0)
  double tau0 = 0.5;
};

McDraw gen_sample(const McConfig& cfg, int rep);

struct RepRecord {
  int rep = 0;
  bool ok = false;
  std::string error;
  double tau_hat = 0.0;
  double tau_err = 0.0;
  double lambda = 0.0;
  double sigma_hat = 0.0;
  Vector alpha0;
  Vector a_hat;
  Vector ci_length;
  std::vector<bool> hit;
  Vector z;  // (a_hat - alpha0) / se
  std::vector<bool> reject_bonferroni;
  double prediction_norm = 0.0;
  double delta_ratio = 0.0;  // mean_j |Delta_j| / sigma_j
  int fits = 0;
  int nonconverged = 0;
  int kkt_failures = 0;  // converged fits with kkt_violation > 1e-6
  double max_kkt = 0.0;
  int bound_rows = 0;
  int bound_violations = 0;  // precision rows with residual > bound + 1e-8
  double max_bound_excess = -1.0;
  std::vector<double> grid;
  Vector profile;  // filled when keep_profiles
};

RepRecord run_replication(const McConfig& cfg, int rep);

struct McReport {
  McConfig config;
  int n_success = 0;
  int n_failed = 0;
  bool has_tau_error = false;
  double mean_abs_tau_err = 0.0;
  double ell = 0.0, ell_s = 0.0, ell_sc = 0.0;
  double cov = 0.0, cov_s = 0.0, cov_sc = 0.0;
  double fwer = 0.0;
  double power = 0.0;          // over the support of beta0
  double power_all = 0.0;      // over the support of (beta0, delta0)
  double mean_lambda = 0.0;
  double mean_delta_ratio = 0.0;
  std::vector<double> z_pool;  // null coordinates, all successful reps
  std::vector<double> prediction_norm;
  double ks_statistic = 0.0;
  double ks_pvalue = 0.0;
  double qq_slope = 0.0;
  double qq_intercept = 0.0;
  int fits = 0;
  int nonconverged = 0;
  int kkt_failures = 0;
  double max_kkt = 0.0;
  int bound_rows = 0;
  int bound_violations = 0;
  double max_bound_excess = -1.0;
  std::vector<RepRecord> records;
};

McReport aggregate(const McConfig& cfg, std::vector<RepRecord> records);

/// Runs every replication (in parallel across reps) and aggregates in rep order.
McReport run_monte_carlo(const McConfig& cfg);

}  // namespace threshlasso
