#pragma once

#include <string>
#include <vector>

#include "threshlasso/design.hpp"
#include "threshlasso/lasso.hpp"

namespace threshlasso {

enum class LambdaRule { Plugin, Fixed, Path, CrossValidation };

struct LambdaSpec {
  LambdaRule rule = LambdaRule::Plugin;
  double value = 0.0;  // Fixed
  int path_count = 20;
  double path_ratio = 1e-3;  // smallest / largest lambda on the ladder
  int cv_folds = 5;
  int sigma_refits = 1;  // plugin: refits after the initial sqrt(log p / n) sd(y) fit
};

struct LambdaChoice {
  double lambda = 0.0;
  double sigma_hat = 0.0;  // plugin noise scale; 0 when not estimated
  double tau_used = 0.0;   // grid midpoint used for every auxiliary fit
  bool fallback = false;
  std::string warning;
  std::vector<double> path;
  std::vector<double> cv_error;  // mean held-out squared error per path entry
};

/// 4 sigma sqrt(2 log p / n), p the number of original covariates.
double plugin_lambda(double sigma_hat, Index p, Index n);

/// sqrt(log p / n); also the default nodewise penalty.
double root_log_ratio(Index p, Index n);

/// Smallest lambda at which every penalized coordinate is zero.
double lambda_max(const ThresholdSystem& sys);

/// `count` log-spaced values from hi down to hi * ratio.
std::vector<double> lambda_path(double hi, int count, double ratio);

/// Two-step noise scale: fit at sqrt(log p / n) sd(y), refit once at the plugin
/// level, sigma^2 = ||residual||_n^2 n / (n - #active).
double estimate_noise_scale(const Sample& sample, double tau, const LassoConfig& cfg,
                            const std::vector<Index>& unpenalized = {}, int refits = 1);

LambdaChoice select_lambda(const Sample& sample, const RegimeGrid& grid, const LambdaSpec& spec,
                           const LassoConfig& cfg, const std::vector<Index>& unpenalized = {});

}  // namespace threshlasso
