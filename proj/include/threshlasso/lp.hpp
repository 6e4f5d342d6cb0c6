#pragma once

#include <string>
#include <vector>

#include "threshlasso/design.hpp"
#include "threshlasso/hac.hpp"
#include "threshlasso/inference.hpp"
#include "threshlasso/lambda.hpp"
#include "threshlasso/lasso.hpp"

namespace threshlasso {

/// Time-ordered series for a local projection. `slow` controls enter
/// contemporaneously and with lags; `fast` controls only with lags.
struct LpData {
  Vector y;
  Vector shock;
  Vector q;
  Matrix slow;  // T x n_s (may have zero columns)
  Matrix fast;  // T x n_f (may have zero columns)
};

struct LpSpec {
  int h_max = 5;
  int lags = 4;
  bool include_response = false;  // add y_t as a contemporaneous regressor
  double alpha = 0.05;
  double lambda_node = 0.0;  // 0 selects sqrt(log p / n)
  HacConfig hac;
  GridSpec grid;
  LambdaSpec lambda;
  LassoConfig lasso;
  int threads = 1;
};

/// Column layout of the per-horizon design.
struct LpLayout {
  Index shock = 0;
  Index intercept = 0;
  Index p = 0;
  std::vector<std::string> names;
};

/// Rows t = lags .. T-1-h: response y_{t+h}, regressors [shock_t, (y_t), slow_t,
/// lags 1..K of (slow, y, shock, fast), 1], threshold variable q_t.
Sample lp_sample(const LpData& data, const LpSpec& spec, int h, LpLayout* layout = nullptr);

struct IrfPoint {
  int horizon = 0;
  std::string regime;  // "upper" (q >= tau) or "lower" (q < tau)
  double estimate = 0.0;  // debiased
  double lasso = 0.0;     // Lasso estimate, unpenalized coordinate
  double se = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
};

struct LpHorizon {
  int horizon = 0;
  Index n_eff = 0;
  double lambda = 0.0;
  LassoSolution solution;
  InferenceReport report;  // rows = shock coordinates in both regimes
  double delta_z = 0.0;    // z statistic of the lower-minus-upper shock effect
};

struct LpResult {
  double tau_hat = 0.0;
  std::vector<double> grid;
  Vector profile;  // horizon-0 profile
  LpLayout layout;
  Index bandwidth = 0;
  std::vector<LpHorizon> horizons;
  std::vector<IrfPoint> irf;
};

LpResult lp_fit(const LpData& data, const LpSpec& spec);

}  // namespace threshlasso
