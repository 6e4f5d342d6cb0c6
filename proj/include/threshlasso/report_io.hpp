#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "threshlasso/inference.hpp"
#include "threshlasso/lambda.hpp"
#include "threshlasso/lp.hpp"
#include "threshlasso/montecarlo.hpp"
#include "threshlasso/threshold_search.hpp"

namespace threshlasso {

using Json = nlohmann::ordered_json;

/// Shortest text that parses back to the same double; "nan" for NaN.
std::string format_double(double v);

/// Coordinate labels: k < p is "beta" of x_names[k], k >= p is "delta" of x_names[k - p].
std::string coord_block(Index k, Index p);
std::string coord_name(Index k, const std::vector<std::string>& x_names);

Json fit_json(const ThresholdFit& fit, const LambdaChoice& lambda, const std::vector<std::string>& x_names, Index n);
std::string coef_csv(const ThresholdFit& fit, const std::vector<std::string>& x_names);

Json inference_json(const InferenceReport& rep, const std::vector<std::string>& x_names);
std::string inference_csv(const InferenceReport& rep, const std::vector<std::string>& x_names);

Json lp_json(const LpResult& res);
std::string irf_csv(const LpResult& res);

Json mc_config_json(const McConfig& cfg);
Json mc_json(const McReport& rep);
std::string zscores_csv(const McReport& rep);
std::string ci_lengths_csv(const McReport& rep);
std::string profile_csv(const std::vector<double>& grid, const Vector& profile);

/// Coefficients and tau taken back from a fit.json.
struct FixedCoefficients {
  double tau = 0.0;
  double lambda = 0.0;
  double objective = 0.0;
  Vector coef;
};

FixedCoefficients read_fit_json(const std::string& path);

void write_text(const std::string& path, const std::string& content);
void write_json(const std::string& path, const Json& j);

}  // namespace threshlasso
