#pragma once

#include <cstddef>
#include <vector>

#include "threshlasso/design.hpp"
#include "threshlasso/lasso.hpp"

namespace threshlasso {

struct ProfileOptions {
  bool warm_start = true;  // ascending sweep seeded by the previous solution
  int threads = 1;         // used only when warm_start is false
  std::vector<Index> unpenalized;
  std::vector<std::size_t> order;  // optional evaluation order for cold fits (a permutation of grid indices)
};

/// Per-grid-point solver diagnostics.
struct GridPointStats {
  double kkt_violation = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct ThresholdFit {
  Vector alpha_hat;  // beta = head(p), delta = tail(p)
  double tau_hat = 0.0;
  std::size_t tau_index = 0;
  std::vector<double> grid;
  Vector profile;  // penalized objective per grid point
  double lambda = 0.0;
  std::vector<std::size_t> argmin_set;
  std::vector<GridPointStats> stats;
  LassoSolution solution;  // the fit at tau_hat
  std::vector<Index> unpenalized;

  Index p() const { return alpha_hat.size() / 2; }
};

/// Profiles the penalized criterion over the grid. tau_hat is the largest grid
/// value whose objective is within 1e-9 (1 + |min|) of the minimum, counting
/// only converged fits.
ThresholdFit profile_fit(const Sample& sample, const RegimeGrid& grid, double lambda, const LassoConfig& cfg,
                         const ProfileOptions& opts = {});

/// Fixed-tau fit from a cold start.
LassoSolution refit_at(const Sample& sample, double tau, double lambda, const LassoConfig& cfg,
                       const std::vector<Index>& unpenalized = {});

}  // namespace threshlasso
