#include "threshlasso/threshold_search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "threshlasso/errors.hpp"
#include "threshlasso/parallel.hpp"

namespace threshlasso {

LassoSolution refit_at(const Sample& sample, double tau, double lambda, const LassoConfig& cfg,
                       const std::vector<Index>& unpenalized) {
  if (!std::isfinite(tau)) throw InputError("refit_at: tau must be finite");
  RegimeSweep sweep(sample);
  sweep.advance_to(tau);
  return fit_system(threshold_system(sweep, unpenalized), lambda, cfg);
}

ThresholdFit profile_fit(const Sample& sample, const RegimeGrid& grid, double lambda, const LassoConfig& cfg,
                         const ProfileOptions& opts) {
  const std::size_t m = grid.candidates.size();
  if (m == 0) throw InputError("profile_fit: empty grid");
  for (std::size_t k = 1; k < m; ++k) {
    if (!(grid.candidates[k] > grid.candidates[k - 1])) {
      throw InputError("profile_fit: grid candidates must be strictly increasing");
    }
  }
  validate_config(cfg);

  std::vector<LassoSolution> fits(m);
  if (opts.warm_start) {
    RegimeSweep sweep(sample);
    const Vector* warm = nullptr;
    for (std::size_t k = 0; k < m; ++k) {
      sweep.advance_to(grid.candidates[k]);
      fits[k] = fit_system(threshold_system(sweep, opts.unpenalized), lambda, cfg, warm);
      warm = &fits[k].coef;
    }
  } else {
    std::vector<std::size_t> order = opts.order;
    if (order.empty()) {
      order.resize(m);
      std::iota(order.begin(), order.end(), std::size_t{0});
    }
    {
      std::vector<std::size_t> check = order;
      std::sort(check.begin(), check.end());
      bool ok = check.size() == m;
      for (std::size_t k = 0; ok && k < m; ++k) ok = check[k] == k;
      if (!ok) throw InputError("profile_fit: order is not a permutation of the grid");
    }
    // Cold fits depend only on their own tau: systems are built per batch
    // (the sweep resets itself when tau moves backwards) and fitted on the pool.
    const int threads = std::max(1, resolve_threads(opts.threads));
    const std::size_t batch = static_cast<std::size_t>(threads);
    RegimeSweep sweep(sample);
    for (std::size_t start = 0; start < m; start += batch) {
      const std::size_t stop = std::min(m, start + batch);
      std::vector<ThresholdSystem> systems(stop - start);
      for (std::size_t b = start; b < stop; ++b) {
        sweep.advance_to(grid.candidates[order[b]]);
        systems[b - start] = threshold_system(sweep, opts.unpenalized);
      }
      parallel_for(stop - start, threads, [&](std::size_t b) {
        fits[order[start + b]] = fit_system(systems[b], lambda, cfg);
      });
    }
  }

  ThresholdFit out;
  out.grid = grid.candidates;
  out.lambda = lambda;
  out.unpenalized = opts.unpenalized;
  out.profile.resize(static_cast<Index>(m));
  out.stats.resize(m);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < m; ++k) {
    out.profile(static_cast<Index>(k)) = fits[k].objective;
    out.stats[k] = {fits[k].kkt_violation, fits[k].iterations, fits[k].converged};
    if (fits[k].converged) best = std::min(best, fits[k].objective);
  }
  if (!std::isfinite(best)) {
    std::ostringstream msg;
    msg << "profile_fit: no grid point converged;";
    for (std::size_t k = 0; k < m; ++k) {
      msg << " tau=" << grid.candidates[k] << " kkt=" << fits[k].kkt_violation << " iters=" << fits[k].iterations
          << ";";
    }
    throw EstimationError(msg.str());
  }
  const double tie = 1e-9 * (1.0 + std::abs(best));
  for (std::size_t k = 0; k < m; ++k) {
    if (fits[k].converged && fits[k].objective <= best + tie) out.argmin_set.push_back(k);
  }
  out.tau_index = out.argmin_set.back();
  out.tau_hat = grid.candidates[out.tau_index];
  out.solution = fits[out.tau_index];
  out.alpha_hat = out.solution.coef;
  return out;
}

}  // namespace threshlasso
