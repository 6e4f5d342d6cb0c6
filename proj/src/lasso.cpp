#include "threshlasso/lasso.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Cholesky>

#include "threshlasso/errors.hpp"

namespace threshlasso {

void validate_config(const LassoConfig& cfg) {
  if (!(cfg.tol > 0.0)) throw InputError("lasso: tol must be positive");
  if (cfg.max_iter < 1) throw InputError("lasso: max_iter must be at least 1");
}

Index LassoSolution::active_count() const { return (coef.array() != 0.0).count(); }

namespace {

double soft_threshold(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

double sign_of(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

// yty - 2c'a + a'Ga + penalty, with a'Ga = c'a - a'r.
double gram_objective(const Vector& coef, const Vector& r, const Vector& c, double yty, double lambda,
                      const Vector& weights) {
  return yty - c.dot(coef) - coef.dot(r) + lambda * weights.cwiseProduct(coef.cwiseAbs()).sum();
}

template <class G>
Vector fresh_residual(const G& gram, const Vector& c, const Vector& coef) {
  Vector r = c;
  for (Index j = 0; j < coef.size(); ++j) {
    if (coef(j) != 0.0) gram.add_column(j, coef(j), r);
  }
  return r;
}

}  // namespace

Vector kkt_gaps(const Vector& coef, const Vector& r, const Vector& diag, double lambda, const Vector& weights) {
  Vector gaps(coef.size());
  for (Index j = 0; j < coef.size(); ++j) {
    const double grad = 2.0 * r(j);
    const double pen = lambda * weights(j);
    if (diag(j) <= 0.0) {
      gaps(j) = 0.0;
    } else if (coef(j) != 0.0) {
      gaps(j) = std::abs(grad - pen * sign_of(coef(j)));
    } else {
      gaps(j) = std::max(0.0, std::abs(grad) - pen);
    }
  }
  return gaps;
}

template <class G>
LassoSolution solve_gram(const G& gram, const Vector& c, double yty, double lambda, const Vector& weights,
                         const LassoConfig& cfg, const Vector* warm) {
  validate_config(cfg);
  const Index d = gram.dim();
  require(c.size() == d, "solve_gram: c length does not match Gram dimension");
  require(weights.size() == d, "solve_gram: weights length does not match Gram dimension");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw InputError("lasso: lambda must be finite and non-negative");
  if ((weights.array() < 0.0).any() || !weights.allFinite()) {
    throw InputError("lasso: weights must be finite and non-negative");
  }

  Vector diag(d);
  for (Index j = 0; j < d; ++j) diag(j) = gram.diag(j);
  const Vector thr = 0.5 * lambda * weights;

  Vector coef = Vector::Zero(d);
  if (warm != nullptr) {
    require(warm->size() == d, "solve_gram: warm start has wrong length");
    coef = *warm;
  }
  for (Index j = 0; j < d; ++j) {
    if (diag(j) <= 0.0) coef(j) = 0.0;
  }
  Vector r = fresh_residual(gram, c, coef);

  const double kkt_tol = cfg.tol * std::max(1.0, 2.0 * (d > 0 ? c.cwiseAbs().maxCoeff() : 0.0));

  LassoSolution sol;
  sol.lambda = lambda;
  sol.objective_trace.push_back(gram_objective(coef, r, c, yty, lambda, weights));

  auto update = [&](Index j) -> double {
    if (diag(j) <= 0.0) return 0.0;
    const double z = r(j) + diag(j) * coef(j);
    const double next = soft_threshold(z, thr(j)) / diag(j);
    const double delta = next - coef(j);
    if (delta != 0.0) {
      gram.add_column(j, delta, r);
      coef(j) = next;
    }
    return std::abs(delta);
  };
  auto settled = [&](double change) {
    const double scale = std::max(1.0, d > 0 ? coef.cwiseAbs().maxCoeff() : 0.0);
    return change < cfg.tol * scale;
  };
  auto record = [&] { sol.objective_trace.push_back(gram_objective(coef, r, c, yty, lambda, weights)); };

  std::vector<Index> active;
  while (sol.iterations < cfg.max_iter) {
    double change = 0.0;
    for (Index j = 0; j < d; ++j) change = std::max(change, update(j));
    ++sol.iterations;
    record();

    if (settled(change)) {
      if (cfg.polish) {
        active.clear();
        for (Index j = 0; j < d; ++j) {
          if (coef(j) != 0.0) active.push_back(j);
        }
        const auto k = static_cast<Index>(active.size());
        if (k > 0) {
          Matrix ga(k, k);
          Vector rhs(k);
          for (Index a = 0; a < k; ++a) {
            for (Index b = 0; b < k; ++b) ga(a, b) = gram.entry(active[a], active[b]);
            rhs(a) = c(active[a]) - thr(active[a]) * sign_of(coef(active[a]));
          }
          Eigen::LLT<Matrix> llt(ga);
          if (llt.info() == Eigen::Success) {
            const Vector x = llt.solve(rhs);
            bool signs_ok = x.allFinite();
            for (Index a = 0; a < k && signs_ok; ++a) {
              if (thr(active[a]) > 0.0 && sign_of(x(a)) != sign_of(coef(active[a]))) signs_ok = false;
              if (x(a) == 0.0) signs_ok = false;
            }
            if (signs_ok) {
              Vector cand = Vector::Zero(d);
              for (Index a = 0; a < k; ++a) cand(active[a]) = x(a);
              const Vector cand_r = fresh_residual(gram, c, cand);
              const Vector cur_r = fresh_residual(gram, c, coef);
              const double cand_kkt = kkt_gaps(cand, cand_r, diag, lambda, weights).maxCoeff();
              const double cur_kkt = kkt_gaps(coef, cur_r, diag, lambda, weights).maxCoeff();
              const double cand_obj = gram_objective(cand, cand_r, c, yty, lambda, weights);
              const double cur_obj = sol.objective_trace.back();
              if (cand_kkt <= cur_kkt && cand_obj <= cur_obj + 1e-12 * (1.0 + std::abs(cur_obj))) {
                coef = cand;
                r = cand_r;
                sol.polished = true;
                sol.objective_trace.push_back(cand_obj);
              }
            }
          }
        }
      }
      r = fresh_residual(gram, c, coef);
      if (d == 0 || kkt_gaps(coef, r, diag, lambda, weights).maxCoeff() <= kkt_tol) {
        sol.converged = true;
        break;
      }
      continue;
    }

    if (cfg.active_set) {
      active.clear();
      for (Index j = 0; j < d; ++j) {
        if (coef(j) != 0.0) active.push_back(j);
      }
      while (sol.iterations < cfg.max_iter) {
        double inner = 0.0;
        for (Index j : active) inner = std::max(inner, update(j));
        ++sol.iterations;
        record();
        if (settled(inner)) break;
      }
    }
  }

  r = fresh_residual(gram, c, coef);
  sol.coef = coef;
  sol.objective = gram_objective(coef, r, c, yty, lambda, weights);
  sol.kkt_violation = d > 0 ? kkt_gaps(coef, r, diag, lambda, weights).maxCoeff() : 0.0;
  return sol;
}

template LassoSolution solve_gram<DenseGram>(const DenseGram&, const Vector&, double, double, const Vector&,
                                             const LassoConfig&, const Vector*);
template LassoSolution solve_gram<ThresholdGram>(const ThresholdGram&, const Vector&, double, double,
                                                 const Vector&, const LassoConfig&, const Vector*);
template LassoSolution solve_gram<ExcludedGram>(const ExcludedGram&, const Vector&, double, double,
                                                const Vector&, const LassoConfig&, const Vector*);

LassoSolution fit_weighted_lasso(const Matrix& a, const Vector& y, double lambda, const Vector& weights,
                                 const LassoConfig& cfg, const Vector* warm) {
  if (a.rows() != y.size()) throw InputError("lasso: design rows and y length differ");
  if (a.cols() != weights.size()) throw InputError("lasso: weights length does not match design columns");
  if (a.rows() < 1) throw InputError("lasso: empty design");
  const double n = static_cast<double>(a.rows());
  const double yty = y.squaredNorm() / n;

  if (!cfg.standardize) {
    const Matrix g = a.transpose() * a / n;
    const Vector c = a.transpose() * y / n;
    return solve_gram(DenseGram(g), c, yty, lambda, weights, cfg, warm);
  }

  // Solve in coordinates b_j = coef_j / s_j with unit-RMS columns, then map back.
  Vector s(a.cols());
  for (Index j = 0; j < a.cols(); ++j) {
    const double rms = std::sqrt(a.col(j).squaredNorm() / n);
    s(j) = rms > 0.0 ? 1.0 / rms : 1.0;
  }
  const Matrix as = a * s.asDiagonal();
  const Matrix g = as.transpose() * as / n;
  const Vector c = as.transpose() * y / n;
  const Vector ws = weights.cwiseProduct(s);
  Vector warm_s;
  if (warm != nullptr) warm_s = warm->cwiseQuotient(s);
  LassoSolution sol = solve_gram(DenseGram(g), c, yty, lambda, ws, cfg, warm != nullptr ? &warm_s : nullptr);
  sol.coef = sol.coef.cwiseProduct(s);
  const Matrix g0 = a.transpose() * a / n;
  const Vector c0 = a.transpose() * y / n;
  const Vector r0 = c0 - g0 * sol.coef;
  sol.objective = gram_objective(sol.coef, r0, c0, yty, lambda, weights);
  sol.kkt_violation = kkt_gaps(sol.coef, r0, g0.diagonal(), lambda, weights).maxCoeff();
  return sol;
}

LassoSolution fit_threshold_lasso(const Matrix& full, const Matrix& lower, const Vector& full_xty,
                                  const Vector& lower_xty, double yty, double lambda, const Vector& weights,
                                  const LassoConfig& cfg, const Vector* warm) {
  const Index p = full.rows();
  require(lower.rows() == p && full_xty.size() == p && lower_xty.size() == p,
          "fit_threshold_lasso: regime blocks have inconsistent sizes");
  Vector c(2 * p);
  c.head(p) = full_xty;
  c.tail(p) = lower_xty;
  return solve_gram(ThresholdGram(full, lower), c, yty, lambda, weights, cfg, warm);
}

LassoSolution fit_system(const ThresholdSystem& sys, double lambda, const LassoConfig& cfg, const Vector* warm) {
  return solve_gram(ThresholdGram(sys.full, sys.lower), sys.xty, sys.yty, lambda, sys.weights, cfg, warm);
}

double check_kkt(const LassoSolution& solution, const Matrix& a, const Vector& y, const Vector& weights) {
  require(solution.coef.size() == a.cols(), "check_kkt: coefficient length does not match design");
  require(a.rows() == y.size(), "check_kkt: design rows and y length differ");
  require(weights.size() == a.cols(), "check_kkt: weights length does not match design");
  if (a.cols() == 0) return 0.0;
  const double n = static_cast<double>(a.rows());
  const Vector r = a.transpose() * (y - a * solution.coef) / n;
  const Vector diag = a.colwise().squaredNorm().transpose() / n;
  return kkt_gaps(solution.coef, r, diag, solution.lambda, weights).maxCoeff();
}

}  // namespace threshlasso
