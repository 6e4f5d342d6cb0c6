#pragma once

#include <vector>

#include "threshlasso/design.hpp"

namespace threshlasso {

struct LassoConfig {
  int max_iter = 10000;  // coordinate sweeps
  double tol = 1e-7;
  bool standardize = false;  // dense entry point only; rescales columns to unit RMS norm internally
  bool active_set = true;
  bool polish = true;  // exact re-solve on the detected active set once the sweeps settle
};

void validate_config(const LassoConfig& cfg);

struct LassoSolution {
  Vector coef;
  double lambda = 0.0;
  double objective = 0.0;
  double kkt_violation = 0.0;
  int iterations = 0;
  bool converged = false;
  bool polished = false;
  std::vector<double> objective_trace;  // after every sweep

  Index active_count() const;
};

/// Dense Gram view.
class DenseGram {
 public:
  explicit DenseGram(const Matrix& g) : g_(&g) {}
  Index dim() const { return g_->rows(); }
  double entry(Index i, Index j) const { return (*g_)(i, j); }
  double diag(Index j) const { return (*g_)(j, j); }
  // r -= s * G(:, j)
  void add_column(Index j, double s, Vector& r) const { r.noalias() -= s * g_->col(j); }

 private:
  const Matrix* g_;
};

/// The 2p x 2p threshold Gram [[F, M], [M, M]] without materializing it.
class ThresholdGram {
 public:
  ThresholdGram(const Matrix& full, const Matrix& lower) : f_(&full), m_(&lower), p_(full.rows()) {}
  Index dim() const { return 2 * p_; }
  double entry(Index i, Index j) const {
    if (i < p_ && j < p_) return (*f_)(i, j);
    return (*m_)(i % p_, j % p_);
  }
  double diag(Index j) const { return j < p_ ? (*f_)(j, j) : (*m_)(j - p_, j - p_); }
  void add_column(Index j, double s, Vector& r) const {
    const Index jj = j % p_;
    if (j < p_) {
      r.head(p_).noalias() -= s * f_->col(jj);
    } else {
      r.head(p_).noalias() -= s * m_->col(jj);
    }
    r.tail(p_).noalias() -= s * m_->col(jj);
  }

 private:
  const Matrix* f_;
  const Matrix* m_;
  Index p_;
};

/// A p x p Gram with row and column k removed, as used by nodewise regressions.
class ExcludedGram {
 public:
  ExcludedGram(const Matrix& g, Index excluded) : g_(&g), k_(excluded), p_(g.rows()) {}
  Index dim() const { return p_ - 1; }
  Index source(Index i) const { return i < k_ ? i : i + 1; }
  double entry(Index i, Index j) const { return (*g_)(source(i), source(j)); }
  double diag(Index j) const { return (*g_)(source(j), source(j)); }
  void add_column(Index j, double s, Vector& r) const {
    const auto col = g_->col(source(j));
    r.head(k_).noalias() -= s * col.head(k_);
    r.tail(p_ - 1 - k_).noalias() -= s * col.tail(p_ - 1 - k_);
  }

 private:
  const Matrix* g_;
  Index k_;
  Index p_;
};

/// Minimizes yty - 2 c'a + a'Ga + lambda sum_j w_j |a_j|, i.e. the weighted Lasso
/// criterion written through the normalized Gram G = A'A/n, c = A'y/n, yty = y'y/n.
/// Coordinates with G_jj <= 0 are pinned at zero; w_j = 0 leaves a coordinate
/// unpenalized. Explicitly instantiated for the three Gram views above.
template <class G>
LassoSolution solve_gram(const G& gram, const Vector& c, double yty, double lambda, const Vector& weights,
                         const LassoConfig& cfg, const Vector* warm = nullptr);

/// Per-coordinate KKT violations for `coef` given r = c - G coef.
Vector kkt_gaps(const Vector& coef, const Vector& r, const Vector& diag, double lambda, const Vector& weights);

LassoSolution fit_weighted_lasso(const Matrix& a, const Vector& y, double lambda, const Vector& weights,
                                 const LassoConfig& cfg = {}, const Vector* warm = nullptr);

/// Threshold-design fit straight from regime sums: full = X'X/n, lower = M(tau).
LassoSolution fit_threshold_lasso(const Matrix& full, const Matrix& lower, const Vector& full_xty,
                                  const Vector& lower_xty, double yty, double lambda, const Vector& weights,
                                  const LassoConfig& cfg = {}, const Vector* warm = nullptr);

LassoSolution fit_system(const ThresholdSystem& sys, double lambda, const LassoConfig& cfg = {},
                         const Vector* warm = nullptr);

/// Recomputes max_j of the subgradient violation from the raw design.
double check_kkt(const LassoSolution& solution, const Matrix& a, const Vector& y, const Vector& weights);

}  // namespace threshlasso
