#include "threshlasso/hac.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "threshlasso/errors.hpp"

namespace threshlasso {

double bartlett_weight(Index l, Index k_n) {
  require(k_n >= 1, "bartlett_weight: k_n must be at least 1");
  require(l >= 0 && l < k_n, "bartlett_weight: lag must satisfy 0 <= l < k_n");
  return 1.0 - static_cast<double>(l) / static_cast<double>(k_n);
}

Index auto_bandwidth(Index n) {
  const auto k = static_cast<Index>(std::floor(4.0 * std::pow(static_cast<double>(n) / 100.0, 2.0 / 9.0)));
  return std::max<Index>(1, k);
}

Index resolve_bandwidth(const HacConfig& cfg, Index n) {
  if (cfg.bandwidth < 0) throw InputError("bandwidth must be non-negative (0 selects it automatically)");
  const Index k = cfg.bandwidth == 0 ? auto_bandwidth(n) : cfg.bandwidth;
  if (k > n) {
    throw InputError("bandwidth " + std::to_string(k) + " exceeds the sample size " + std::to_string(n));
  }
  return k;
}

Matrix long_run_variance(const Matrix& scores, Index k_n) {
  const Index n = scores.rows();
  if (k_n < 1 || k_n > n) {
    throw InputError("bandwidth " + std::to_string(k_n) + " outside [1, n = " + std::to_string(n) + "]");
  }
  Matrix out = scores.transpose() * scores / static_cast<double>(n);
  for (Index l = 1; l < k_n; ++l) {
    const Matrix xi = scores.bottomRows(n - l).transpose() * scores.topRows(n - l) / static_cast<double>(n - l);
    out += bartlett_weight(l, k_n) * (xi + xi.transpose());
  }
  return out;
}

LongRunCov long_run_cov(const Matrix& scores_lower, const Matrix& scores_upper, const HacConfig& cfg) {
  require(scores_lower.rows() == scores_upper.rows(), "long_run_cov: score matrices differ in length");
  const Index n = scores_lower.rows();
  const Index ml = scores_lower.cols();
  const Index mu = scores_upper.cols();
  Matrix stacked(n, ml + mu);
  stacked.leftCols(ml) = scores_lower;
  stacked.rightCols(mu) = scores_upper;
  LongRunCov cov;
  cov.k_n = resolve_bandwidth(cfg, n);
  const Matrix s = long_run_variance(stacked, cov.k_n);
  cov.omega = s.topLeftCorner(ml, ml);
  cov.omega_tilde = s.bottomRightCorner(mu, mu);
  cov.omega_bar = s.topRightCorner(ml, mu);
  return cov;
}

namespace {

Index position(const std::vector<Index>& nodes, Index j) {
  const auto it = std::lower_bound(nodes.begin(), nodes.end(), j);
  return (it != nodes.end() && *it == j) ? static_cast<Index>(it - nodes.begin()) : -1;
}

// Rows of T: how each coordinate loads on the stacked (lower, upper) scores.
Matrix loadings(const PsiModel& model, const std::vector<Index>& coords) {
  const Index p = model.p;
  const auto ml = static_cast<Index>(model.lower_nodes.size());
  const auto mu = static_cast<Index>(model.upper_nodes.size());
  Matrix t = Matrix::Zero(static_cast<Index>(coords.size()), ml + mu);
  for (std::size_t k = 0; k < coords.size(); ++k) {
    const Index r = coords[k];
    require(r >= 0 && r < 2 * p, "psi: coordinate out of range");
    const Index j = r % p;
    const Index ub = position(model.upper_nodes, j);
    require(ub >= 0, "psi: coordinate " + std::to_string(r) + " has no upper-regime nodewise fit");
    if (r < p) {
      t(static_cast<Index>(k), ml + ub) = 1.0 / model.z_sq_upper(ub);
    } else {
      const Index lb = position(model.lower_nodes, j);
      require(lb >= 0, "psi: coordinate " + std::to_string(r) + " has no lower-regime nodewise fit");
      t(static_cast<Index>(k), lb) = 1.0 / model.z_sq_lower(lb);
      t(static_cast<Index>(k), ml + ub) = -1.0 / model.z_sq_upper(ub);
    }
  }
  return t;
}

Matrix stacked_cov(const LongRunCov& cov) {
  const Index ml = cov.omega.rows();
  const Index mu = cov.omega_tilde.rows();
  Matrix s(ml + mu, ml + mu);
  s.topLeftCorner(ml, ml) = cov.omega;
  s.bottomRightCorner(mu, mu) = cov.omega_tilde;
  s.topRightCorner(ml, mu) = cov.omega_bar;
  s.bottomLeftCorner(mu, ml) = cov.omega_bar.transpose();
  return s;
}

}  // namespace

double psi_variance(const Vector& g, const PsiModel& model) {
  require(g.size() == 2 * model.p, "psi_variance: contrast has wrong length");
  std::vector<Index> support;
  for (Index r = 0; r < g.size(); ++r) {
    if (g(r) != 0.0) support.push_back(r);
  }
  if (support.empty()) return 0.0;
  const Matrix t = loadings(model, support);
  Vector gs(static_cast<Index>(support.size()));
  for (std::size_t k = 0; k < support.size(); ++k) gs(static_cast<Index>(k)) = g(support[k]);
  const Vector u = t.transpose() * gs;
  return u.dot(stacked_cov(model.cov) * u);
}

Matrix psi_matrix(const PsiModel& model, const std::vector<Index>& coords) {
  const Matrix t = loadings(model, coords);
  return t * stacked_cov(model.cov) * t.transpose();
}

NodewiseScores nodewise_scores(const Sample& sample, const PrecisionEstimate& estimate, const Vector& residuals) {
  const Index n = sample.n();
  const Index p = sample.p();
  require(estimate.p == p, "nodewise_scores: estimate does not match the sample");
  require(residuals.size() == n, "nodewise_scores: residual length does not match the sample");
  NodewiseScores out;
  for (const NodewiseFit& fit : estimate.fits) {
    (fit.regime == Regime::Lower ? out.lower_nodes : out.upper_nodes).push_back(fit.j);
  }
  out.lower = Matrix::Zero(n, static_cast<Index>(out.lower_nodes.size()));
  out.upper = Matrix::Zero(n, static_cast<Index>(out.upper_nodes.size()));
  Index li = 0, ui = 0;
  for (const NodewiseFit& fit : estimate.fits) {
    Vector coef = Vector::Zero(p);
    coef(fit.j) = 1.0;
    for (Index k = 0; k < p - 1; ++k) coef(k < fit.j ? k : k + 1) = -fit.gamma(k);
    Vector v = sample.x * coef;
    for (Index i = 0; i < n; ++i) {
      const bool lower = sample.q(i) < estimate.tau;
      if (lower != (fit.regime == Regime::Lower)) v(i) = 0.0;
    }
    if (fit.regime == Regime::Lower) {
      out.lower.col(li++) = v.cwiseProduct(residuals);
    } else {
      out.upper.col(ui++) = v.cwiseProduct(residuals);
    }
  }
  return out;
}

PsiModel build_psi(const Sample& sample, const PrecisionEstimate& estimate, const Vector& residuals,
                   const HacConfig& cfg) {
  const NodewiseScores scores = nodewise_scores(sample, estimate, residuals);
  PsiModel model;
  model.p = estimate.p;
  model.lower_nodes = scores.lower_nodes;
  model.upper_nodes = scores.upper_nodes;
  model.z_sq_lower.resize(static_cast<Index>(model.lower_nodes.size()));
  model.z_sq_upper.resize(static_cast<Index>(model.upper_nodes.size()));
  for (std::size_t k = 0; k < model.lower_nodes.size(); ++k) {
    model.z_sq_lower(static_cast<Index>(k)) = estimate.z_sq_lower(model.lower_nodes[k]);
  }
  for (std::size_t k = 0; k < model.upper_nodes.size(); ++k) {
    model.z_sq_upper(static_cast<Index>(k)) = estimate.z_sq_upper(model.upper_nodes[k]);
  }
  model.cov = long_run_cov(scores.lower, scores.upper, cfg);
  return model;
}

}  // namespace threshlasso
