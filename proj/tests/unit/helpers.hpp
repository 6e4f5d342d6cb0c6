#pragma once

#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "threshlasso/design.hpp"

namespace th = threshlasso;

namespace testing {

using th::Index;
using th::Matrix;
using th::Vector;

inline Matrix randn(Index r, Index c, std::mt19937_64& g) {
  std::normal_distribution<double> d;
  Matrix m(r, c);
  for (Index j = 0; j < c; ++j)
    for (Index i = 0; i < r; ++i) m(i, j) = d(g);
  return m;
}

inline Vector randn(Index n, std::mt19937_64& g) { return randn(n, 1, g).col(0); }

inline Vector runif(Index n, std::mt19937_64& g) {
  std::uniform_real_distribution<double> d(0.0, 1.0);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = d(g);
  return v;
}

/// y = x beta + delta 1{q < tau0} x + noise, q uniform.
inline th::Sample threshold_sample(Index n, Index p, std::uint64_t seed, double b = 1.0, double b1 = 0.5,
                                   Index s0 = 2, double sd = 0.5, double tau0 = 0.5) {
  std::mt19937_64 g(seed);
  th::Sample s;
  s.x = randn(n, p, g);
  s.q = runif(n, g);
  s.y = sd * randn(n, g);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < std::min(s0, p); ++j) s.y(i) += b * s.x(i, j);
    if (s.q(i) < tau0) {
      for (Index j = s0; j < std::min(2 * s0, p); ++j) s.y(i) += b1 * s.x(i, j);
    }
  }
  return s;
}

/// Dense least squares via a column-pivoted QR, independent of the solver code.
inline Vector ols(const Matrix& a, const Vector& y) { return a.colPivHouseholderQr().solve(y); }

inline double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }


inline double crit(const Matrix& a, const Vector& y, const Vector& coef, double lambda, const Vector& w) {
  return (y - a * coef).squaredNorm() / a.rows() + lambda * w.cwiseProduct(coef.cwiseAbs()).sum();
}

// Enumerates every sign pattern in {-1, 0, +1}^d, solves the stationarity
// system on each support and keeps the feasible pattern with the lowest
// criterion.
inline Vector sign_enumeration(const Matrix& a, const Vector& y, double lambda, const Vector& w) {
  const Index d = a.cols();
  const double n = static_cast<double>(a.rows());
  const Matrix g = a.transpose() * a / n;
  const Vector c = a.transpose() * y / n;
  Vector best = Vector::Zero(d);
  double best_val = std::numeric_limits<double>::infinity();
  int total = 1;
  for (Index j = 0; j < d; ++j) total *= 3;
  for (int code = 0; code < total; ++code) {
    std::vector<Index> sup;
    std::vector<double> sg;
    int t = code;
    for (Index j = 0; j < d; ++j) {
      const int digit = t % 3;
      t /= 3;
      if (digit != 0) {
        sup.push_back(j);
        sg.push_back(digit == 1 ? 1.0 : -1.0);
      }
    }
    Vector coef = Vector::Zero(d);
    if (!sup.empty()) {
      const Index k = static_cast<Index>(sup.size());
      Matrix gs(k, k);
      Vector rhs(k);
      for (Index u = 0; u < k; ++u) {
        for (Index v = 0; v < k; ++v) gs(u, v) = g(sup[u], sup[v]);
        rhs(u) = c(sup[u]) - 0.5 * lambda * w(sup[u]) * sg[u];
      }
      const Vector sol = gs.ldlt().solve(rhs);
      bool ok = true;
      for (Index u = 0; u < k; ++u) {
        if (sol(u) * sg[u] <= 0.0) ok = false;
        coef(sup[u]) = sol(u);
      }
      if (!ok) continue;
    }
    const Vector r = c - g * coef;
    bool feasible = true;
    for (Index j = 0; j < d; ++j) {
      if (coef(j) == 0.0 && std::abs(r(j)) > 0.5 * lambda * w(j) + 1e-12) feasible = false;
    }
    if (!feasible) continue;
    const double val = crit(a, y, coef, lambda, w);
    if (val < best_val) {
      best_val = val;
      best = coef;
    }
  }
  return best;
}


}  // namespace testing
