#include "threshlasso/design.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "threshlasso/errors.hpp"

namespace threshlasso {

Sample make_sample(Vector y, Matrix x, Vector q, bool time_ordered) {
  Sample s{std::move(y), std::move(x), std::move(q), time_ordered};
  validate_sample(s);
  return s;
}

void validate_sample(const Sample& s) {
  const Index n = s.y.size();
  if (s.x.rows() != n || s.q.size() != n) {
    throw InputError("sample: y, x and q must share the same number of rows (y=" + std::to_string(n) +
                     ", x=" + std::to_string(s.x.rows()) + ", q=" + std::to_string(s.q.size()) + ")");
  }
  if (n < 2) throw InputError("sample: need at least 2 observations, got " + std::to_string(n));
  if (s.x.cols() < 1) throw InputError("sample: need at least one covariate");
  if (!s.y.allFinite()) throw InputError("sample: y contains non-finite values");
  if (!s.q.allFinite()) throw InputError("sample: q contains non-finite values");
  if (!s.x.allFinite()) throw InputError("sample: x contains non-finite values");
}

ThresholdDesign build_design(const Sample& s, double tau) {
  if (!std::isfinite(tau)) throw InputError("build_design: tau must be finite");
  validate_sample(s);
  const Index n = s.n();
  const Index p = s.p();
  ThresholdDesign d;
  d.tau = tau;
  d.xaug.resize(n, 2 * p);
  d.xaug.leftCols(p) = s.x;
  for (Index i = 0; i < n; ++i) {
    if (s.q(i) < tau) {
      d.xaug.row(i).tail(p) = s.x.row(i);
    } else {
      d.xaug.row(i).tail(p).setZero();
    }
  }
  d.weights = (d.xaug.colwise().squaredNorm().transpose() / static_cast<double>(n)).cwiseSqrt();
  return d;
}

double objective(const ThresholdDesign& design, const Vector& y, const Vector& alpha, double lambda) {
  require(design.xaug.rows() == y.size(), "objective: y length does not match design rows");
  require(design.xaug.cols() == alpha.size(), "objective: alpha length does not match design columns");
  require(lambda >= 0.0, "objective: lambda must be non-negative");
  const Vector resid = y - design.xaug * alpha;
  return resid.squaredNorm() / static_cast<double>(y.size()) +
         lambda * design.weights.cwiseProduct(alpha.cwiseAbs()).sum();
}

Index min_regime_size(Index n) {
  return std::max<Index>(2, static_cast<Index>(std::ceil(0.05 * static_cast<double>(n))));
}

double empirical_quantile(const Vector& values, double prob) {
  require(values.size() > 0, "empirical_quantile: empty input");
  require(prob >= 0.0 && prob <= 1.0, "empirical_quantile: prob outside [0, 1]");
  std::vector<double> v(values.data(), values.data() + values.size());
  std::sort(v.begin(), v.end());
  const double h = (static_cast<double>(v.size()) - 1.0) * prob;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

RegimeGrid make_grid(const Sample& s, const GridSpec& spec) {
  validate_sample(s);
  std::vector<double> sorted_q(s.q.data(), s.q.data() + s.q.size());
  std::sort(sorted_q.begin(), sorted_q.end());

  std::vector<double> cand;
  double band_lo, band_hi;
  if (spec.mode == GridMode::FixedStep) {
    if (!(spec.lo < spec.hi) || !(spec.step > 0.0)) {
      throw InputError("make_grid: fixed-step grid needs lo < hi and step > 0");
    }
    band_lo = spec.lo;
    band_hi = spec.hi;
    const auto steps = static_cast<long>(std::floor((spec.hi - spec.lo) / spec.step + 1e-9));
    for (long k = 0; k <= steps; ++k) cand.push_back(spec.lo + static_cast<double>(k) * spec.step);
  } else {
    if (!(spec.lo > 0.0 && spec.lo < spec.hi && spec.hi < 1.0)) {
      throw InputError("make_grid: quantile band needs 0 < lo < hi < 1");
    }
    band_lo = empirical_quantile(s.q, spec.lo);
    band_hi = empirical_quantile(s.q, spec.hi);
    if (spec.mode == GridMode::QuantileCount) {
      if (spec.count < 1) throw InputError("make_grid: quantile count must be at least 1");
      if (spec.count == 1) {
        cand.push_back(empirical_quantile(s.q, 0.5 * (spec.lo + spec.hi)));
      } else {
        for (int k = 0; k < spec.count; ++k) {
          const double level = spec.lo + (spec.hi - spec.lo) * k / (spec.count - 1);
          cand.push_back(empirical_quantile(s.q, level));
        }
      }
    } else {
      for (double v : sorted_q) {
        if (v >= band_lo && v <= band_hi) cand.push_back(v);
      }
    }
  }

  std::size_t distinct_in_band = 0;
  double last = std::numeric_limits<double>::quiet_NaN();
  for (double v : sorted_q) {
    if (v >= band_lo && v <= band_hi && !(v == last)) {
      ++distinct_in_band;
      last = v;
    }
  }
  if (distinct_in_band < 2) {
    throw DegenerateGridError("make_grid: threshold band [" + std::to_string(band_lo) + ", " +
                              std::to_string(band_hi) + "] contains fewer than 2 distinct q values");
  }

  std::sort(cand.begin(), cand.end());
  cand.erase(std::unique(cand.begin(), cand.end()), cand.end());

  const Index n = s.n();
  const Index min_size = min_regime_size(n);
  RegimeGrid grid;
  grid.lo_quantile = spec.lo;
  grid.hi_quantile = spec.hi;
  for (double tau : cand) {
    const auto lower = static_cast<Index>(std::lower_bound(sorted_q.begin(), sorted_q.end(), tau) - sorted_q.begin());
    if (lower >= min_size && n - lower >= min_size) grid.candidates.push_back(tau);
  }
  if (grid.candidates.empty()) {
    throw DegenerateGridError("make_grid: no candidate leaves at least " + std::to_string(min_size) +
                              " observations in each regime");
  }
  return grid;
}

RegimeSweep::RegimeSweep(const Sample& sample)
    : sample_(&sample), n_(sample.n()), p_(sample.p()), tau_(-std::numeric_limits<double>::infinity()) {
  validate_sample(sample);
  order_.resize(static_cast<std::size_t>(n_));
  std::iota(order_.begin(), order_.end(), Index{0});
  std::stable_sort(order_.begin(), order_.end(), [&](Index a, Index b) { return sample.q(a) < sample.q(b); });

  full_sum_ = Matrix::Zero(p_, p_);
  full_xy_sum_ = Vector::Zero(p_);
  for (Index i : order_) add_row(i, full_sum_, full_xy_sum_);
  const double inv_n = 1.0 / static_cast<double>(n_);
  full_gram_ = full_sum_ * inv_n;
  full_xty_ = full_xy_sum_ * inv_n;
  yty_ = sample.y.squaredNorm() * inv_n;
  reset();
}

void RegimeSweep::add_row(Index i, Matrix& xx, Vector& xy) const {
  const auto row = sample_->x.row(i);
  xx.noalias() += row.transpose() * row;
  xy.noalias() += sample_->y(i) * row.transpose();
}

void RegimeSweep::reset() {
  lower_sum_ = Matrix::Zero(p_, p_);
  lower_xy_sum_ = Vector::Zero(p_);
  next_ = 0;
  tau_ = -std::numeric_limits<double>::infinity();
}

void RegimeSweep::advance_to(double tau) {
  require(!std::isnan(tau), "RegimeSweep: tau is NaN");
  if (tau < tau_) reset();
  while (next_ < order_.size() && sample_->q(order_[next_]) < tau) {
    add_row(order_[next_], lower_sum_, lower_xy_sum_);
    ++next_;
  }
  tau_ = tau;
}

Matrix RegimeSweep::lower_gram() const { return lower_sum_ / static_cast<double>(n_); }

Vector RegimeSweep::lower_xty() const { return lower_xy_sum_ / static_cast<double>(n_); }

Matrix RegimeSweep::upper_gram() const { return (full_sum_ - lower_sum_) / static_cast<double>(n_); }

Matrix assemble_sigma(const Matrix& full, const Matrix& lower) {
  const Index p = full.rows();
  Matrix sigma(2 * p, 2 * p);
  sigma.topLeftCorner(p, p) = full;
  sigma.topRightCorner(p, p) = lower;
  sigma.bottomLeftCorner(p, p) = lower;
  sigma.bottomRightCorner(p, p) = lower;
  return sigma;
}

Vector block_weights(const Matrix& full, const Matrix& lower) {
  const Index p = full.rows();
  Vector w(2 * p);
  w.head(p) = full.diagonal().cwiseMax(0.0).cwiseSqrt();
  w.tail(p) = lower.diagonal().cwiseMax(0.0).cwiseSqrt();
  return w;
}

ThresholdSystem threshold_system(const RegimeSweep& sweep, const std::vector<Index>& unpenalized) {
  const Index p = sweep.p();
  ThresholdSystem sys;
  sys.tau = sweep.tau();
  sys.full = sweep.full_gram();
  sys.lower = sweep.lower_gram();
  sys.xty.resize(2 * p);
  sys.xty.head(p) = sweep.full_xty();
  sys.xty.tail(p) = sweep.lower_xty();
  sys.yty = sweep.yty();
  sys.weights = block_weights(sys.full, sys.lower);
  for (Index j : unpenalized) {
    if (j < 0 || j >= 2 * p) throw InputError("unpenalized index " + std::to_string(j) + " outside [0, 2p)");
    sys.weights(j) = 0.0;
  }
  return sys;
}

GramPair gram(const Sample& sample, double tau) {
  if (!std::isfinite(tau)) throw InputError("gram: tau must be finite");
  RegimeSweep sweep(sample);
  sweep.advance_to(tau);
  GramPair g;
  g.m_hat = sweep.lower_gram();
  g.n_hat = sweep.upper_gram();
  g.sigma_hat = assemble_sigma(sweep.full_gram(), g.m_hat);
  return g;
}

}  // namespace threshlasso
