#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

namespace threshlasso {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Raw estimation input: response y, covariates x (n x p), threshold variable q.
struct Sample {
  Vector y;
  Matrix x;
  Vector q;
  bool time_ordered = false;

  Index n() const { return y.size(); }
  Index p() const { return x.cols(); }
};

/// Validates shapes and finiteness; throws InputError.
Sample make_sample(Vector y, Matrix x, Vector q, bool time_ordered = false);
void validate_sample(const Sample& sample);

/// Augmented regressors X(tau) = [X, X * 1{q < tau}] and the diagonal of D(tau).
struct ThresholdDesign {
  double tau = 0.0;
  Matrix xaug;     // n x 2p
  Vector weights;  // root-mean-square column norms, length 2p
};

ThresholdDesign build_design(const Sample& sample, double tau);

/// Penalized least-squares criterion ||y - X(tau) alpha||_n^2 + lambda sum_j w_j |alpha_j|.
double objective(const ThresholdDesign& design, const Vector& y, const Vector& alpha, double lambda);

enum class GridMode { QuantileCount, ObservedValues, FixedStep };

struct GridSpec {
  double lo = 0.15;
  double hi = 0.85;
  GridMode mode = GridMode::QuantileCount;
  int count = 71;      // QuantileCount
  double step = 0.01;  // FixedStep
};

/// Candidate thresholds for the profiled search.
struct RegimeGrid {
  std::vector<double> candidates;  // strictly increasing
  double lo_quantile = 0.15;
  double hi_quantile = 0.85;
};

/// Smallest regime size tolerated at any grid candidate: max(2, ceil(0.05 n)).
Index min_regime_size(Index n);

/// Type-7 (linear interpolation) empirical quantile.
double empirical_quantile(const Vector& values, double prob);

/// Builds the grid. QuantileCount and ObservedValues interpret lo/hi as
/// quantile levels of q; FixedStep walks lo, lo + step, ..., hi as threshold
/// values. Candidates that leave fewer than min_regime_size observations in
/// either regime are dropped.
RegimeGrid make_grid(const Sample& sample, const GridSpec& spec);

/// M(tau) = (1/n) sum x x' 1{q < tau}, N(tau) = (1/n) sum x x' 1{q >= tau} and
/// the 2p x 2p Gram of X(tau).
struct GramPair {
  Matrix m_hat;
  Matrix n_hat;
  Matrix sigma_hat;
};

GramPair gram(const Sample& sample, double tau);

/// Accumulates regime cross-products in ascending-q order. Advancing tau adds
/// the rows that move into the lower regime, so a monotone sweep over a grid
/// costs one rank-one update per observation overall. Any two routes to the
/// same tau produce bitwise identical sums.
class RegimeSweep {
 public:
  explicit RegimeSweep(const Sample& sample);

  void advance_to(double tau);
  void reset();

  double tau() const { return tau_; }
  Index n() const { return n_; }
  Index p() const { return p_; }
  Index lower_count() const { return static_cast<Index>(next_); }

  /// (1/n) X'X and (1/n) X'y over all observations.
  const Matrix& full_gram() const { return full_gram_; }
  const Vector& full_xty() const { return full_xty_; }
  double yty() const { return yty_; }

  /// (1/n) sums restricted to q < tau.
  Matrix lower_gram() const;
  Vector lower_xty() const;
  /// (1/n) sums restricted to q >= tau.
  Matrix upper_gram() const;

 private:
  void add_row(Index i, Matrix& xx, Vector& xy) const;

  const Sample* sample_;
  Index n_;
  Index p_;
  std::vector<Index> order_;
  Matrix full_sum_;
  Vector full_xy_sum_;
  Matrix full_gram_;
  Vector full_xty_;
  double yty_ = 0.0;
  Matrix lower_sum_;
  Vector lower_xy_sum_;
  std::size_t next_ = 0;
  double tau_;
};

/// The 2p x 2p block Gram [[M + N, M], [M, M]] from the full and lower-regime parts.
Matrix assemble_sigma(const Matrix& full, const Matrix& lower);

/// Design weights sqrt(diag) of the block Gram: first p from full, last p from lower.
Vector block_weights(const Matrix& full, const Matrix& lower);

/// Everything a fixed-tau fit needs, in Gram form.
struct ThresholdSystem {
  double tau = 0.0;
  Matrix full;   // X'X / n
  Matrix lower;  // M(tau)
  Vector xty;    // X(tau)'y / n, length 2p
  double yty = 0.0;
  Vector weights;  // length 2p, zeroed on unpenalized coordinates
};

/// Snapshot of the sweep at its current tau. `unpenalized` lists coordinates in
/// [0, 2p) whose weight is forced to zero.
ThresholdSystem threshold_system(const RegimeSweep& sweep, const std::vector<Index>& unpenalized = {});

}  // namespace threshlasso
