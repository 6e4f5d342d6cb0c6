#include <Eigen/Eigenvalues>

#include <cmath>

#include "helpers.hpp"
#include "threshlasso/design.hpp"
#include "threshlasso/errors.hpp"

using namespace testing;

TEST_SUITE("design") {

TEST_CASE("build_design three-observation example") {
  Vector y(3), q(3);
  Matrix x(3, 1);
  x << 2, 3, 5;
  q << 0.1, 0.5, 0.9;
  y << 1, 2, 3;
  const auto s = th::make_sample(y, x, q);
  const auto d = th::build_design(s, 0.6);
  CHECK(d.xaug(0, 1) == 2.0);
  CHECK(d.xaug(1, 1) == 3.0);
  CHECK(d.xaug(2, 1) == 0.0);
  CHECK(d.weights(0) == doctest::Approx(std::sqrt(38.0 / 3.0)));
  CHECK(d.weights(1) == doctest::Approx(std::sqrt(13.0 / 3.0)));
}

TEST_CASE("indicator is strict and edge regimes behave") {
  std::mt19937_64 g(1);
  const auto s = th::make_sample(randn(20, g), randn(20, 3, g), runif(20, g));
  const auto below = th::build_design(s, s.q.minCoeff());  // q < min(q) never holds
  CHECK(below.xaug.rightCols(3).isZero(0.0));
  CHECK(below.weights.tail(3).isZero(0.0));
  const auto above = th::build_design(s, s.q.maxCoeff() + 1.0);
  CHECK(above.xaug.rightCols(3) == s.x);
  CHECK(above.weights.tail(3) == above.weights.head(3));
  // first block weights do not depend on tau
  CHECK(th::build_design(s, 0.3).weights.head(3) == th::build_design(s, 0.7).weights.head(3));
}

TEST_CASE("make_sample rejects bad input") {
  Vector y(3), q(3);
  Matrix x(3, 1);
  y << 1, 2, 3;
  q << 1, 2, 3;
  x << 1, 2, 3;
  CHECK_THROWS_AS(th::make_sample(y, x, Vector::Ones(2)), th::InputError);
  x(1, 0) = std::nan("");
  CHECK_THROWS_AS(th::make_sample(y, x, q), th::InputError);
  CHECK_THROWS_AS(th::make_sample(Vector::Ones(1), Matrix::Ones(1, 1), Vector::Ones(1)), th::InputError);
}

TEST_CASE("objective examples") {
  std::mt19937_64 g(2);
  const auto s = th::make_sample(randn(10, g), randn(10, 2, g), runif(10, g));
  const auto d = th::build_design(s, 0.5);
  CHECK(th::objective(d, s.y, Vector::Zero(4), 3.0) == doctest::Approx(s.y.squaredNorm() / 10.0));

  th::ThresholdDesign small;
  small.xaug = Matrix::Identity(2, 2) * std::sqrt(2.0);
  small.weights = Vector::Ones(2);
  Vector y(2);
  y << std::sqrt(2.0), 0.0;
  Vector a(2);
  a << 1.0, 0.0;
  CHECK(th::objective(small, y, a, 1.0) == doctest::Approx(1.0));

  // perfect interpolation on a square invertible system
  Matrix sq = randn(4, 4, g);
  th::ThresholdDesign dd;
  dd.xaug = sq;
  dd.weights = Vector::Ones(4);
  const Vector truth = randn(4, g);
  CHECK(std::abs(th::objective(dd, sq * truth, truth, 0.0)) < 1e-24 + 1e-12);
}

TEST_CASE("gram examples") {
  Vector y(2), q(2);
  Matrix x(2, 1);
  x << 1, 1;
  q << 0.2, 0.8;
  y << 0, 0;
  const auto g = th::gram(th::make_sample(y, x, q), 0.5);
  CHECK(g.m_hat(0, 0) == 0.5);
  CHECK(g.n_hat(0, 0) == 0.5);
  CHECK(th::gram(th::make_sample(y, x, q), 0.1).m_hat.isZero(0.0));
}

TEST_CASE("gram matches dense multiplication and invariants hold") {
  std::mt19937_64 g(7);
  const auto s = th::make_sample(randn(50, g), randn(50, 3, g), runif(50, g));
  const Matrix xtx = s.x.transpose() * s.x / 50.0;
  Matrix prev = Matrix::Zero(3, 3);
  for (double tau : {0.1, 0.3, 0.5, 0.77, 0.95}) {
    const auto gp = th::gram(s, tau);
    const auto d = th::build_design(s, tau);
    const Matrix dense = d.xaug.transpose() * d.xaug / 50.0;
    CHECK(max_abs(gp.sigma_hat - dense) < 1e-12);
    CHECK(max_abs(gp.m_hat + gp.n_hat - xtx) < 1e-12);
    CHECK(max_abs(gp.sigma_hat - gp.sigma_hat.transpose()) == 0.0);
    for (Index j = 0; j < 6; ++j) CHECK(std::abs(d.weights(j) * d.weights(j) - gp.sigma_hat(j, j)) < 1e-12);
    Eigen::SelfAdjointEigenSolver<Matrix> es(gp.m_hat - prev);
    CHECK(es.eigenvalues().minCoeff() > -1e-12);  // monotone in tau
    Eigen::SelfAdjointEigenSolver<Matrix> es2(gp.sigma_hat);
    CHECK(es2.eigenvalues().minCoeff() > -1e-12);
    prev = gp.m_hat;
  }
}

TEST_CASE("sweep routes agree bitwise") {
  std::mt19937_64 g(8);
  const auto s = th::make_sample(randn(60, g), randn(60, 4, g), runif(60, g));
  th::RegimeSweep a(s), b(s);
  a.advance_to(0.2);
  a.advance_to(0.4);
  a.advance_to(0.6);
  b.advance_to(0.9);
  b.advance_to(0.6);  // backwards move resets
  CHECK(a.lower_gram() == b.lower_gram());
  CHECK(a.lower_xty() == b.lower_xty());
  CHECK(a.lower_count() == b.lower_count());
  const auto gp = th::gram(s, 0.6);
  CHECK(max_abs(a.lower_gram() - gp.m_hat) < 1e-12);
  CHECK(max_abs(a.upper_gram() - gp.n_hat) < 1e-12);
  const auto sys = th::threshold_system(a, {1, 5});
  CHECK(sys.weights(1) == 0.0);
  CHECK(sys.weights(5) == 0.0);
  CHECK(sys.weights(0) > 0.0);
  CHECK_THROWS_AS(th::threshold_system(a, {8}), th::InputError);
}

TEST_CASE("fixed-step grid from 0.15 to 0.85") {
  std::mt19937_64 g(9);
  const auto s = th::make_sample(randn(400, g), randn(400, 2, g), runif(400, g));
  th::GridSpec spec{0.15, 0.85, th::GridMode::FixedStep, 71, 0.01};
  const auto grid = th::make_grid(s, spec);
  REQUIRE(grid.candidates.size() == 71);
  for (std::size_t k = 0; k < 71; ++k) CHECK(grid.candidates[k] == doctest::Approx(0.15 + 0.01 * k).epsilon(1e-12));
}

TEST_CASE("observed-values grid is trimmed to the quantile band") {
  Vector q(4);
  q << 0.2, 0.4, 0.6, 0.8;
  Matrix x(4, 1);
  x << 1, 2, 3, 4;
  const auto s = th::make_sample(Vector::Zero(4), x, q);
  th::GridSpec spec{0.25, 0.75, th::GridMode::ObservedValues, 0, 0.01};
  const auto grid = th::make_grid(s, spec);
  REQUIRE(!grid.candidates.empty());
  for (double c : grid.candidates) CHECK((c == 0.4 || c == 0.6));
}

TEST_CASE("quantile-count grid has exactly k points") {
  std::mt19937_64 g(10);
  const auto s = th::make_sample(randn(5000, g), randn(5000, 1, g), runif(5000, g));
  th::GridSpec spec{0.15, 0.85, th::GridMode::QuantileCount, 100, 0.01};
  const auto grid = th::make_grid(s, spec);
  CHECK(grid.candidates.size() == 100);
  for (std::size_t k = 1; k < grid.candidates.size(); ++k) CHECK(grid.candidates[k] > grid.candidates[k - 1]);
}

TEST_CASE("grid safety and degenerate bands") {
  std::mt19937_64 g(12);
  for (Index n : {10, 23, 80}) {
    const auto s = th::make_sample(randn(n, g), randn(n, 1, g), runif(n, g));
    const auto grid = th::make_grid(s, th::GridSpec{0.05, 0.95, th::GridMode::ObservedValues, 0, 0.01});
    for (double c : grid.candidates) {
      const Index lower = (s.q.array() < c).count();
      CHECK(lower >= th::min_regime_size(n));
      CHECK(n - lower >= th::min_regime_size(n));
      CHECK(lower >= 2);
    }
  }
  const auto flat = th::make_sample(randn(20, g), randn(20, 1, g), Vector::Constant(20, 0.5));
  CHECK_THROWS_AS(th::make_grid(flat, th::GridSpec{}), th::DegenerateGridError);
  CHECK_THROWS_AS(th::make_grid(flat, th::GridSpec{0.9, 0.1}), th::InputError);
}

TEST_CASE("type-7 quantile") {
  Vector v(5);
  v << 5, 1, 4, 2, 3;
  CHECK(th::empirical_quantile(v, 0.0) == 1.0);
  CHECK(th::empirical_quantile(v, 1.0) == 5.0);
  CHECK(th::empirical_quantile(v, 0.5) == 3.0);
  CHECK(th::empirical_quantile(v, 0.3) == doctest::Approx(2.2));
}

}
