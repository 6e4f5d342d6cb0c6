#include <cmath>

#include "helpers.hpp"
#include "threshlasso/errors.hpp"
#include "threshlasso/lambda.hpp"

using namespace testing;

TEST_SUITE("lambda") {

TEST_CASE("plugin formula") {
  CHECK(th::plugin_lambda(1.0, 300, 400) == doctest::Approx(0.6755).epsilon(1e-4));
  CHECK(th::plugin_lambda(0.5, 300, 400) == th::plugin_lambda(1.0, 300, 400) / 2.0);
  CHECK(th::root_log_ratio(300, 400) == doctest::Approx(std::sqrt(std::log(300.0) / 400.0)));
  CHECK_THROWS_AS(th::plugin_lambda(1.0, 1, 400), th::InputError);
}

TEST_CASE("fixed rule passes through") {
  const auto s = threshold_sample(100, 10, 1);
  const auto grid = th::make_grid(s, th::GridSpec{});
  th::LambdaSpec spec;
  spec.rule = th::LambdaRule::Fixed;
  spec.value = 0.2;
  CHECK(th::select_lambda(s, grid, spec, {}).lambda == 0.2);
  spec.value = -1.0;
  CHECK_THROWS_AS(th::select_lambda(s, grid, spec, {}), th::InputError);
}

TEST_CASE("noise scale estimate lands near the truth") {
  const auto s = threshold_sample(400, 20, 2, 1.0, 0.5, 2, 0.5);
  const double sigma = th::estimate_noise_scale(s, 0.5, {});
  CHECK(sigma == doctest::Approx(0.5).epsilon(0.2));
  const auto grid = th::make_grid(s, th::GridSpec{});
  const auto choice = th::select_lambda(s, grid, th::LambdaSpec{}, {});
  CHECK(choice.lambda == doctest::Approx(th::plugin_lambda(choice.sigma_hat, 20, 400)));
  CHECK(!choice.fallback);
  CHECK(choice.tau_used == grid.candidates[grid.candidates.size() / 2]);
}

TEST_CASE("perfect fit falls back with a warning") {
  auto s = threshold_sample(60, 5, 3);
  s.y.setZero();
  const auto grid = th::make_grid(s, th::GridSpec{});
  const auto choice = th::select_lambda(s, grid, th::LambdaSpec{}, {});
  CHECK(choice.fallback);
  CHECK(!choice.warning.empty());
  CHECK(choice.lambda == doctest::Approx(th::root_log_ratio(5, 60)));
}

TEST_CASE("lambda_max zeroes every penalized coordinate") {
  const auto s = threshold_sample(80, 10, 4);
  th::RegimeSweep sw(s);
  sw.advance_to(0.5);
  const auto sys = th::threshold_system(sw);
  const double hi = th::lambda_max(sys);
  CHECK(th::fit_system(sys, hi * (1 + 1e-9)).active_count() == 0);
  CHECK(th::fit_system(sys, hi * 0.95).active_count() > 0);
}

TEST_CASE("path ladder and cross validation") {
  const auto path = th::lambda_path(2.0, 5, 1e-2);
  REQUIRE(path.size() == 5);
  CHECK(path.front() == 2.0);
  CHECK(path.back() == doctest::Approx(0.02));
  for (std::size_t k = 1; k < path.size(); ++k) CHECK(path[k] < path[k - 1]);
  CHECK_THROWS_AS(th::lambda_path(2.0, 5, 1.5), th::InputError);

  const auto s = threshold_sample(120, 10, 5);
  const auto grid = th::make_grid(s, th::GridSpec{});
  th::LambdaSpec spec;
  spec.rule = th::LambdaRule::CrossValidation;
  spec.path_count = 8;
  const auto choice = th::select_lambda(s, grid, spec, {});
  CHECK(choice.cv_error.size() == 8);
  bool in_path = false;
  for (double l : choice.path) in_path = in_path || l == choice.lambda;
  CHECK(in_path);
}

}
