#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "helpers.hpp"
#include "threshlasso/stats.hpp"

namespace st = threshlasso::stats;
using namespace testing;

TEST_SUITE("stats") {

TEST_CASE("normal quantile agrees with Boost across the unit interval") {
  boost::math::normal_distribution<double> nd;
  for (double p : {1e-300, 1e-100, 1e-12, 1e-6, 0.001, 0.025, 0.1, 0.3, 0.5, 0.7, 0.9, 0.975, 0.999, 1 - 1e-9}) {
    CAPTURE(p);
    const double ref = boost::math::quantile(nd, p);
    CHECK(std::abs(st::normal_quantile(p) - ref) < 1e-9 * std::max(1.0, std::abs(ref)));
  }
}

TEST_CASE("cdf and pdf agree with Boost") {
  boost::math::normal_distribution<double> nd;
  for (double x = -8.0; x <= 8.0; x += 0.37) {
    CHECK(std::abs(st::normal_cdf(x) - boost::math::cdf(nd, x)) < 1e-14);
    CHECK(std::abs(st::normal_pdf(x) - boost::math::pdf(nd, x)) < 1e-14);
  }
}

TEST_CASE("critical values") {
  CHECK(st::normal_critical(0.05) == doctest::Approx(1.959963984540054).epsilon(1e-12));
  // two-sided Bonferroni threshold over 600 coordinates: z_{1 - 0.05/1200} = 3.93461
  CHECK(st::normal_critical(0.05 / 600.0) == doctest::Approx(3.934605861560).epsilon(1e-10));
  boost::math::normal_distribution<double> nd;
  CHECK(std::abs(st::normal_critical(0.05 / 1200.0) - boost::math::quantile(nd, 1 - 0.05 / 2400.0)) < 1e-9);
}

TEST_CASE("incomplete gamma and chi-square tail agree with Boost") {
  for (double a : {0.5, 1.0, 2.5, 10.0, 50.0}) {
    for (double x : {0.01, 0.5, 1.0, 3.0, 10.0, 60.0}) {
      CAPTURE(a);
      CAPTURE(x);
      CHECK(std::abs(st::gamma_p(a, x) - boost::math::gamma_p(a, x)) < 1e-12);
      CHECK(std::abs(st::gamma_q(a, x) - boost::math::gamma_q(a, x)) < 1e-12);
    }
  }
  for (double k : {1.0, 2.0, 3.0, 7.0, 30.0}) {
    boost::math::chi_squared_distribution<double> cd(k);
    for (double x : {0.0, 0.1, 1.0, 3.84, 12.0, 80.0}) {
      CHECK(std::abs(st::chi2_sf(x, k) - boost::math::cdf(boost::math::complement(cd, x))) < 1e-12);
    }
  }
}

TEST_CASE("chi-square with one degree of freedom is a squared normal") {
  for (double z : {0.3, 1.0, 1.96, 3.0}) {
    CHECK(st::chi2_sf(z * z, 1.0) == doctest::Approx(2.0 * st::normal_cdf(-z)).epsilon(1e-12));
  }
}

TEST_CASE("KS statistic by brute force") {
  std::mt19937_64 g(3);
  const Vector v = testing::randn(200, g);
  std::vector<double> s(v.data(), v.data() + v.size());
  std::vector<double> sorted = s;
  std::sort(sorted.begin(), sorted.end());
  double d = 0.0;
  const double n = static_cast<double>(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = 0.5 * std::erfc(-sorted[i] / std::sqrt(2.0));
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  CHECK(st::ks_statistic_normal(s) == doctest::Approx(d).epsilon(1e-13));
  // Kolmogorov tail with the Stephens correction, summed independently
  const double t = d * (std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n));
  double tail = 0.0;
  for (int k = 1; k < 200; ++k) tail += 2.0 * ((k % 2) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * t * t);
  CHECK(st::ks_pvalue(d, sorted.size()) == doctest::Approx(std::clamp(tail, 0.0, 1.0)).epsilon(1e-9));
}

TEST_CASE("KS rejects a shifted sample and accepts a normal one") {
  std::mt19937_64 g(11);
  const Vector v = testing::randn(3000, g);
  std::vector<double> s(v.data(), v.data() + v.size());
  CHECK(st::ks_pvalue(st::ks_statistic_normal(s), s.size()) > 0.01);
  for (double& x : s) x += 0.3;
  CHECK(st::ks_pvalue(st::ks_statistic_normal(s), s.size()) < 1e-6);
}

TEST_CASE("QQ fit recovers scale and location") {
  std::mt19937_64 g(5);
  const Vector v = testing::randn(5000, g);
  std::vector<double> s(v.size());
  for (Index i = 0; i < v.size(); ++i) s[static_cast<std::size_t>(i)] = 2.0 * v(i) + 1.0;
  const auto fit = st::qq_normal_fit(s);
  CHECK(fit.slope == doctest::Approx(2.0).epsilon(0.05));
  CHECK(fit.intercept == doctest::Approx(1.0).epsilon(0.05));
  // exact quantiles give an exact line
  std::vector<double> exact(101);
  for (std::size_t i = 0; i < exact.size(); ++i) exact[i] = 3.0 * st::normal_quantile((i + 0.5) / 101.0) - 0.5;
  const auto ex = st::qq_normal_fit(exact);
  CHECK(ex.slope == doctest::Approx(3.0).epsilon(1e-10));
  CHECK(ex.intercept == doctest::Approx(-0.5).epsilon(1e-10));
}

}
