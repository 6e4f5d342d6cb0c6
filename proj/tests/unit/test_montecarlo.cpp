#include <chrono>
#include <cmath>

#include "helpers.hpp"
#include "threshlasso/errors.hpp"
#include "threshlasso/montecarlo.hpp"

using namespace testing;

namespace {

double corr(const Vector& a, const Vector& b) {
  const Vector ca = a.array() - a.mean();
  const Vector cb = b.array() - b.mean();
  return ca.dot(cb) / std::sqrt(ca.squaredNorm() * cb.squaredNorm());
}

th::McConfig tiny() {
  th::McConfig cfg;
  cfg.name = "tiny";
  cfg.n = 60;
  cfg.two_p = 20;
  cfg.s0 = 3;
  cfg.n_reps = 3;
  cfg.seed = 11;
  return cfg;
}

// A record with p = 2 whose numbers are easy to aggregate by hand.
th::RepRecord hand_record(int rep) {
  th::RepRecord r;
  r.rep = rep;
  r.ok = true;
  r.tau_err = 0.02;
  r.lambda = 0.3;
  r.delta_ratio = 0.1;
  r.prediction_norm = 0.25;
  r.alpha0 = Vector::Zero(4);
  r.alpha0(0) = 1.0;
  r.alpha0(3) = 0.5;
  r.a_hat = Vector::Zero(4);
  r.ci_length = Vector::Constant(4, 0.4);
  r.ci_length(1) = 0.2;
  r.hit = {true, false, true, true};
  r.z = Vector::Zero(4);
  r.z(1) = 2.5;
  r.z(2) = -0.5;
  r.reject_bonferroni = {true, false, false, true};
  return r;
}

th::McConfig hand_config() {
  th::McConfig cfg;
  cfg.n = 50;
  cfg.two_p = 4;
  cfg.s0 = 1;
  cfg.b = 1.0;
  cfg.b1 = 0.5;
  return cfg;
}

}  // namespace

TEST_SUITE("montecarlo") {

TEST_CASE("independent threshold variable") {
  th::McConfig cfg = tiny();
  cfg.n = 4000;
  cfg.two_p = 6;
  cfg.s0 = 1;
  const th::McDraw d = th::gen_sample(cfg, 0);
  CHECK(std::abs(corr(d.sample.q, d.sample.x.col(1))) < 3.0 / std::sqrt(4000.0));
  CHECK(d.sample.q.minCoeff() > 0.0);
  CHECK(d.sample.q.maxCoeff() < 1.0);
  CHECK(d.sample.q.mean() == doctest::Approx(0.5).epsilon(0.03));
}

TEST_CASE("copula correlation of the threshold variable") {
  th::McConfig cfg = tiny();
  cfg.n = 20000;
  cfg.two_p = 6;
  cfg.s0 = 1;
  cfg.rho_qx = 0.5;
  const th::McDraw d = th::gen_sample(cfg, 0);
  Vector latent(cfg.n);
  // Invert the normal cdf by bisection so the check does not reuse library quantiles.
  for (Index i = 0; i < cfg.n; ++i) {
    double lo = -10.0, hi = 10.0;
    for (int it = 0; it < 80; ++it) {
      const double mid = 0.5 * (lo + hi);
      (0.5 * std::erfc(-mid / std::sqrt(2.0)) < d.sample.q(i) ? lo : hi) = mid;
    }
    latent(i) = 0.5 * (lo + hi);
  }
  CHECK(corr(latent, d.sample.x.col(1)) == doctest::Approx(0.5).epsilon(0.05));
  // Through the Toeplitz chain the latent normal sees x3 at 0.5 * 0.9.
  CHECK(corr(latent, d.sample.x.col(2)) == doctest::Approx(0.45).epsilon(0.07));
}

TEST_CASE("null construction has an exactly zero threshold effect") {
  th::McConfig cfg = tiny();
  cfg.b1 = 0.0;
  const th::McDraw d = th::gen_sample(cfg, 2);
  const Index p = cfg.p();
  CHECK(d.alpha0.tail(p).isZero(0.0));
  for (Index j = 0; j < p; ++j) CHECK(d.alpha0(j) == (j < cfg.s0 ? cfg.b : 0.0));
}

TEST_CASE("coefficient layout") {
  const th::McConfig cfg = tiny();
  const th::McDraw d = th::gen_sample(cfg, 0);
  const Index p = cfg.p();
  for (Index j = 0; j < p; ++j) {
    CHECK(d.alpha0(j) == (j < 3 ? 1.0 : 0.0));
    CHECK(d.alpha0(p + j) == (j >= 3 && j < 6 ? 0.5 : 0.0));
  }
}

TEST_CASE("Toeplitz correlations and noise variance") {
  th::McConfig cfg = tiny();
  cfg.n = 20000;
  cfg.two_p = 8;
  cfg.s0 = 1;
  cfg.b1 = 0.0;
  const th::McDraw d = th::gen_sample(cfg, 1);
  const Matrix& x = d.sample.x;
  CHECK(corr(x.col(0), x.col(1)) == doctest::Approx(0.9).epsilon(0.01));
  CHECK(corr(x.col(0), x.col(2)) == doctest::Approx(0.81).epsilon(0.015));
  CHECK(corr(x.col(1), x.col(3)) == doctest::Approx(0.81).epsilon(0.015));
  for (Index j = 0; j < 4; ++j) {
    const Vector c = x.col(j).array() - x.col(j).mean();
    CHECK(c.squaredNorm() / cfg.n == doctest::Approx(1.0).epsilon(0.04));
  }
  const Vector u = d.sample.y - x.col(0);
  const Vector cu = u.array() - u.mean();
  CHECK(cu.squaredNorm() / cfg.n == doctest::Approx(0.5).epsilon(0.04));
}

TEST_CASE("draws depend only on seed and replication index") {
  const th::McConfig cfg = tiny();
  const th::McDraw a = th::gen_sample(cfg, 4);
  const th::McDraw b = th::gen_sample(cfg, 4);
  CHECK(a.sample.x == b.sample.x);
  CHECK(a.sample.y == b.sample.y);
  CHECK(a.sample.q == b.sample.q);
  const th::McDraw c = th::gen_sample(cfg, 5);
  CHECK(a.sample.x != c.sample.x);
  th::McConfig other = cfg;
  other.seed = 12;
  CHECK(th::gen_sample(other, 4).sample.y != a.sample.y);
  CHECK(th::stream_seed(1, 0) != th::stream_seed(1, 1));
  CHECK(th::stream_seed(1, 0) != th::stream_seed(2, 0));
}

TEST_CASE("portable generator moments") {
  th::McRng rng(3);
  double s = 0.0, s2 = 0.0, u = 0.0;
  const int m = 200000;
  for (int i = 0; i < m; ++i) {
    const double z = rng.normal();
    s += z;
    s2 += z * z;
    u += rng.uniform();
  }
  CHECK(std::abs(s / m) < 0.01);
  CHECK(s2 / m == doctest::Approx(1.0).epsilon(0.01));
  CHECK(u / m == doctest::Approx(0.5).epsilon(0.005));
}

TEST_CASE("presets expand to the published tuples") {
  struct Row {
    const char* name;
    Index n, two_p, s0;
    double b, b1, rho, tau0;
  };
  const Row rows[] = {
      {"table1-row1", 400, 600, 15, 1.0, 0.5, 0.0, 0.5},   {"table1-row2", 400, 600, 15, 1.0, 0.0, 0.0, 0.5},
      {"table1-row3", 400, 600, 45, 1.0, 0.5, 0.0, 0.5},   {"table1-row4", 400, 600, 45, 1.0, 0.0, 0.0, 0.5},
      {"table1-row5", 400, 600, 15, 0.5, 0.25, 0.0, 0.5},  {"table1-row6", 400, 600, 15, 0.5, 0.0, 0.0, 0.5},
      {"table1-row7", 400, 600, 15, 1.0, 0.5, 0.5, 0.5},   {"table1-row8", 400, 600, 15, 1.0, 0.0, 0.5, 0.5},
      {"table1-row9", 400, 600, 15, 1.0, 0.5, 0.0, 0.4},   {"table1-row10", 400, 600, 15, 1.0, 0.0, 0.0, 0.4},
      {"table2-row1", 400, 600, 15, 0.5, 0.25, 0.0, 0.5},  {"table2-row2", 400, 600, 30, 0.5, 0.25, 0.0, 0.5},
      {"table2-row3", 400, 600, 15, 0.5, 0.1, 0.0, 0.5},   {"table2-row4", 1000, 1200, 15, 0.5, 0.25, 0.0, 0.5},
      {"table2-row5", 1000, 1200, 30, 0.5, 0.25, 0.0, 0.5}, {"table2-row6", 1000, 1200, 15, 0.5, 0.1, 0.0, 0.5},
  };
  for (const Row& r : rows) {
    CAPTURE(r.name);
    const th::McConfig c = th::preset(r.name);
    CHECK(c.n == r.n);
    CHECK(c.two_p == r.two_p);
    CHECK(c.s0 == r.s0);
    CHECK(c.b == r.b);
    CHECK(c.b1 == r.b1);
    CHECK(c.rho_qx == r.rho);
    CHECK(c.tau0 == r.tau0);
    CHECK(c.n_reps == 20);
    CHECK(c.noise_var == 0.5);
    CHECK(c.toeplitz == 0.9);
  }
  const th::McConfig smoke = th::preset("smoke");
  CHECK(smoke.n == 200);
  CHECK(smoke.two_p == 200);
  CHECK(smoke.s0 == 8);
  CHECK(smoke.n_reps == 10);
  CHECK(th::preset_names().size() == 17);
  CHECK_THROWS_AS(th::preset("table3-row1"), th::InputError);
}

TEST_CASE("config validation") {
  th::McConfig c = tiny();
  c.s0 = 11;
  CHECK_THROWS_AS(th::validate_mc_config(c), th::InputError);
  c = tiny();
  c.tau0 = 1.0;
  CHECK_THROWS_AS(th::validate_mc_config(c), th::InputError);
  c = tiny();
  c.n_reps = 0;
  CHECK_THROWS_AS(th::validate_mc_config(c), th::InputError);
  c = tiny();
  c.two_p = 21;
  CHECK_THROWS_AS(th::validate_mc_config(c), th::InputError);
  c = tiny();
  c.s0 = 6;  // 2 s0 > p with a threshold effect
  CHECK_THROWS_AS(th::validate_mc_config(c), th::InputError);
  c.b1 = 0.0;
  CHECK_NOTHROW(th::validate_mc_config(c));
}

TEST_CASE("aggregate: every interval hits") {
  th::RepRecord r = hand_record(0);
  r.hit = {true, true, true, true};
  const th::McReport rep = th::aggregate(hand_config(), {r});
  CHECK(rep.cov == 1.0);
  CHECK(rep.cov_s == 1.0);
  CHECK(rep.cov_sc == 1.0);
}

TEST_CASE("aggregate: a single record is reported as is") {
  const th::McReport rep = th::aggregate(hand_config(), {hand_record(0)});
  CHECK(rep.n_success == 1);
  CHECK(rep.has_tau_error);
  CHECK(rep.mean_abs_tau_err == doctest::Approx(0.02));
  CHECK(rep.mean_lambda == doctest::Approx(0.3));
  // beta block only: coordinate 0 active, coordinate 1 inactive.
  CHECK(rep.ell == doctest::Approx(0.3));
  CHECK(rep.ell_s == doctest::Approx(0.4));
  CHECK(rep.ell_sc == doctest::Approx(0.2));
  CHECK(rep.cov == doctest::Approx(0.5));
  CHECK(rep.cov_s == 1.0);
  CHECK(rep.cov_sc == 0.0);
  CHECK(rep.fwer == 0.0);
  CHECK(rep.power == 1.0);
  CHECK(rep.power_all == 1.0);
  REQUIRE(rep.z_pool.size() == 2);
  CHECK(rep.z_pool[0] == 2.5);
  CHECK(rep.z_pool[1] == -0.5);
  REQUIRE(rep.prediction_norm.size() == 1);
  CHECK(rep.prediction_norm[0] == 0.25);
}

TEST_CASE("aggregate: false rejections, failures and ordering") {
  th::RepRecord a = hand_record(1);
  a.reject_bonferroni = {false, true, false, false};
  th::RepRecord failed;
  failed.rep = 2;
  failed.ok = false;
  failed.error = "solver failure";
  const th::McReport rep = th::aggregate(hand_config(), {failed, a, hand_record(0)});
  CHECK(rep.n_success == 2);
  CHECK(rep.n_failed == 1);
  CHECK(rep.fwer == doctest::Approx(0.5));
  CHECK(rep.power == doctest::Approx(0.5));
  CHECK(rep.power_all == doctest::Approx(0.5));
  REQUIRE(rep.records.size() == 3);
  CHECK(rep.records[0].rep == 0);
  CHECK(rep.records[2].rep == 2);
}

TEST_CASE("aggregate: null configuration omits the threshold error") {
  th::McConfig cfg = hand_config();
  cfg.b1 = 0.0;
  CHECK_FALSE(th::aggregate(cfg, {hand_record(0)}).has_tau_error);
}

TEST_CASE("aggregate: zero successes is an error") {
  th::RepRecord failed;
  failed.ok = false;
  CHECK_THROWS_AS(th::aggregate(hand_config(), {failed}), th::EstimationError);
  CHECK_THROWS_AS(th::aggregate(hand_config(), {}), th::EstimationError);
}

TEST_CASE("tiny configuration runs end to end within five seconds") {
  const auto start = std::chrono::steady_clock::now();
  const th::McReport rep = th::run_monte_carlo(tiny());
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  CHECK(secs < 5.0);
  CHECK(rep.n_success == 3);
  CHECK(rep.cov >= 0.0);
  CHECK(rep.cov <= 1.0);
  CHECK(rep.ell >= 0.0);
  CHECK(rep.z_pool.size() == 3 * (20 - 6));
  CHECK(rep.prediction_norm.size() == 3);
  for (const auto& r : rep.records) {
    CHECK(r.ok);
    CHECK(r.tau_hat >= 0.15 - 1e-12);
    CHECK(r.tau_hat <= 0.85 + 1e-12);
    CHECK(r.bound_rows == 20);
    CHECK(r.bound_violations == 0);
    CHECK(r.fits == static_cast<int>(r.grid.size()) + 20);
  }
}

TEST_CASE("reports do not depend on the thread count") {
  th::McConfig cfg = tiny();
  cfg.n_reps = 4;
  cfg.threads = 1;
  const th::McReport a = th::run_monte_carlo(cfg);
  cfg.threads = 3;
  const th::McReport b = th::run_monte_carlo(cfg);
  CHECK(a.cov == b.cov);
  CHECK(a.ell == b.ell);
  CHECK(a.mean_abs_tau_err == b.mean_abs_tau_err);
  CHECK(a.z_pool == b.z_pool);
  CHECK(a.ks_statistic == b.ks_statistic);
  for (std::size_t k = 0; k < a.records.size(); ++k) {
    CHECK(a.records[k].a_hat == b.records[k].a_hat);
    CHECK(a.records[k].tau_hat == b.records[k].tau_hat);
  }
}

TEST_CASE("kept profiles cover the grid") {
  th::McConfig cfg = tiny();
  cfg.n_reps = 1;
  cfg.keep_profiles = true;
  const th::McReport rep = th::run_monte_carlo(cfg);
  const auto& r = rep.records[0];
  REQUIRE(r.profile.size() == static_cast<Index>(r.grid.size()));
  Index best = 0;
  r.profile.minCoeff(&best);
  CHECK(r.grid[static_cast<std::size_t>(best)] <= r.tau_hat + 1e-12);
}

TEST_CASE("null rows: inactive coverage at the nominal 95% level") {
  // Coverage sanity on a configuration with no threshold effect over 20 reps.
  th::McConfig cfg = th::preset("table1-row2");
  cfg.seed = 3;
  const th::McReport rep = th::run_monte_carlo(cfg);
  MESSAGE("cov_Sc = " << rep.cov_sc << ", cov = " << rep.cov << ", cov_S = " << rep.cov_s);
  CHECK_FALSE(rep.has_tau_error);
  CHECK(rep.n_success == 20);
  CHECK(rep.cov_sc >= 0.97);
}

TEST_CASE("remainder term shrinks along a doubling ladder") {
  // n = 200, 400, 800 with 2p = 3n/2; Delta uses the known truth.
  const int reps = 4;
  std::vector<double> mean, se;
  for (Index n : {Index{200}, Index{400}, Index{800}}) {
    th::McConfig cfg = th::preset("table1-row1");
    cfg.n = n;
    cfg.two_p = 3 * n / 2;
    cfg.n_reps = reps;
    cfg.seed = 5;
    const th::McReport rep = th::run_monte_carlo(cfg);
    REQUIRE(rep.n_success == reps);
    double m = 0.0, m2 = 0.0;
    for (const auto& r : rep.records) {
      m += r.delta_ratio;
      m2 += r.delta_ratio * r.delta_ratio;
    }
    m /= reps;
    const double sd = std::sqrt(std::max(0.0, m2 / reps - m * m) * reps / (reps - 1));
    mean.push_back(m);
    se.push_back(sd / std::sqrt(static_cast<double>(reps)));
  }
  MESSAGE("delta ratio ladder: " << mean[0] << " " << mean[1] << " " << mean[2]);
  CHECK(mean[1] <= mean[0] + 2.0 * std::hypot(se[0], se[1]));
  CHECK(mean[2] <= mean[1] + 2.0 * std::hypot(se[1], se[2]));
  CHECK(mean[2] < mean[0]);
}

}  // TEST_SUITE
