#include <catch2/catch.hpp>

#include <cmath>
#include <vector>

#include "polling/engine.hpp"
#include "polling/estimators.hpp"
#include "polling/stochastic.hpp"

using namespace polling;

namespace {

SystemConfig vacation_config(double horizon_time) {
  SystemConfig cfg;
  cfg.mu = 1.0;
  cfg.rho1 = 0.5;
  cfg.rho2 = 0.0;
  cfg.service = DistributionSpec::exponential(1.0);
  cfg.switchover = {DistributionSpec::deterministic(0.5), DistributionSpec::deterministic(0.5)};
  cfg.seed = 777;
  cfg.horizon = Horizon::for_time(horizon_time);
  return cfg;
}

}  // namespace

TEST_CASE("batch means: constant series has zero-width interval") {
  std::vector<double> series(1000, 3.25);
  const auto est = batch_means_estimate(series, 20);
  REQUIRE(est.ok);
  CHECK(est.value == Approx(3.25));
  CHECK(est.ci_halfwidth == 0.0);
  CHECK(est.count == 20);
}

TEST_CASE("batch means: series shorter than the batch count fails loudly") {
  std::vector<double> series(9, 1.0);
  const auto est = batch_means_estimate(series, 10);
  CHECK_FALSE(est.ok);
  CHECK(est.message.find("shorter") != std::string::npos);
}

TEST_CASE("batch means: interval covers the mean of an i.i.d. series about 95% of the time") {
  const int trials = 400, n = 800, batches = 20;
  const double true_mean = 2.0;
  int covered = 0;
  for (int t = 0; t < trials; ++t) {
    RngStream rng(4242, t);
    std::vector<double> series(n);
    const auto spec = DistributionSpec::exponential(true_mean);
    for (auto& x : series) x = sample(spec, rng);
    const auto est = batch_means_estimate(series, batches);
    REQUIRE(est.ok);
    if (std::abs(est.value - true_mean) <= est.ci_halfwidth) ++covered;
  }
  const double coverage = double(covered) / trials;
  CAPTURE(coverage);
  CHECK(coverage > 0.90);
  CHECK(coverage < 0.99);
}

TEST_CASE("student t quantile is monotone toward 1.96") {
  CHECK(student_t_975(1) == Approx(12.706));
  CHECK(student_t_975(9) == Approx(2.262));
  CHECK(student_t_975(19) == Approx(2.093));
  CHECK(student_t_975(1'000'000) == Approx(1.960));
  for (long df : {2L, 5L, 10L, 31L, 45L, 100L, 5000L})
    CHECK(student_t_975(df) >= student_t_975(df + 10));
}

TEST_CASE("palm series drops the burn-in prefix") {
  auto cfg = vacation_config(2000.0);
  const auto out = run(cfg);
  REQUIRE(out.cycles > 50);
  const auto full = palm_series(out, 0);
  const auto tail = palm_series(out, 50);
  CHECK(tail.size() == full.size() - 50);
  CHECK(tail.front().theta1 == full[50].theta1);
  CHECK_THROWS_AS(palm_series(out, out.cycles), std::invalid_argument);

  // lambda2 = 0: Q2 is always empty at visit epochs
  for (const auto& pt : full) CHECK(pt.theta2 == 0.0);
}

TEST_CASE("regenerative estimate: zero-arrival run gives 0 with zero variance") {
  SystemConfig cfg = vacation_config(0.0);
  cfg.rho1 = 0.0;
  cfg.horizon = Horizon::for_cycles(100);
  const auto out = run(cfg);
  const auto est = regenerative_estimate(out, {0, 0});
  for (int q = 0; q < 2; ++q) {
    REQUIRE(est[q].ok);
    CHECK(est[q].value == 0.0);
    CHECK(est[q].ci_halfwidth == 0.0);
  }
}

TEST_CASE("regenerative estimate matches the vacation-model mean") {
  const auto out = run(vacation_config(3e5));
  const auto est = regenerative_estimate(out, {0, 0});
  REQUIRE(est[0].ok);
  CHECK(est[0].count >= kMinRegenCycles);
  CHECK(std::abs(est[0].value - 1.25) <= est[0].ci_halfwidth);
}

TEST_CASE("regenerative estimate refuses a rarely-hit reference") {
  const auto out = run(vacation_config(300.0));
  const auto est = regenerative_estimate(out, {25, 0});
  CHECK_FALSE(est[0].ok);
  CHECK_FALSE(est[0].message.empty());
}

TEST_CASE("batch means over windows agrees with the regenerative estimate") {
  const auto out = run(vacation_config(3e5));
  REQUIRE_FALSE(out.window_area.empty());
  std::vector<double> window_avg(out.window_area.size());
  for (std::size_t w = 0; w < window_avg.size(); ++w)
    window_avg[w] = out.window_area[w][0] / out.window_len;
  const auto batch = batch_means_estimate(window_avg, 32);
  const auto regen = regenerative_estimate(out, {0, 0});
  REQUIRE(batch.ok);
  REQUIRE(regen[0].ok);
  CHECK(std::abs(batch.value - regen[0].value) <= batch.ci_halfwidth + regen[0].ci_halfwidth);
  // both reconstruct the overall time average
  CHECK(batch.value == Approx(out.time_avg_n[0]).epsilon(1e-6));
}

TEST_CASE("cycle-batch time average agrees with the overall time average") {
  auto cfg = vacation_config(0.0);
  cfg.rho2 = 0.2;
  cfg.horizon = Horizon::for_cycles(20000);
  const auto out = run(cfg);
  const auto est = time_average_estimate(out, /*burn_in=*/1000);
  for (int q = 0; q < 2; ++q) {
    REQUIRE(est[q].ok);
    CHECK(std::abs(est[q].value - out.time_avg_n[q]) <= est[q].ci_halfwidth + 0.05);
  }

  const auto too_few = time_average_estimate(out, out.cycles - 5);
  CHECK_FALSE(too_few[0].ok);
}

TEST_CASE("validate_against flags a wrong prediction") {
  auto cfg = vacation_config(0.0);
  cfg.mu = 20.0;
  cfg.rho1 = 0.3;
  cfg.rho2 = 0.3;
  cfg.service = DistributionSpec::exponential(1.0 / 20.0);
  cfg.switchover = {DistributionSpec::deterministic(1.0), DistributionSpec::deterministic(1.0)};
  cfg.horizon = Horizon::for_cycles(4000);
  const auto out = run(cfg);
  const auto good = validate_against(out, {1.05, 0.30}, cfg.mu, 400);
  CHECK(good.pass);
  const auto bad = validate_against(out, {2.5, 0.30}, cfg.mu, 400);
  CHECK_FALSE(bad.pass);
  CHECK_FALSE(bad.pass_queue[0]);
  CHECK(bad.pass_queue[1]);
}
