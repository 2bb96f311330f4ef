#include <catch2/catch.hpp>

#include <cmath>
#include <vector>

#include "polling/stochastic.hpp"

using namespace polling;

TEST_CASE("moments are the analytic first and second raw moments") {
  CHECK(moments(DistributionSpec::exponential(2.0)) == std::pair{2.0, 8.0});
  CHECK(moments(DistributionSpec::deterministic(1.0)) == std::pair{1.0, 1.0});
  const auto [m, m2] = moments(DistributionSpec::uniform(0.0, 2.0));
  CHECK(m == Approx(1.0));
  CHECK(m2 == Approx(4.0 / 3.0));
  const auto [em, em2] = moments(DistributionSpec::erlang(2, 1.0));
  CHECK(em == Approx(1.0));
  CHECK(em2 == Approx(1.5));  // variance 0.5 plus mean squared
}

TEST_CASE("deterministic sampling returns the mean exactly") {
  RngStream rng(1, 0);
  const auto spec = DistributionSpec::deterministic(1.0);
  for (int i = 0; i < 10; ++i) CHECK(sample(spec, rng) == 1.0);
}

TEST_CASE("exponential sample mean over 1e6 draws") {
  RngStream rng(42, 1);
  const auto spec = DistributionSpec::exponential(0.1);
  const int n = 1'000'000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += sample(spec, rng);
  const double mean = sum / n;
  CHECK(std::abs(mean - 0.1) < 3.0 * 0.1 / 1000.0);  // 3 standard errors
}

TEST_CASE("erlang(2) sample variance over 1e6 draws") {
  RngStream rng(42, 2);
  const auto spec = DistributionSpec::erlang(2, 1.0);
  const int n = 1'000'000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = sample(spec, rng);
    sum += x;
    sumsq += x * x;
  }
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  CHECK(var == Approx(0.5).epsilon(0.01));
}

TEST_CASE("every kind matches its analytic mean within 5 standard errors") {
  const std::vector<DistributionSpec> specs{
      DistributionSpec::exponential(0.7), DistributionSpec::deterministic(2.5),
      DistributionSpec::erlang(3, 1.4), DistributionSpec::uniform(0.2, 1.8)};
  const int n = 1'000'000;
  for (std::size_t s = 0; s < specs.size(); ++s) {
    RngStream rng(99, 10 + s);
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += sample(specs[s], rng);
    const auto [mean, m2] = moments(specs[s]);
    const double se = std::sqrt(std::max(m2 - mean * mean, 0.0) / n);
    CAPTURE(s);
    CHECK(std::abs(sum / n - mean) <= 5.0 * se + 1e-12);
  }
}

TEST_CASE("samples are strictly positive") {
  const std::vector<DistributionSpec> specs{
      DistributionSpec::exponential(1e-3), DistributionSpec::deterministic(0.5),
      DistributionSpec::erlang(2, 1e-3), DistributionSpec::uniform(0.0, 1e-3)};
  for (std::size_t s = 0; s < specs.size(); ++s) {
    RngStream rng(5, s);
    for (int i = 0; i < 100'000; ++i) CHECK(sample(specs[s], rng) > 0.0);
  }
}

TEST_CASE("identical (seed, stream) reproduces the sequence bit for bit") {
  RngStream a(123456789, 7), b(123456789, 7);
  const auto spec = DistributionSpec::exponential(1.0);
  for (int i = 0; i < 1000; ++i) REQUIRE(sample(spec, a) == sample(spec, b));
}

TEST_CASE("distinct stream ids give different sequences") {
  RngStream a(123456789, 7), b(123456789, 8);
  int equal = 0;
  for (int i = 0; i < 1000; ++i)
    if (a.next_u32() == b.next_u32()) ++equal;
  CHECK(equal < 5);
}

TEST_CASE("spec validation rejects bad parameters") {
  CHECK_THROWS_AS(DistributionSpec::exponential(0.0), std::invalid_argument);
  CHECK_THROWS_AS(DistributionSpec::deterministic(-1.0), std::invalid_argument);
  CHECK_THROWS_AS(DistributionSpec::erlang(0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(DistributionSpec::uniform(2.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(DistributionSpec::uniform(-0.5, 1.0), std::invalid_argument);
}
