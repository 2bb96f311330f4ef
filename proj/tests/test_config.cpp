#include <catch2/catch.hpp>

#include <json.hpp>

#include "polling/config.hpp"

using namespace polling;
using nlohmann::json;

namespace {

json minimal_config() {
  return json{{"mu", 20.0},
              {"rho1", 0.3},
              {"rho2", 0.3},
              {"service", {{"dist", "exponential"}}},
              {"switchover",
               {{{"dist", "deterministic"}, {"mean", 1.0}},
                {{"dist", "deterministic"}, {"mean", 1.0}}}},
              {"horizon", {{"cycles", 1000}}},
              {"seed", 7}};
}

}  // namespace

TEST_CASE("minimal config parses with defaults") {
  SystemConfig cfg;
  const auto errors = parse_system_config(minimal_config(), cfg);
  CAPTURE(errors);
  REQUIRE(errors.empty());
  CHECK(cfg.mu == 20.0);
  CHECK(cfg.service.mean == Approx(1.0 / 20.0));  // defaulted to 1/mu
  CHECK(cfg.horizon.kind == Horizon::Kind::Cycles);
  CHECK(cfg.horizon.cycles == 1000);
  CHECK(cfg.seed == 7);
  CHECK_FALSE(cfg.buffer_cap.has_value());
  CHECK(cfg.initial == std::array<long, 2>{0, 0});
  // omitted policy block means the exhaustive policy
  CHECK(coefficient_values(cfg.policy) == coefficient_values(PolicyParams{}));
}

TEST_CASE("policy block round-trips") {
  auto j = minimal_config();
  j["policy"] = {{"alphaB", {-0.1, 0.0}},
                 {"betaB", {0.0, -0.2}},
                 {"alphaC", {-0.5, -1.5}},
                 {"betaC", {-0.3, 0.0}}};
  j["buffer_cap"] = 40;
  j["initial"] = {3, 4};
  j["horizon"] = {{"time", 500.0}};
  SystemConfig cfg;
  REQUIRE(parse_system_config(j, cfg).empty());
  CHECK(cfg.policy.alpha_b[0] == -0.1);
  CHECK(cfg.policy.beta_b[1] == -0.2);
  CHECK(cfg.policy.alpha_c[1] == -1.5);
  CHECK(cfg.buffer_cap == 40);
  CHECK(cfg.initial == std::array<long, 2>{3, 4});

  const auto back = config_to_json(cfg);
  SystemConfig cfg2;
  REQUIRE(parse_system_config(back, cfg2).empty());
  CHECK(coefficient_values(cfg2.policy) == coefficient_values(cfg.policy));
  CHECK(cfg2.service.mean == cfg.service.mean);
  CHECK(cfg2.horizon.time == cfg.horizon.time);
  CHECK(cfg2.buffer_cap == cfg.buffer_cap);
}

TEST_CASE("a positive coefficient is rejected by name") {
  auto j = minimal_config();
  j["policy"] = {{"betaB", {0.1, 0.0}}};
  SystemConfig cfg;
  const auto errors = parse_system_config(j, cfg);
  REQUIRE_FALSE(errors.empty());
  bool named = false;
  for (const auto& e : errors)
    if (e.find("beta1B") != std::string::npos) named = true;
  CHECK(named);
}

TEST_CASE("service mean must equal 1/mu") {
  auto j = minimal_config();
  j["service"] = {{"dist", "exponential"}, {"mean", 0.2}};
  SystemConfig cfg;
  const auto errors = parse_system_config(j, cfg);
  REQUIRE_FALSE(errors.empty());
  bool found = false;
  for (const auto& e : errors)
    if (e.find("1/mu") != std::string::npos) found = true;
  CHECK(found);
}

TEST_CASE("schema violations are reported with context") {
  SystemConfig cfg;

  auto no_switch = minimal_config();
  no_switch.erase("switchover");
  CHECK_FALSE(parse_system_config(no_switch, cfg).empty());

  auto bad_dist = minimal_config();
  bad_dist["switchover"][0] = {{"dist", "weibull"}, {"mean", 1.0}};
  const auto errors = parse_system_config(bad_dist, cfg);
  REQUIRE_FALSE(errors.empty());
  CHECK(errors.front().find("weibull") != std::string::npos);

  auto bad_horizon = minimal_config();
  bad_horizon["horizon"] = {{"epochs", 10}};
  CHECK_FALSE(parse_system_config(bad_horizon, cfg).empty());

  auto negative_rho = minimal_config();
  negative_rho["rho1"] = -0.1;
  CHECK_FALSE(parse_system_config(negative_rho, cfg).empty());

  CHECK_FALSE(parse_system_config(json::array(), cfg).empty());
}

TEST_CASE("erlang and uniform distributions parse") {
  auto j = minimal_config();
  j["switchover"] = {json{{"dist", "erlang"}, {"mean", 0.8}, {"shape", 3}},
                     json{{"dist", "uniform"}, {"lo", 0.2}, {"hi", 1.0}}};
  SystemConfig cfg;
  REQUIRE(parse_system_config(j, cfg).empty());
  CHECK(cfg.switchover[0].kind == DistKind::Erlang);
  CHECK(cfg.switchover[0].shape == 3);
  CHECK(cfg.switchover[1].kind == DistKind::Uniform);
  CHECK(cfg.switchover[1].mean == Approx(0.6));

  j["switchover"][0]["shape"] = 0;
  CHECK_FALSE(parse_system_config(j, cfg).empty());
}

TEST_CASE("rates() exposes mu, loads, and switchover means") {
  SystemConfig cfg;
  REQUIRE(parse_system_config(minimal_config(), cfg).empty());
  const auto r = cfg.rates();
  CHECK(r.mu == 20.0);
  CHECK(r.rho == std::array<double, 2>{0.3, 0.3});
  CHECK(r.s == std::array<double, 2>{1.0, 1.0});
  CHECK(r.lambda(0) == Approx(6.0));
}
