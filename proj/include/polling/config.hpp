// System configuration: rates, distributions, policy, horizon, seed.
// JSON schema (see README for examples):
//
//   {
//     "mu": 20.0, "rho1": 0.3, "rho2": 0.3,
//     "service":    {"dist": "exponential"},                 // mean defaults to 1/mu
//     "switchover": [{"dist": "deterministic", "mean": 1.0},
//                    {"dist": "deterministic", "mean": 1.0}],
//     "policy":  {"alphaB": [0,0], "betaB": [0,0], "alphaC": [0,0], "betaC": [0,0]},
//     "horizon": {"time": 1e6} | {"cycles": 20000},
//     "seed": 1, "buffer_cap": 40, "initial": [0,0]          // last two optional
//   }
//
// The configuration fixes (mu, rho1, rho2) rather than raw arrival rates so a
// family of systems with different service rates shares one load description.
// The service mean is pinned to 1/mu; a config that says otherwise is invalid.

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "polling/analysis.hpp"
#include "polling/policy.hpp"
#include "polling/stochastic.hpp"

namespace polling {

struct Horizon {
  enum class Kind { Time, Cycles };
  Kind kind = Kind::Time;
  double time = 0.0;
  long cycles = 0;

  static Horizon for_time(double t) { return {Kind::Time, t, 0}; }
  static Horizon for_cycles(long k) { return {Kind::Cycles, 0.0, k}; }
};

struct SystemConfig {
  double mu = 1.0;
  double rho1 = 0.0, rho2 = 0.0;
  DistributionSpec service = DistributionSpec::exponential(1.0);
  std::array<DistributionSpec, 2> switchover{DistributionSpec::deterministic(1.0),
                                             DistributionSpec::deterministic(1.0)};
  PolicyParams policy;
  Horizon horizon = Horizon::for_time(1e4);
  std::uint64_t seed = 1;
  std::optional<long> buffer_cap;
  std::array<long, 2> initial{0, 0};
  bool trace = false;              // record the event trace (debug runs only)
  std::uint64_t stream_base = 0;   // replicate offset for the RNG stream ids

  SystemRates rates() const {
    return SystemRates{mu, {rho1, rho2}, {switchover[0].mean, switchover[1].mean}};
  }
};

// Semantic checks beyond JSON shape. Empty result means the config is usable.
inline std::vector<std::string> validate_config(const SystemConfig& c) {
  std::vector<std::string> errors;
  if (!(c.mu > 0.0)) errors.push_back("mu must be > 0");
  if (c.rho1 < 0.0 || c.rho2 < 0.0) errors.push_back("rho1/rho2 must be >= 0");
  for (const auto& e : c.service.validate()) errors.push_back("service: " + e);
  if (std::abs(c.service.mean - 1.0 / c.mu) > 1e-12 * std::max(1.0, 1.0 / c.mu))
    errors.push_back("service mean must equal 1/mu");
  for (int i = 0; i < 2; ++i)
    for (const auto& e : c.switchover[i].validate())
      errors.push_back("switchover[" + std::to_string(i) + "]: " + e);
  for (const auto& v : validate_params(c.policy)) errors.push_back("policy: " + v);
  if (c.horizon.kind == Horizon::Kind::Time && !(c.horizon.time > 0.0))
    errors.push_back("horizon time must be > 0");
  if (c.horizon.kind == Horizon::Kind::Cycles && c.horizon.cycles < 1)
    errors.push_back("horizon cycles must be >= 1");
  if (c.buffer_cap && *c.buffer_cap < 1) errors.push_back("buffer_cap must be >= 1");
  if (c.initial[0] < 0 || c.initial[1] < 0) errors.push_back("initial counts must be >= 0");
  if (c.buffer_cap && (c.initial[0] > *c.buffer_cap || c.initial[1] > *c.buffer_cap))
    errors.push_back("initial counts must not exceed buffer_cap");
  return errors;
}

namespace detail {

inline bool parse_distribution(const nlohmann::json& j, const std::string& where,
                               std::optional<double> default_mean, DistributionSpec& out,
                               std::vector<std::string>& errors) {
  if (!j.is_object() || !j.contains("dist") || !j.at("dist").is_string()) {
    errors.push_back(where + ": expected object with a \"dist\" string");
    return false;
  }
  const std::string kind = j.at("dist").get<std::string>();
  DistributionSpec spec;
  if (kind == "exponential") spec.kind = DistKind::Exponential;
  else if (kind == "deterministic") spec.kind = DistKind::Deterministic;
  else if (kind == "erlang") spec.kind = DistKind::Erlang;
  else if (kind == "uniform") spec.kind = DistKind::Uniform;
  else {
    errors.push_back(where + ": unknown dist \"" + kind + "\"");
    return false;
  }
  if (j.contains("mean")) spec.mean = j.at("mean").get<double>();
  else if (spec.kind == DistKind::Uniform && j.contains("lo") && j.contains("hi"))
    spec.mean = (j.at("lo").get<double>() + j.at("hi").get<double>()) / 2.0;
  else if (default_mean) spec.mean = *default_mean;
  else {
    errors.push_back(where + ": missing \"mean\"");
    return false;
  }
  if (spec.kind == DistKind::Erlang) {
    if (!j.contains("shape")) {
      errors.push_back(where + ": erlang requires \"shape\"");
      return false;
    }
    spec.shape = j.at("shape").get<int>();
  }
  if (spec.kind == DistKind::Uniform) {
    if (!j.contains("lo") || !j.contains("hi")) {
      errors.push_back(where + ": uniform requires \"lo\" and \"hi\"");
      return false;
    }
    spec.lo = j.at("lo").get<double>();
    spec.hi = j.at("hi").get<double>();
  }
  for (const auto& e : spec.validate()) errors.push_back(where + ": " + e);
  out = spec;
  return true;
}

inline void parse_pair(const nlohmann::json& j, const std::string& where,
                       std::array<double, 2>& out, std::vector<std::string>& errors) {
  if (!j.is_array() || j.size() != 2) {
    errors.push_back(where + ": expected a 2-array");
    return;
  }
  out = {j.at(0).get<double>(), j.at(1).get<double>()};
}

}  // namespace detail

// Parses and validates; returns the full error list (empty on success).
inline std::vector<std::string> parse_system_config(const nlohmann::json& j, SystemConfig& out) {
  std::vector<std::string> errors;
  SystemConfig c;
  if (!j.is_object()) return {"config must be a JSON object"};

  for (const char* key : {"mu", "rho1", "rho2"})
    if (!j.contains(key) || !j.at(key).is_number())
      errors.push_back(std::string("missing numeric \"") + key + "\"");
  if (!errors.empty()) return errors;
  c.mu = j.at("mu").get<double>();
  c.rho1 = j.at("rho1").get<double>();
  c.rho2 = j.at("rho2").get<double>();

  if (j.contains("service"))
    detail::parse_distribution(j.at("service"), "service", c.mu > 0 ? std::optional<double>(1.0 / c.mu) : std::nullopt,
                               c.service, errors);
  else if (c.mu > 0)
    c.service = DistributionSpec::exponential(1.0 / c.mu);

  if (!j.contains("switchover") || !j.at("switchover").is_array() || j.at("switchover").size() != 2)
    errors.push_back("\"switchover\" must be a 2-array of distribution objects");
  else
    for (int i = 0; i < 2; ++i)
      detail::parse_distribution(j.at("switchover").at(i), "switchover[" + std::to_string(i) + "]",
                                 std::nullopt, c.switchover[i], errors);

  if (j.contains("policy")) {
    const auto& pj = j.at("policy");
    if (!pj.is_object()) errors.push_back("\"policy\" must be an object");
    else {
      if (pj.contains("alphaB")) detail::parse_pair(pj.at("alphaB"), "policy.alphaB", c.policy.alpha_b, errors);
      if (pj.contains("betaB")) detail::parse_pair(pj.at("betaB"), "policy.betaB", c.policy.beta_b, errors);
      if (pj.contains("alphaC")) detail::parse_pair(pj.at("alphaC"), "policy.alphaC", c.policy.alpha_c, errors);
      if (pj.contains("betaC")) detail::parse_pair(pj.at("betaC"), "policy.betaC", c.policy.beta_c, errors);
    }
  }

  if (!j.contains("horizon") || !j.at("horizon").is_object())
    errors.push_back("\"horizon\" must be {\"time\": T} or {\"cycles\": K}");
  else {
    const auto& h = j.at("horizon");
    if (h.contains("time")) c.horizon = Horizon::for_time(h.at("time").get<double>());
    else if (h.contains("cycles")) c.horizon = Horizon::for_cycles(h.at("cycles").get<long>());
    else errors.push_back("horizon needs \"time\" or \"cycles\"");
  }

  if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("buffer_cap")) c.buffer_cap = j.at("buffer_cap").get<long>();
  if (j.contains("initial")) {
    const auto& init = j.at("initial");
    if (!init.is_array() || init.size() != 2) errors.push_back("\"initial\" must be a 2-array");
    else c.initial = {init.at(0).get<long>(), init.at(1).get<long>()};
  }
  if (j.contains("trace")) c.trace = j.at("trace").get<bool>();

  if (errors.empty())
    for (const auto& e : validate_config(c)) errors.push_back(e);
  if (errors.empty()) out = c;
  return errors;
}

// Resolved config as JSON, embedded verbatim in every report for provenance.
inline nlohmann::json config_to_json(const SystemConfig& c) {
  auto dist = [](const DistributionSpec& s) {
    nlohmann::json j{{"dist", dist_kind_name(s.kind)}, {"mean", s.mean}};
    if (s.kind == DistKind::Erlang) j["shape"] = s.shape;
    if (s.kind == DistKind::Uniform) {
      j["lo"] = s.lo;
      j["hi"] = s.hi;
    }
    return j;
  };
  nlohmann::json j{
      {"mu", c.mu},
      {"rho1", c.rho1},
      {"rho2", c.rho2},
      {"service", dist(c.service)},
      {"switchover", {dist(c.switchover[0]), dist(c.switchover[1])}},
      {"policy",
       {{"alphaB", c.policy.alpha_b}, {"betaB", c.policy.beta_b}, {"alphaC", c.policy.alpha_c},
        {"betaC", c.policy.beta_c}}},
      {"seed", c.seed},
      {"initial", c.initial},
  };
  if (c.horizon.kind == Horizon::Kind::Time) j["horizon"] = {{"time", c.horizon.time}};
  else j["horizon"] = {{"cycles", c.horizon.cycles}};
  if (c.buffer_cap) j["buffer_cap"] = *c.buffer_cap;
  if (c.trace) j["trace"] = true;
  return j;
}

}  // namespace polling
