// Command-line front end: simulate, analyze, validate, sweep, oracle.
//
// Exit codes: 0 success, 2 configuration/validation error, 3 runtime or
// numerical failure. All reports are JSON and embed the resolved config.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "polling/analysis.hpp"
#include "polling/config.hpp"
#include "polling/engine.hpp"
#include "polling/estimators.hpp"
#include "polling/oracle.hpp"
#include "polling/policy.hpp"
#include "polling/sweep.hpp"

namespace {

using nlohmann::json;

constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;

struct ValidationFailure {
  std::vector<std::string> errors;
};

polling::SystemConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationFailure{{"cannot open config file: " + path}};
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ValidationFailure{{std::string("config is not valid JSON: ") + e.what()}};
  }
  polling::SystemConfig cfg;
  auto errors = polling::parse_system_config(j, cfg);
  if (!errors.empty()) throw ValidationFailure{std::move(errors)};
  return cfg;
}

// write-to-temp-then-rename so readers never observe a partial file
void write_atomically(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open output file: " + tmp.string());
    out << content;
  }
  fs::rename(tmp, target);
}

void emit(const json& doc, const std::string& out_path) {
  const std::string text = doc.dump(2) + "\n";
  if (out_path.empty()) std::cout << text;
  else write_atomically(out_path, text);
}

json sim_output_json(const polling::SimOutput& out, const polling::SystemConfig& cfg) {
  json palm = json::array();
  for (const auto& r : out.palm)
    palm.push_back({{"k", r.k}, {"phi", r.phi}, {"theta", r.theta}, {"psi", r.psi},
                    {"m", r.m}, {"b", r.b}, {"c", r.c}, {"s", r.s}, {"h", r.h}});
  json regen = json::array();
  for (const auto& c : out.regen) regen.push_back({{"duration", c.duration}, {"area", c.area}});
  json phases;
  for (int i = 0; i < polling::kPhaseCount; ++i)
    phases[polling::phase_label(static_cast<polling::ServerPhase>(i))] =
        out.phase_time_fractions[i];
  json j{{"config", polling::config_to_json(cfg)},
         {"horizon", out.horizon},
         {"cycles", out.cycles},
         {"time_avg_n", out.time_avg_n},
         {"phase_time_fractions", phases},
         {"totals",
          {{"arrivals", out.arrivals}, {"departures", out.departures}, {"dropped", out.dropped}}},
         {"initial_n", out.initial_n},
         {"final_n", out.final_n},
         {"palm", palm},
         {"regen", {{"reference", out.reference}, {"cycles", regen}}},
         {"truncated", out.truncated}};
  if (out.truncated) j["truncation_reason"] = out.truncation_reason;
  return j;
}

void write_trace_csv(const polling::SimOutput& out, const std::string& path) {
  std::ostringstream csv;
  csv << "t,event_kind,n1,n2,phase\n";
  for (const auto& row : out.trace)
    csv << row.t << ',' << polling::event_label(row.kind) << ',' << row.n[0] << ',' << row.n[1]
        << ',' << polling::phase_label(row.phase) << '\n';
  write_atomically(path, csv.str());
}

json stability_report_json(const polling::StabilityReport& rep) {
  json j{{"eta1", rep.eta[0]},   {"eta2", rep.eta[1]},   {"a11", rep.coeffs.a11},
         {"a12", rep.coeffs.a12}, {"a21", rep.coeffs.a21}, {"a22", rep.coeffs.a22},
         {"a13", rep.coeffs.a13}, {"a23", rep.coeffs.a23}, {"d", rep.coeffs.d},
         {"stable", rep.stable},  {"reasons", rep.reasons}};
  if (rep.theta_star) {
    j["theta1_star"] = (*rep.theta_star)[0];
    j["theta2_star"] = (*rep.theta_star)[1];
    j["psi_star"] = *rep.psi_star;
  } else {
    j["theta1_star"] = nullptr;
    j["theta2_star"] = nullptr;
    j["psi_star"] = nullptr;
  }
  return j;
}

std::string csv_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string pareto_csv(const std::vector<polling::ParetoPoint>& points) {
  std::ostringstream csv;
  csv << "a1B,a2B,b1B,b2B,a1C,a2C,b1C,b2C,en1,en1_ci,en2,en2_ci,"
         "theta1_star,theta2_star,dominated,tag\n";
  for (const auto& p : points) {
    const auto& pol = p.policy;
    for (double v : {pol.alpha_b[0], pol.alpha_b[1], pol.beta_b[0], pol.beta_b[1],
                     pol.alpha_c[0], pol.alpha_c[1], pol.beta_c[0], pol.beta_c[1], p.en[0],
                     p.en_ci[0], p.en[1], p.en_ci[1]})
      csv << csv_number(v) << ',';
    if (p.theta_star)
      csv << csv_number((*p.theta_star)[0]) << ',' << csv_number((*p.theta_star)[1]) << ',';
    else
      csv << ",,";
    csv << (p.dominated ? "1" : "0") << ',' << p.tag << '\n';
  }
  return csv.str();
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    values.push_back(std::stod(item));
  }
  return values;
}

int run_simulate(const std::string& config_path, std::optional<std::uint64_t> seed,
                 const std::string& out_path, const std::string& trace_path) {
  polling::SystemConfig cfg = load_config(config_path);
  if (seed) cfg.seed = *seed;
  if (!trace_path.empty()) cfg.trace = true;
  const auto out = polling::run(cfg);
  if (!trace_path.empty()) write_trace_csv(out, trace_path);
  emit(sim_output_json(out, cfg), out_path);
  return 0;
}

int run_analyze(const std::string& config_path, const std::string& out_path) {
  polling::SystemConfig cfg = load_config(config_path);
  const auto rep = polling::stability_report(cfg.rates(), cfg.policy);
  json j = stability_report_json(rep);
  j["config"] = polling::config_to_json(cfg);
  emit(j, out_path);
  return 0;  // a verdict is a success even when stable = false
}

int run_validate(const std::string& config_path, long cycles, long burn_in,
                 const std::string& out_path) {
  polling::SystemConfig cfg = load_config(config_path);
  const auto verdict = polling::is_stable(cfg.rates(), cfg.policy);
  if (!verdict.stable) {
    std::vector<std::string> errors{"validate requires a certified-stable config"};
    for (const auto& r : verdict.reasons) errors.push_back("violated: " + r);
    throw ValidationFailure{errors};
  }
  const auto fp = polling::theta_star(cfg.rates(), cfg.policy);
  if (!fp.theta) throw ValidationFailure{{"fixed point undefined: " + fp.reason}};

  cfg.horizon = polling::Horizon::for_cycles(cycles);
  const auto out = polling::run(cfg);
  if (burn_in < 0) burn_in = cycles / 5;
  const auto report = polling::validate_against(out, *fp.theta, cfg.mu, burn_in);
  const auto drift_at_mean = polling::drift(report.palm_mean, cfg.rates(), cfg.policy);

  json j{{"config", polling::config_to_json(cfg)},
         {"cycles", report.cycles},
         {"burn_in", report.burn_in},
         {"theta_star", report.theta},
         {"psi_star", *fp.psi},
         {"palm_mean", report.palm_mean},
         {"ci", report.ci},
         {"tolerance", report.tolerance},
         {"pass_queue", report.pass_queue},
         {"pass", report.pass},
         {"drift_at_palm_mean", drift_at_mean.delta_v}};
  emit(j, out_path);
  return 0;
}

int run_sweep(const std::string& config_path, int samples, int replications,
              const std::string& grid_text, bool both_sides, double alpha_lo, double beta_lo,
              std::optional<long> buffer_cap, std::optional<std::uint64_t> seed,
              const std::string& out_path, const std::string& summary_path) {
  polling::SystemConfig cfg = load_config(config_path);
  if (buffer_cap) cfg.buffer_cap = *buffer_cap;
  if (seed) cfg.seed = *seed;
  if (samples < 0) throw ValidationFailure{{"--samples must be >= 0"}};

  std::vector<polling::ParetoPoint> points;
  if (samples > 0) {
    const auto bounds = polling::PolicyBounds::uniform(alpha_lo, beta_lo);
    const auto policies = polling::sample_policies(samples, bounds, cfg.seed);
    std::vector<polling::ParetoPoint> sampled(policies.size());
    polling::run_parallel(static_cast<long>(policies.size()), [&](long i) {
      sampled[i] = polling::evaluate_policy(policies[i], cfg, replications, i);
      sampled[i].tag = "random-Ts";
    });
    points.insert(points.end(), sampled.begin(), sampled.end());
  }
  if (!grid_text.empty()) {
    const auto grid = parse_grid(grid_text);
    auto frontier = polling::frontier_grid(grid, both_sides, cfg, replications);
    points.insert(points.end(), frontier.begin(), frontier.end());
  }
  if (points.empty()) throw ValidationFailure{{"nothing to sweep: no samples and no grid"}};
  polling::pareto_filter(points);

  const std::string csv = pareto_csv(points);
  if (out_path.empty()) std::cout << csv;
  else write_atomically(out_path, csv);

  json frontier_indices = json::array();
  for (std::size_t i = 0; i < points.size(); ++i)
    if (!points[i].dominated) frontier_indices.push_back(i);
  json summary{{"config", polling::config_to_json(cfg)},
               {"points", points.size()},
               {"samples", samples},
               {"replications", replications},
               {"frontier_indices", frontier_indices}};
  if (!summary_path.empty()) emit(summary, summary_path);
  return 0;
}

int run_oracle(const std::string& config_path, long cap, const std::string& out_path) {
  polling::SystemConfig cfg = load_config(config_path);
  polling::CtmcModel model;
  try {
    model = polling::build_ctmc(cfg, cap);
  } catch (const std::invalid_argument& e) {
    throw ValidationFailure{{e.what()}};
  }
  const auto pi = polling::stationary_distribution(model);
  const double residual = polling::generator_residual(pi, model);
  if (residual > 1e-10)
    throw std::runtime_error("oracle: stationary solve residual " + std::to_string(residual));
  const auto en = polling::oracle_expected_lengths(pi, model);
  json j{{"config", polling::config_to_json(cfg)},
         {"buffer_cap", cap},
         {"en1", en[0]},
         {"en2", en[1]},
         {"states", model.states.size()},
         {"residual", residual},
         {"boundary_mass", polling::boundary_mass(pi, model)}};
  emit(j, out_path);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-queue polling system simulator and analyzer"};
  app.require_subcommand(1);

  std::string config_path, out_path, trace_path, summary_path, grid_text;
  std::optional<std::uint64_t> seed;
  std::optional<long> buffer_cap_opt;
  long cycles = 20000, burn_in = -1, cap = 40;
  int samples = 0, replications = 2;
  bool both_sides = false;
  double alpha_lo = -2.0, beta_lo = -0.5;

  auto* simulate = app.add_subcommand("simulate", "run the event-driven simulator");
  simulate->add_option("--config", config_path, "config JSON file")->required();
  simulate->add_option("--seed", seed, "override the config seed");
  simulate->add_option("--out", out_path, "output JSON path (default stdout)");
  simulate->add_option("--trace", trace_path, "write an event-trace CSV (debug)");

  auto* analyze = app.add_subcommand("analyze", "stability report and fixed point");
  analyze->add_option("--config", config_path, "config JSON file")->required();
  analyze->add_option("--out", out_path, "output JSON path (default stdout)");

  auto* validate = app.add_subcommand("validate", "compare simulated visit-epoch means to theta*");
  validate->add_option("--config", config_path, "config JSON file")->required();
  validate->add_option("--cycles", cycles, "cycles to simulate");
  validate->add_option("--burn-in", burn_in, "cycles to discard (default cycles/5)");
  validate->add_option("--out", out_path, "output JSON path (default stdout)");

  auto* sweep = app.add_subcommand("sweep", "sample policies and trace the frontier");
  sweep->add_option("--config", config_path, "config JSON file")->required();
  sweep->add_option("--samples", samples, "random stable policies to draw");
  sweep->add_option("--replications", replications, "independent runs per policy");
  sweep->add_option("--alpha-grid", grid_text, "comma-separated alphaC grid for the frontier");
  sweep->add_flag("--both-sides", both_sides, "apply the grid on both queues");
  sweep->add_option("--alpha-lo", alpha_lo, "sampling lower bound for alpha coefficients");
  sweep->add_option("--beta-lo", beta_lo, "sampling lower bound for beta coefficients");
  sweep->add_option("--buffer-cap", buffer_cap_opt, "truncate both queues at this size");
  sweep->add_option("--seed", seed, "override the config seed");
  sweep->add_option("--out", out_path, "CSV output path (default stdout)");
  sweep->add_option("--summary", summary_path, "JSON summary path");

  auto* oracle = app.add_subcommand("oracle", "exact truncated-chain stationary solve");
  oracle->add_option("--config", config_path, "config JSON file")->required();
  oracle->add_option("--buffer-cap", cap, "truncation cap per queue");
  oracle->add_option("--out", out_path, "output JSON path (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) return run_simulate(config_path, seed, out_path, trace_path);
    if (analyze->parsed()) return run_analyze(config_path, out_path);
    if (validate->parsed()) return run_validate(config_path, cycles, burn_in, out_path);
    if (sweep->parsed())
      return run_sweep(config_path, samples, replications, grid_text, both_sides, alpha_lo,
                       beta_lo, buffer_cap_opt, seed, out_path, summary_path);
    if (oracle->parsed()) return run_oracle(config_path, cap, out_path);
  } catch (const ValidationFailure& f) {
    json err{{"error", "validation"}, {"details", f.errors}};
    std::cerr << err.dump(2) << "\n";
    return kExitValidation;
  } catch (const std::invalid_argument& e) {
    json err{{"error", "validation"}, {"details", {e.what()}}};
    std::cerr << err.dump(2) << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    json err{{"error", "runtime"}, {"details", {e.what()}}};
    std::cerr << err.dump(2) << "\n";
    return kExitRuntime;
  }
  return 0;
}
