// Event-driven simulator of the two-queue polling system.
//
// The server cycles through six phases: visit to Q1 (beginning, concluding),
// switchover to Q2, visit to Q2 (beginning, concluding), switchover to Q1.
// Visit phases may have zero length. Service is non-resume preemptive: a job
// interrupted by a switch stays in its queue and receives a fresh service
// draw at the next visit. Switching decisions are evaluated only at arrival,
// departure, and server-arrival epochs; between events the decision functions
// are constant, so no other decision times exist.
//
// A cycle is the span between consecutive server arrivals at Q1. At each
// cycle start the normalized state (N1/mu, N2/mu) is recorded together with
// the per-phase durations realized during the cycle, giving the visit-epoch
// (Palm) series used by the estimators and the analytic validation.

#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "polling/config.hpp"
#include "polling/policy.hpp"
#include "polling/stochastic.hpp"

namespace polling {

enum class ServerPhase { Visit1B = 0, Visit1C, Switch12, Visit2B, Visit2C, Switch21 };
inline constexpr int kPhaseCount = 6;

inline const char* phase_label(ServerPhase p) {
  static constexpr const char* labels[kPhaseCount] = {"1B", "1C", "S12", "2B", "2C", "S21"};
  return labels[static_cast<int>(p)];
}

inline bool is_visit(ServerPhase p) {
  return p == ServerPhase::Visit1B || p == ServerPhase::Visit1C || p == ServerPhase::Visit2B ||
         p == ServerPhase::Visit2C;
}
inline bool is_switch(ServerPhase p) {
  return p == ServerPhase::Switch12 || p == ServerPhase::Switch21;
}
// 0-based queue being visited or switched away from.
inline int phase_queue(ServerPhase p) { return static_cast<int>(p) < 3 ? 0 : 1; }
inline ServerPhase next_phase(ServerPhase p) {
  return static_cast<ServerPhase>((static_cast<int>(p) + 1) % kPhaseCount);
}

enum class EventKind { Arrival1 = 0, Arrival2, Departure, SwitchDone };

inline const char* event_label(EventKind e) {
  static constexpr const char* labels[4] = {"arrival1", "arrival2", "departure", "switch"};
  return labels[static_cast<int>(e)];
}

// Outcome of cascading the phase predicates at a decision epoch. At most
// B -> C -> switch can fire at a single epoch (zero-length phases).
struct CascadeResult {
  ServerPhase phase;
  bool beginning_ended = false;
  bool switched = false;
  double h_value = 0.0;  // concluding-function value at the switch instant
};

// Pure cascade of the phase-end predicates for counts (n1, n2); the engine
// and the exact-oracle jump construction share this single definition.
inline CascadeResult resolve_phases(ServerPhase phase, long n1, long n2, const PolicyParams& p,
                                    double mu) {
  CascadeResult r{phase};
  const std::array<double, 2> n{static_cast<double>(n1), static_cast<double>(n2)};
  if (r.phase == ServerPhase::Visit1B || r.phase == ServerPhase::Visit2B) {
    const int q = phase_queue(r.phase);
    if (beginning_over(p, QueueIndex(q + 1), n[q], n[1 - q], mu)) {
      r.beginning_ended = true;
      r.phase = next_phase(r.phase);
    }
  }
  if (r.phase == ServerPhase::Visit1C || r.phase == ServerPhase::Visit2C) {
    const int q = phase_queue(r.phase);
    if (switch_now(p, QueueIndex(q + 1), n[q], n[1 - q], mu)) {
      r.switched = true;
      r.h_value = pi_value(p, PhaseKind::Concluding, QueueIndex(q + 1), n[q], n[1 - q], mu);
      r.phase = next_phase(r.phase);
    }
  }
  return r;
}

// Per-cycle observables at the server-visit epochs to Q1.
struct PalmRecord {
  long k = 0;
  double phi = 0.0;                 // cycle start epoch
  std::array<double, 2> theta{};    // (N1, N2)/mu at phi
  double psi = 0.0;                 // cycle duration
  std::array<double, 2> m{}, b{}, c{};  // visit / beginning / concluding durations
  std::array<double, 2> s{};        // realized switchover durations
  std::array<double, 2> h{};        // concluding-function values at the two switches
};

struct RegenCycle {
  double duration = 0.0;
  std::array<double, 2> area{};  // integral of N_i over the cycle
};

struct TraceRow {
  double t = 0.0;
  EventKind kind = EventKind::Arrival1;
  std::array<long, 2> n{};
  ServerPhase phase = ServerPhase::Visit1B;
};

struct SimOutput {
  double mu = 1.0;  // service rate of the run, for de-normalizing theta
  std::vector<PalmRecord> palm;
  std::vector<std::array<double, 2>> cycle_area;  // integral of N_i per palm cycle
  std::array<double, 2> time_avg_n{};
  std::array<double, kPhaseCount> phase_time_fractions{};
  std::array<long, 2> reference{0, 0};  // regeneration reference state
  std::vector<RegenCycle> regen;
  std::array<long, 2> arrivals{}, departures{}, dropped{};
  std::array<long, 2> initial_n{}, final_n{};
  double horizon = 0.0;  // simulated time span
  long cycles = 0;       // completed palm cycles
  double window_len = 0.0;
  std::vector<std::array<double, 2>> window_area;  // equal-length window integrals
  bool truncated = false;
  std::string truncation_reason;
  std::vector<TraceRow> trace;
  // internal consistency counters; nonzero values indicate an engine defect
  long phase_order_violations = 0;
  long offvisit_departures = 0;
};

namespace detail {

inline constexpr double kInfTime = std::numeric_limits<double>::infinity();
inline constexpr int kWindowCount = 1024;

// RNG stream ids within a run; replicate runs shift by SystemConfig::stream_base.
enum StreamId : std::uint64_t { kArrival1 = 0, kArrival2, kService, kSwitch1, kSwitch2 };

class Simulator {
 public:
  explicit Simulator(const SystemConfig& cfg)
      : cfg_(cfg),
        arrival_rng_{RngStream(cfg.seed, cfg.stream_base + kArrival1),
                     RngStream(cfg.seed, cfg.stream_base + kArrival2)},
        service_rng_(cfg.seed, cfg.stream_base + kService),
        switch_rng_{RngStream(cfg.seed, cfg.stream_base + kSwitch1),
                    RngStream(cfg.seed, cfg.stream_base + kSwitch2)} {
    const auto errors = validate_config(cfg);
    if (!errors.empty()) throw std::invalid_argument("invalid config: " + errors.front());
    lambda_[0] = cfg.rho1 * cfg.mu;
    lambda_[1] = cfg.rho2 * cfg.mu;
  }

  SimOutput run() {
    init();
    const bool by_time = cfg_.horizon.kind == Horizon::Kind::Time;
    const double t_end = by_time ? cfg_.horizon.time : kInfTime;
    const long target_cycles = by_time ? -1 : cfg_.horizon.cycles;

    if (by_time) {
      out_.window_len = t_end / kWindowCount;
      out_.window_area.assign(kWindowCount, {0.0, 0.0});
    }

    long events = 0;
    constexpr long kMaxEvents = 2'000'000'000;  // guard against stalled cycle horizons
    while (true) {
      if (!by_time && out_.cycles >= target_cycles) break;
      EventKind kind;
      const double t = next_event(kind);
      if (t > t_end) break;
      if (t == kInfTime) {
        if (!by_time) {
          out_.truncated = true;
          out_.truncation_reason = "no pending events before reaching the cycle horizon";
        }
        break;
      }
      advance_to(t);
      dispatch(kind);
      if (cfg_.trace) out_.trace.push_back({now_, kind, {n_[0], n_[1]}, phase_});
      if (++events >= kMaxEvents) {
        out_.truncated = true;
        out_.truncation_reason = "event budget exhausted before the horizon";
        break;
      }
    }
    if (by_time && now_ < t_end) advance_to(t_end);
    finalize();
    return std::move(out_);
  }

 private:
  void init() {
    now_ = 0.0;
    n_ = cfg_.initial;
    out_.initial_n = cfg_.initial;
    for (int q = 0; q < 2; ++q)
      next_arrival_[q] = lambda_[q] > 0.0 ? now_ + draw_interarrival(q) : kInfTime;
    // server arrives at Q1 at t = 0
    phase_ = ServerPhase::Visit1B;
    phase_start_ = now_;
    begin_cycle();
    resolve_and_fix_service();
  }

  double draw_interarrival(int q) { return -std::log(arrival_rng_[q].next_unit()) / lambda_[q]; }

  double next_event(EventKind& kind) {
    // fixed tie order: arrival Q1 < arrival Q2 < departure < switch completion
    double best = next_arrival_[0];
    kind = EventKind::Arrival1;
    if (next_arrival_[1] < best) {
      best = next_arrival_[1];
      kind = EventKind::Arrival2;
    }
    if (service_done_ && *service_done_ < best) {
      best = *service_done_;
      kind = EventKind::Departure;
    }
    if (switch_done_ && *switch_done_ < best) {
      best = *switch_done_;
      kind = EventKind::SwitchDone;
    }
    return best;
  }

  void advance_to(double t) {
    const double dt = t - now_;
    if (dt < 0) throw std::logic_error("time went backwards");
    area_[0] += n_[0] * dt;
    area_[1] += n_[1] * dt;
    phase_time_[static_cast<int>(phase_)] += dt;
    if (!out_.window_area.empty()) accumulate_windows(t);
    now_ = t;
  }

  void accumulate_windows(double t) {
    double from = now_;
    while (from < t && window_idx_ < kWindowCount) {
      const double boundary = out_.window_len * (window_idx_ + 1);
      const double to = std::min(t, boundary);
      out_.window_area[window_idx_][0] += n_[0] * (to - from);
      out_.window_area[window_idx_][1] += n_[1] * (to - from);
      if (to >= boundary) ++window_idx_;
      from = to;
    }
  }

  void dispatch(EventKind kind) {
    switch (kind) {
      case EventKind::Arrival1: on_arrival(0); break;
      case EventKind::Arrival2: on_arrival(1); break;
      case EventKind::Departure: on_departure(); break;
      case EventKind::SwitchDone: on_switch_done(); break;
    }
  }

  void on_arrival(int q) {
    if (cfg_.buffer_cap && n_[q] >= *cfg_.buffer_cap) {
      ++out_.dropped[q];
    } else {
      ++n_[q];
      ++out_.arrivals[q];
    }
    next_arrival_[q] = now_ + draw_interarrival(q);
    resolve_and_fix_service();
  }

  void on_departure() {
    if (!is_visit(phase_)) {
      ++out_.offvisit_departures;  // must never happen
      service_done_.reset();
      return;
    }
    const int q = phase_queue(phase_);
    --n_[q];
    ++out_.departures[q];
    service_done_.reset();
    resolve_and_fix_service();
  }

  void on_switch_done() {
    const int from = phase_queue(phase_);
    switch_done_.reset();
    set_phase(next_phase(phase_));  // arrive at the other queue's beginning phase
    if (from == 1) {
      close_cycle();
      if (cfg_.horizon.kind == Horizon::Kind::Cycles && out_.cycles >= cfg_.horizon.cycles) {
        out_.final_n = n_;
        return;  // stop exactly at the cycle boundary
      }
      begin_cycle();
    }
    resolve_and_fix_service();
  }

  // Cascades the phase predicates at the current epoch, applying side effects:
  // duration bookkeeping, preemption at a switch, switchover draws, and
  // (re)starting service when the server faces a non-empty queue. Both steps
  // can fire at one epoch, giving a zero-length concluding phase.
  void resolve_and_fix_service() {
    if (phase_ == ServerPhase::Visit1B || phase_ == ServerPhase::Visit2B) {
      const int q = phase_queue(phase_);
      if (beginning_over(cfg_.policy, QueueIndex(q + 1), double(n_[q]), double(n_[1 - q]), cfg_.mu)) {
        cycle_.b[q] = now_ - phase_start_;
        set_phase(next_phase(phase_));
      }
    }
    if (phase_ == ServerPhase::Visit1C || phase_ == ServerPhase::Visit2C) {
      const int q = phase_queue(phase_);
      if (switch_now(cfg_.policy, QueueIndex(q + 1), double(n_[q]), double(n_[1 - q]), cfg_.mu)) {
        cycle_.c[q] = now_ - phase_start_;
        cycle_.m[q] = cycle_.b[q] + cycle_.c[q];
        cycle_.h[q] = pi_value(cfg_.policy, PhaseKind::Concluding, QueueIndex(q + 1),
                               double(n_[q]), double(n_[1 - q]), cfg_.mu);
        service_done_.reset();  // non-resume preemption: the job stays queued
        const double sw = sample(cfg_.switchover[q], switch_rng_[q]);
        cycle_.s[q] = sw;
        set_phase(next_phase(phase_));
        switch_done_ = now_ + sw;
      }
    }
    if (is_visit(phase_)) {
      const int q = phase_queue(phase_);
      if (n_[q] > 0 && !service_done_) service_done_ = now_ + sample(cfg_.service, service_rng_);
    }
  }

  void set_phase(ServerPhase next) {
    if (next != next_phase(phase_)) ++out_.phase_order_violations;
    phase_ = next;
    phase_start_ = now_;
  }

  void begin_cycle() {
    cycle_ = PalmRecord{};
    cycle_.k = out_.cycles;
    cycle_.phi = now_;
    cycle_.theta = {n_[0] / cfg_.mu, n_[1] / cfg_.mu};
    cycle_area_start_ = area_;
    if (n_ == out_.reference) mark_regeneration();
  }

  void close_cycle() {
    cycle_.psi = now_ - cycle_.phi;
    out_.palm.push_back(cycle_);
    out_.cycle_area.push_back({area_[0] - cycle_area_start_[0], area_[1] - cycle_area_start_[1]});
    ++out_.cycles;
  }

  void mark_regeneration() {
    if (has_regen_mark_)
      out_.regen.push_back(
          {now_ - regen_start_t_, {area_[0] - regen_start_area_[0], area_[1] - regen_start_area_[1]}});
    has_regen_mark_ = true;
    regen_start_t_ = now_;
    regen_start_area_ = area_;
  }

  void finalize() {
    out_.mu = cfg_.mu;
    out_.horizon = now_;
    out_.final_n = n_;
    if (now_ > 0.0) {
      out_.time_avg_n = {area_[0] / now_, area_[1] / now_};
      for (int i = 0; i < kPhaseCount; ++i) out_.phase_time_fractions[i] = phase_time_[i] / now_;
    }
  }

  SystemConfig cfg_;
  std::array<double, 2> lambda_{};
  std::array<RngStream, 2> arrival_rng_;
  RngStream service_rng_;
  std::array<RngStream, 2> switch_rng_;

  double now_ = 0.0;
  std::array<long, 2> n_{};
  ServerPhase phase_ = ServerPhase::Visit1B;
  double phase_start_ = 0.0;
  std::array<double, 2> next_arrival_{kInfTime, kInfTime};
  std::optional<double> service_done_;
  std::optional<double> switch_done_;

  std::array<double, 2> area_{};
  std::array<double, kPhaseCount> phase_time_{};
  int window_idx_ = 0;

  PalmRecord cycle_;
  std::array<double, 2> cycle_area_start_{};
  bool has_regen_mark_ = false;
  double regen_start_t_ = 0.0;
  std::array<double, 2> regen_start_area_{};

  SimOutput out_;
};

}  // namespace detail

inline SimOutput run(const SystemConfig& cfg) { return detail::Simulator(cfg).run(); }

}  // namespace polling
