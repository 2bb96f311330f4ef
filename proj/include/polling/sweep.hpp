// Policy-space exploration: sampling the stable policy class, Monte Carlo
// evaluation of per-queue stationary occupancies, non-dominated filtering,
// and the mixed-exhaustive frontier grid.

#pragma once

#include <array>
#include <atomic>
#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "polling/analysis.hpp"
#include "polling/config.hpp"
#include "polling/engine.hpp"
#include "polling/estimators.hpp"
#include "polling/policy.hpp"
#include "polling/stochastic.hpp"

namespace polling {

struct CoefficientRange {
  double lo = 0.0, hi = 0.0;  // lo <= hi <= 0
};

// Per-coefficient sampling ranges, mirroring PolicyParams.
struct PolicyBounds {
  std::array<CoefficientRange, 2> alpha_b{}, beta_b{}, alpha_c{}, beta_c{};

  // same range for every alpha and every beta coefficient
  static PolicyBounds uniform(double alpha_lo, double beta_lo) {
    PolicyBounds b;
    for (int q = 0; q < 2; ++q) {
      b.alpha_b[q] = {alpha_lo, 0.0};
      b.alpha_c[q] = {alpha_lo, 0.0};
      b.beta_b[q] = {beta_lo, 0.0};
      b.beta_c[q] = {beta_lo, 0.0};
    }
    return b;
  }
};

// Uniform per-coefficient sampling, rejection-sampled to the stable class
// condition alpha1C * alpha2C < 1. Deterministic given the seed.
inline std::vector<PolicyParams> sample_policies(int n, const PolicyBounds& bounds,
                                                 std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample_policies: n must be >= 1");
  auto check = [](const CoefficientRange& r, const char* name) {
    if (!(r.lo <= r.hi) || r.hi > 0.0)
      throw std::invalid_argument(std::string("sample_policies: bad range for ") + name);
  };
  for (int q = 0; q < 2; ++q) {
    check(bounds.alpha_b[q], "alphaB");
    check(bounds.beta_b[q], "betaB");
    check(bounds.alpha_c[q], "alphaC");
    check(bounds.beta_c[q], "betaC");
  }
  // the product is smallest at the upper ends; if even that is >= 1 the
  // stable region within the box is empty
  if (bounds.alpha_c[0].hi * bounds.alpha_c[1].hi >= 1.0)
    throw std::invalid_argument("sample_policies: bounds admit no stable policy");

  RngStream rng(seed, /*stream_id=*/0x5eedULL);
  auto draw = [&rng](const CoefficientRange& r) {
    return r.lo + (r.hi - r.lo) * rng.next_unit();
  };
  std::vector<PolicyParams> out;
  out.reserve(n);
  while (static_cast<int>(out.size()) < n) {
    PolicyParams p;
    for (int q = 0; q < 2; ++q) {
      p.alpha_b[q] = draw(bounds.alpha_b[q]);
      p.beta_b[q] = draw(bounds.beta_b[q]);
      p.alpha_c[q] = draw(bounds.alpha_c[q]);
      p.beta_c[q] = draw(bounds.beta_c[q]);
    }
    if (stable_class_condition(p)) out.push_back(p);
  }
  return out;
}

struct ParetoPoint {
  PolicyParams policy;
  std::array<double, 2> en{}, en_ci{};           // stationary E[N_i] with 95% half widths
  std::array<double, 2> palm_mean{}, palm_ci{};  // visit-epoch theta means
  std::optional<std::array<double, 2>> theta_star;
  bool dominated = false;
  std::string tag;  // "random-Ts" or "Ps-frontier"
};

// Runs a simple index-parallel loop; results must be written to disjoint slots.
inline void run_parallel(long n_tasks, const std::function<void(long)>& task) {
  const unsigned workers =
      std::min<unsigned>(std::max(1u, std::thread::hardware_concurrency()),
                         static_cast<unsigned>(n_tasks));
  if (workers <= 1) {
    for (long i = 0; i < n_tasks; ++i) task(i);
    return;
  }
  std::atomic<long> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (long i = next.fetch_add(1); i < n_tasks; i = next.fetch_add(1)) task(i);
    });
  for (auto& t : pool) t.join();
}

inline constexpr long kStreamsPerRun = 8;

// Monte Carlo evaluation of one policy: `replications` independent runs with
// replicate-indexed RNG streams, pooled into one estimate per queue. task_id
// keeps stream assignment deterministic under concurrent sweeps.
inline ParetoPoint evaluate_policy(const PolicyParams& p, const SystemConfig& base,
                                   int replications, long task_id = 0) {
  if (replications < 1) throw std::invalid_argument("evaluate_policy: replications must be >= 1");
  const auto verdict = is_stable(base.rates(), p);
  if (!verdict.stable) {
    std::string why;
    for (const auto& r : verdict.reasons) why += (why.empty() ? "" : ", ") + r;
    throw std::invalid_argument("evaluate_policy: policy not certified stable (" + why + ")");
  }

  ParetoPoint point;
  point.policy = p;
  const auto fp = theta_star(base.rates(), p);
  point.theta_star = fp.theta;

  std::vector<std::array<EstimateResult, 2>> en(replications), palm(replications);
  run_parallel(replications, [&](long r) {
    SystemConfig cfg = base;
    cfg.policy = p;
    cfg.stream_base = static_cast<std::uint64_t>((task_id * 1024 + r) * kStreamsPerRun);
    const SimOutput out = run(cfg);
    const long burn_in = out.cycles / 10;
    en[r] = time_average_estimate(out, burn_in);
    palm[r] = palm_mean_estimate(out, burn_in);
  });

  // pool independent replicates: mean of the estimates, root-mean CI
  auto pool = [&](const std::vector<std::array<EstimateResult, 2>>& reps, int q,
                  double& value, double& ci) {
    double sum = 0.0, ss = 0.0;
    for (const auto& rep : reps) {
      if (!rep[q].ok) throw std::runtime_error("evaluate_policy: " + rep[q].message);
      sum += rep[q].value;
      ss += rep[q].ci_halfwidth * rep[q].ci_halfwidth;
    }
    value = sum / replications;
    ci = std::sqrt(ss) / replications;
  };
  for (int q = 0; q < 2; ++q) {
    pool(en, q, point.en[q], point.en_ci[q]);
    pool(palm, q, point.palm_mean[q], point.palm_ci[q]);
  }
  return point;
}

// Marks a point dominated when some other point is strictly better on both
// queues by more than the joint confidence slack. Idempotent and independent
// of the input order.
inline void pareto_filter(std::vector<ParetoPoint>& points) {
  if (points.empty()) throw std::invalid_argument("pareto_filter: need at least one point");
  for (auto& p : points) {
    p.dominated = false;
    for (const auto& q : points) {
      if (&q == &p) continue;
      const bool better1 = q.en[0] + q.en_ci[0] < p.en[0] - p.en_ci[0];
      const bool better2 = q.en[1] + q.en_ci[1] < p.en[1] - p.en_ci[1];
      if (better1 && better2) {
        p.dominated = true;
        break;
      }
    }
  }
}

// Mixed-exhaustive frontier: exhaustive at one queue, concluding coefficient
// alpha_c at the other. alpha_c = 0 reproduces the pure exhaustive policy.
inline std::vector<ParetoPoint> frontier_grid(std::span<const double> alpha_c_values,
                                              bool both_sides, const SystemConfig& base,
                                              int replications, long task_id_base = 1 << 20) {
  for (double a : alpha_c_values)
    if (a > 0.0) throw std::invalid_argument("frontier_grid: alpha values must be <= 0");

  std::vector<PolicyParams> grid;
  for (double a : alpha_c_values) {
    PolicyParams p;  // exhaustive at Q1, alpha_c at Q2
    p.alpha_c[1] = a;
    grid.push_back(p);
  }
  if (both_sides)
    for (double a : alpha_c_values) {
      PolicyParams p;
      p.alpha_c[0] = a;
      grid.push_back(p);
    }

  std::vector<ParetoPoint> points(grid.size());
  run_parallel(static_cast<long>(grid.size()), [&](long i) {
    points[i] = evaluate_policy(grid[i], base, replications, task_id_base + i);
    points[i].tag = "Ps-frontier";
  });
  return points;
}

}  // namespace polling
