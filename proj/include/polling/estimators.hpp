// Steady-state estimators on simulator output: regenerative ratio estimates
// with confidence intervals, batch means for series where the regeneration
// reference is rarely hit, and visit-epoch mean estimation.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "polling/engine.hpp"

namespace polling {

struct EstimateResult {
  bool ok = false;
  double value = 0.0;
  double ci_halfwidth = 0.0;  // 95% half width
  long count = 0;             // batches or regeneration cycles used
  std::string message;
};

// Two-sided 97.5% Student-t quantile; between tabulated points the smaller
// df (wider interval) applies.
inline double student_t_975(long df) {
  static constexpr std::array<std::pair<long, double>, 37> table{{
      {1, 12.706}, {2, 4.303}, {3, 3.182}, {4, 2.776}, {5, 2.571}, {6, 2.447}, {7, 2.365},
      {8, 2.306}, {9, 2.262}, {10, 2.228}, {11, 2.201}, {12, 2.179}, {13, 2.160}, {14, 2.145},
      {15, 2.131}, {16, 2.120}, {17, 2.110}, {18, 2.101}, {19, 2.093}, {20, 2.086}, {21, 2.080},
      {22, 2.074}, {23, 2.069}, {24, 2.064}, {25, 2.060}, {26, 2.056}, {27, 2.052}, {28, 2.048},
      {29, 2.045}, {30, 2.042}, {40, 2.021}, {60, 2.000}, {80, 1.990}, {120, 1.980}, {240, 1.970},
      {1000, 1.962}, {100000, 1.960},
  }};
  if (df < 1) return table.front().second;
  double quantile = 1.960;
  for (auto it = table.rbegin(); it != table.rend(); ++it)
    if (df <= it->first) quantile = it->second;
  return quantile;
}

// Batch-means estimate of the mean of a (possibly autocorrelated) series:
// contiguous equal batches, t-interval over the batch means. The trailing
// remainder that does not fill a batch is dropped.
inline EstimateResult batch_means_estimate(std::span<const double> series, int n_batches) {
  EstimateResult r;
  if (n_batches < 2) {
    r.message = "need at least 2 batches";
    return r;
  }
  const long batch_size = static_cast<long>(series.size()) / n_batches;
  if (batch_size < 1) {
    r.message = "series shorter than the batch count";
    return r;
  }
  std::vector<double> means(n_batches);
  for (int b = 0; b < n_batches; ++b) {
    double sum = 0.0;
    for (long i = 0; i < batch_size; ++i) sum += series[b * batch_size + i];
    means[b] = sum / batch_size;
  }
  const double grand = std::accumulate(means.begin(), means.end(), 0.0) / n_batches;
  double ss = 0.0;
  for (double m : means) ss += (m - grand) * (m - grand);
  const double var = ss / (n_batches - 1);
  r.ok = true;
  r.value = grand;
  r.ci_halfwidth = student_t_975(n_batches - 1) * std::sqrt(var / n_batches);
  r.count = n_batches;
  return r;
}

struct PalmPoint {
  double theta1 = 0.0, theta2 = 0.0, psi = 0.0;
};

// Visit-epoch observations after discarding the first burn_in cycles.
inline std::vector<PalmPoint> palm_series(const SimOutput& out, long burn_in) {
  if (burn_in < 0 || burn_in >= static_cast<long>(out.palm.size()))
    throw std::invalid_argument("palm_series: burn-in must leave at least one cycle");
  std::vector<PalmPoint> series;
  series.reserve(out.palm.size() - burn_in);
  for (std::size_t k = burn_in; k < out.palm.size(); ++k)
    series.push_back({out.palm[k].theta[0], out.palm[k].theta[1], out.palm[k].psi});
  return series;
}

// Mean of the normalized visit-epoch state with batch-means confidence
// intervals (the series is autocorrelated across cycles).
inline std::array<EstimateResult, 2> palm_mean_estimate(const SimOutput& out, long burn_in,
                                                        int n_batches = 32) {
  const auto series = palm_series(out, burn_in);
  std::vector<double> t1(series.size()), t2(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) {
    t1[i] = series[i].theta1;
    t2[i] = series[i].theta2;
  }
  return {batch_means_estimate(t1, n_batches), batch_means_estimate(t2, n_batches)};
}

namespace detail {

// Classical regenerative ratio estimator E[area]/E[duration] with the
// delta-method variance of (Y - r*T) over i.i.d. cycles.
inline EstimateResult ratio_estimate(const std::vector<double>& area,
                                     const std::vector<double>& duration) {
  EstimateResult r;
  const long m = static_cast<long>(area.size());
  if (m < 2) {
    r.message = "need at least 2 cycles";
    return r;
  }
  const double total_t = std::accumulate(duration.begin(), duration.end(), 0.0);
  const double total_a = std::accumulate(area.begin(), area.end(), 0.0);
  if (!(total_t > 0.0)) {
    r.message = "degenerate cycles";
    return r;
  }
  const double ratio = total_a / total_t;
  const double mean_t = total_t / m;
  double ss = 0.0;
  for (long i = 0; i < m; ++i) {
    const double z = area[i] - ratio * duration[i];
    ss += z * z;
  }
  const double var = ss / (m - 1);
  r.ok = true;
  r.value = ratio;
  r.ci_halfwidth = student_t_975(m - 1) * std::sqrt(var / m) / mean_t;
  r.count = m;
  return r;
}

}  // namespace detail

inline constexpr long kMinRegenCycles = 30;

// Most frequent raw-count state at the visit epochs within a pilot prefix.
// Policies with opposite-queue triggers never return to an empty system, so
// the regeneration reference must be picked from states the chain does hit.
inline std::array<long, 2> modal_palm_state(const SimOutput& out, long pilot_cycles = 1000) {
  std::map<std::array<long, 2>, long> counts;
  const long limit = std::min<long>(pilot_cycles, static_cast<long>(out.palm.size()));
  for (long k = 0; k < limit; ++k) {
    const auto& rec = out.palm[k];
    ++counts[{std::lround(rec.theta[0] * out.mu), std::lround(rec.theta[1] * out.mu)}];
  }
  std::array<long, 2> best{0, 0};
  long best_count = -1;
  for (const auto& [state, count] : counts)
    if (count > best_count) {
      best = state;
      best_count = count;
    }
  return best;
}

// Stationary E[N_i] by the regenerative method. Cycle boundaries are the
// visit epochs to Q1 at which the raw counts equal the reference state; the
// segments between consecutive hits are i.i.d. cycles. Fails loudly when the
// reference is hit fewer than kMinRegenCycles times.
inline std::array<EstimateResult, 2> regenerative_estimate(const SimOutput& out,
                                                           std::array<long, 2> reference = {0, 0}) {
  std::vector<double> area1, area2, duration;
  bool open = false;
  double t0 = 0.0;
  std::array<double, 2> acc{0.0, 0.0};
  for (std::size_t k = 0; k < out.palm.size(); ++k) {
    const auto& rec = out.palm[k];
    const std::array<long, 2> counts{std::lround(rec.theta[0] * out.mu),
                                     std::lround(rec.theta[1] * out.mu)};
    if (counts == reference) {
      if (open) {
        duration.push_back(rec.phi - t0);
        area1.push_back(acc[0]);
        area2.push_back(acc[1]);
      }
      open = true;
      t0 = rec.phi;
      acc = {0.0, 0.0};
    }
    if (open) {
      acc[0] += out.cycle_area[k][0];
      acc[1] += out.cycle_area[k][1];
    }
  }
  std::array<EstimateResult, 2> result{detail::ratio_estimate(area1, duration),
                                       detail::ratio_estimate(area2, duration)};
  for (auto& r : result) {
    if (r.ok && r.count < kMinRegenCycles) {
      r.ok = false;
      r.message = "not enough regeneration cycles (" + std::to_string(r.count) + " < " +
                  std::to_string(kMinRegenCycles) + ")";
    }
  }
  return result;
}

// Time-average E[N_i] from visit-cycle batches: the palm cycles after burn-in
// are grouped into contiguous batches and the per-batch ratios
// (sum of areas / sum of durations) feed a t-interval. Works at any service
// rate, including regimes where the regeneration reference is rarely hit.
inline std::array<EstimateResult, 2> time_average_estimate(const SimOutput& out, long burn_in,
                                                           int n_batches = 32) {
  std::array<EstimateResult, 2> result;
  const long total = static_cast<long>(out.palm.size());
  if (burn_in < 0 || total - burn_in < n_batches) {
    for (auto& r : result) r.message = "not enough cycles after burn-in";
    return result;
  }
  const long usable = total - burn_in;
  const long batch_size = usable / n_batches;
  for (int q = 0; q < 2; ++q) {
    std::vector<double> ratios(n_batches);
    for (int b = 0; b < n_batches; ++b) {
      double a = 0.0, t = 0.0;
      for (long i = 0; i < batch_size; ++i) {
        const long k = burn_in + b * batch_size + i;
        a += out.cycle_area[k][q];
        t += out.palm[k].psi;
      }
      ratios[b] = t > 0.0 ? a / t : 0.0;
    }
    result[q] = batch_means_estimate(ratios, n_batches);
  }
  return result;
}

struct ValidationReport {
  std::array<double, 2> palm_mean{}, ci{}, theta{}, tolerance{};
  std::array<bool, 2> pass_queue{false, false};
  bool pass = false;
  long cycles = 0, burn_in = 0;
};

// Compares late-cycle visit-epoch means against a predicted fixed point at
// tolerance CI + 3/mu (the prediction carries an O(1/mu) residual).
inline ValidationReport validate_against(const SimOutput& out,
                                         const std::array<double, 2>& theta_expected, double mu,
                                         long burn_in, int n_batches = 32) {
  ValidationReport rep;
  rep.theta = theta_expected;
  rep.cycles = out.cycles;
  rep.burn_in = burn_in;
  const auto est = palm_mean_estimate(out, burn_in, n_batches);
  for (int q = 0; q < 2; ++q) {
    if (!est[q].ok) return rep;
    rep.palm_mean[q] = est[q].value;
    rep.ci[q] = est[q].ci_halfwidth;
    rep.tolerance[q] = est[q].ci_halfwidth + 3.0 / mu;
    rep.pass_queue[q] = std::abs(est[q].value - theta_expected[q]) <= rep.tolerance[q];
  }
  rep.pass = rep.pass_queue[0] && rep.pass_queue[1];
  return rep;
}

}  // namespace polling
