// Exact desk-scale references.
//
// For fully exponential service and switchovers, the polling system truncated
// to `cap` customers per queue (arrivals to a full queue are dropped) is a
// finite continuous-time Markov chain on states (n1, n2, phase). Zero-length
// visit phases never appear as states: every jump destination is passed
// through the same phase cascade the simulator uses, so a jump that triggers
// B-end or a switch lands directly in the resolved phase. The stationary
// distribution is solved with the GTH elimination (no subtractions, so no
// cancellation) on a banded matrix in lexicographic state order.
//
// The second reference is the M/G/1 multiple-vacations mean formula for the
// degenerate single-active-queue case, where a round trip away from Q1 plays
// the role of one vacation.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <queue>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "polling/config.hpp"
#include "polling/engine.hpp"

namespace polling {

struct CtmcState {
  long n1 = 0, n2 = 0;
  ServerPhase phase = ServerPhase::Visit1B;
  friend bool operator==(const CtmcState&, const CtmcState&) = default;
};

struct CtmcModel {
  long cap = 0;
  double mu = 0, lambda1 = 0, lambda2 = 0;
  std::array<double, 2> switch_rate{};
  PolicyParams policy;
  std::vector<CtmcState> states;  // reachable states, lexicographic order
  // off-diagonal generator rows; the diagonal is minus the row sum
  std::vector<std::vector<std::pair<int, double>>> rows;
  int bandwidth = 0;
};

namespace detail {

inline std::uint64_t ctmc_key(long n1, long n2, ServerPhase ph, long cap) {
  return (static_cast<std::uint64_t>(n1) * (cap + 1) + n2) * kPhaseCount +
         static_cast<std::uint64_t>(ph);
}

inline CtmcState resolved_state(long n1, long n2, ServerPhase ph, const PolicyParams& p,
                                double mu) {
  return {n1, n2, resolve_phases(ph, n1, n2, p, mu).phase};
}

// Iterative Tarjan; returns the component id per node, ids in reverse
// topological order of the component DAG.
inline std::vector<int> strongly_connected_components(
    const std::vector<std::vector<int>>& adjacency) {
  const int n = static_cast<int>(adjacency.size());
  std::vector<int> index(n, -1), low(n, 0), component(n, -1);
  std::vector<char> on_stack(n, 0);
  std::vector<int> stack;
  int next_index = 0, next_component = 0;

  struct Frame {
    int node;
    std::size_t edge;
  };
  std::vector<Frame> call;
  for (int root = 0; root < n; ++root) {
    if (index[root] != -1) continue;
    call.push_back({root, 0});
    while (!call.empty()) {
      auto& [node, edge] = call.back();
      if (edge == 0) {
        index[node] = low[node] = next_index++;
        stack.push_back(node);
        on_stack[node] = 1;
      }
      bool descended = false;
      while (edge < adjacency[node].size()) {
        const int next = adjacency[node][edge++];
        if (index[next] == -1) {
          call.push_back({next, 0});
          descended = true;
          break;
        }
        if (on_stack[next]) low[node] = std::min(low[node], index[next]);
      }
      if (descended) continue;
      if (low[node] == index[node]) {
        int member;
        do {
          member = stack.back();
          stack.pop_back();
          on_stack[member] = 0;
          component[member] = next_component;
        } while (member != node);
        ++next_component;
      }
      const int finished = node;
      call.pop_back();
      if (!call.empty()) low[call.back().node] = std::min(low[call.back().node], low[finished]);
    }
  }
  return component;
}

}  // namespace detail

// Builds the truncated chain reachable from the empty system with the server
// arriving at Q1. Requires exponential service and switchover distributions.
inline CtmcModel build_ctmc(const SystemConfig& cfg, long cap) {
  if (cap < 1) throw std::invalid_argument("oracle: buffer cap must be >= 1");
  if (cfg.service.kind != DistKind::Exponential ||
      cfg.switchover[0].kind != DistKind::Exponential ||
      cfg.switchover[1].kind != DistKind::Exponential)
    throw std::invalid_argument("oracle requires exponential service and switchover distributions");

  CtmcModel m;
  m.cap = cap;
  m.mu = cfg.mu;
  m.lambda1 = cfg.rho1 * cfg.mu;
  m.lambda2 = cfg.rho2 * cfg.mu;
  m.switch_rate = {1.0 / cfg.switchover[0].mean, 1.0 / cfg.switchover[1].mean};
  m.policy = cfg.policy;

  const auto start = detail::resolved_state(0, 0, ServerPhase::Visit1B, m.policy, m.mu);

  // enumerate jump destinations of a state
  auto destinations = [&](const CtmcState& s) {
    std::vector<std::pair<CtmcState, double>> dest;
    auto arrival = [&](int q, double rate) {
      if (rate <= 0.0) return;
      const long n1 = s.n1 + (q == 0 ? 1 : 0), n2 = s.n2 + (q == 1 ? 1 : 0);
      if ((q == 0 ? s.n1 : s.n2) >= cap) return;  // dropped arrival, no jump
      dest.emplace_back(detail::resolved_state(n1, n2, s.phase, m.policy, m.mu), rate);
    };
    arrival(0, m.lambda1);
    arrival(1, m.lambda2);
    if (is_visit(s.phase)) {
      const int q = phase_queue(s.phase);
      const long nq = q == 0 ? s.n1 : s.n2;
      if (nq > 0) {
        const long n1 = s.n1 - (q == 0 ? 1 : 0), n2 = s.n2 - (q == 1 ? 1 : 0);
        dest.emplace_back(detail::resolved_state(n1, n2, s.phase, m.policy, m.mu), m.mu);
      }
    } else {
      const int q = phase_queue(s.phase);
      dest.emplace_back(detail::resolved_state(s.n1, s.n2, next_phase(s.phase), m.policy, m.mu),
                        m.switch_rate[q]);
    }
    return dest;
  };

  // breadth-first reachability from the empty start
  std::unordered_map<std::uint64_t, int> seen;
  std::vector<CtmcState> found{start};
  seen.emplace(detail::ctmc_key(start.n1, start.n2, start.phase, cap), 0);
  for (std::size_t head = 0; head < found.size(); ++head) {
    const CtmcState s = found[head];
    for (const auto& [d, rate] : destinations(s)) {
      const auto key = detail::ctmc_key(d.n1, d.n2, d.phase, cap);
      if (seen.emplace(key, static_cast<int>(found.size())).second) found.push_back(d);
    }
  }

  // The stationary distribution lives on the closed communicating class;
  // trigger-type policies make the near-empty start states transient (once
  // the system fills, returns to Q1 always see work waiting), so keep only
  // the single sink class of the reachability graph.
  {
    std::vector<std::vector<int>> adjacency(found.size());
    for (std::size_t i = 0; i < found.size(); ++i)
      for (const auto& [d, rate] : destinations(found[i]))
        adjacency[i].push_back(seen.at(detail::ctmc_key(d.n1, d.n2, d.phase, cap)));
    const auto component = detail::strongly_connected_components(adjacency);
    const int n_components = *std::max_element(component.begin(), component.end()) + 1;
    std::vector<char> closed(n_components, 1);
    for (std::size_t i = 0; i < found.size(); ++i)
      for (int j : adjacency[i])
        if (component[i] != component[j]) closed[component[i]] = 0;
    int sink = -1;
    for (int c = 0; c < n_components; ++c)
      if (closed[c]) {
        if (sink >= 0) throw std::runtime_error("oracle: several closed classes, chain reducible");
        sink = c;
      }
    if (sink < 0) throw std::runtime_error("oracle: no closed class found");
    std::vector<CtmcState> recurrent;
    recurrent.reserve(found.size());
    for (std::size_t i = 0; i < found.size(); ++i)
      if (component[i] == sink) recurrent.push_back(found[i]);
    found = std::move(recurrent);
  }

  // lexicographic order keeps the generator banded
  std::sort(found.begin(), found.end(), [&](const CtmcState& a, const CtmcState& b) {
    return detail::ctmc_key(a.n1, a.n2, a.phase, cap) < detail::ctmc_key(b.n1, b.n2, b.phase, cap);
  });
  m.states = std::move(found);
  std::unordered_map<std::uint64_t, int> index;
  index.reserve(m.states.size() * 2);
  for (std::size_t i = 0; i < m.states.size(); ++i)
    index.emplace(detail::ctmc_key(m.states[i].n1, m.states[i].n2, m.states[i].phase, cap),
                  static_cast<int>(i));

  m.rows.resize(m.states.size());
  for (std::size_t i = 0; i < m.states.size(); ++i) {
    for (const auto& [d, rate] : destinations(m.states[i])) {
      const int j = index.at(detail::ctmc_key(d.n1, d.n2, d.phase, cap));
      if (j == static_cast<int>(i)) continue;  // collapsed self-jump carries no information
      m.rows[i].emplace_back(j, rate);
      m.bandwidth = std::max(m.bandwidth, std::abs(j - static_cast<int>(i)));
    }
    // merge duplicate destinations
    auto& row = m.rows[i];
    std::sort(row.begin(), row.end());
    std::size_t w = 0;
    for (std::size_t r = 0; r < row.size(); ++r) {
      if (w > 0 && row[w - 1].first == row[r].first) row[w - 1].second += row[r].second;
      else row[w++] = row[r];
    }
    row.resize(w);
  }
  return m;
}

// Stationary distribution by banded GTH elimination. All updates add
// non-negative products, so the result is non-negative and accurate to
// machine precision; the residual check below is the acceptance arbiter.
inline std::vector<double> stationary_distribution(const CtmcModel& m) {
  const int n = static_cast<int>(m.states.size());
  if (n == 0) throw std::runtime_error("oracle: empty model");
  if (n == 1) return {1.0};
  const int b = std::max(m.bandwidth, 1);
  const int width = 2 * b + 1;
  std::vector<double> a(static_cast<std::size_t>(n) * width, 0.0);
  auto at = [&](int i, int j) -> double& {
    return a[static_cast<std::size_t>(i) * width + (j - i + b)];
  };
  for (int i = 0; i < n; ++i)
    for (const auto& [j, rate] : m.rows[i]) at(i, j) += rate;

  for (int k = n - 1; k >= 1; --k) {
    double s = 0.0;
    const int lo = std::max(0, k - b);
    for (int j = lo; j < k; ++j) s += at(k, j);
    if (!(s > 0.0))
      throw std::runtime_error("oracle: chain is not irreducible on the reachable states");
    const int ilo = std::max(0, k - b);
    for (int i = ilo; i < k; ++i) {
      double& aik = at(i, k);
      if (aik == 0.0) continue;
      aik /= s;
      for (int j = lo; j < k; ++j) {
        const double akj = at(k, j);
        if (akj != 0.0 && j != i) at(i, j) += aik * akj;
      }
    }
  }

  std::vector<double> pi(n, 0.0);
  pi[0] = 1.0;
  double total = 1.0;
  for (int k = 1; k < n; ++k) {
    double v = 0.0;
    const int ilo = std::max(0, k - b);
    for (int i = ilo; i < k; ++i) v += pi[i] * at(i, k);
    pi[k] = v;
    total += v;
  }
  for (double& v : pi) v = std::max(v / total, 0.0);
  return pi;
}

// Infinity norm of pi * Q; the solve is rejected above 1e-10.
inline double generator_residual(const std::vector<double>& pi, const CtmcModel& m) {
  std::vector<double> r(pi.size(), 0.0);
  for (std::size_t i = 0; i < m.rows.size(); ++i) {
    double out_rate = 0.0;
    for (const auto& [j, rate] : m.rows[i]) {
      r[j] += pi[i] * rate;
      out_rate += rate;
    }
    r[i] -= pi[i] * out_rate;
  }
  double norm = 0.0;
  for (double v : r) norm = std::max(norm, std::abs(v));
  return norm;
}

inline std::array<double, 2> oracle_expected_lengths(const std::vector<double>& pi,
                                                     const CtmcModel& m) {
  std::array<double, 2> en{0.0, 0.0};
  for (std::size_t i = 0; i < pi.size(); ++i) {
    en[0] += pi[i] * m.states[i].n1;
    en[1] += pi[i] * m.states[i].n2;
  }
  return en;
}

// Probability mass on states where either queue sits at the truncation cap.
inline double boundary_mass(const std::vector<double>& pi, const CtmcModel& m) {
  double mass = 0.0;
  for (std::size_t i = 0; i < pi.size(); ++i)
    if (m.states[i].n1 >= m.cap || m.states[i].n2 >= m.cap) mass += pi[i];
  return mass;
}

// M/G/1 queue with multiple vacations: stationary mean number in system
//   E[N] = lambda * ( lambda E[B^2] / (2(1-rho)) + E[V^2]/(2 E[V]) + E[B] ),
// with V the vacation time. Here one vacation is the round trip away from
// the active queue, i.e. the sum of the two switchover draws.
inline double mg1_vacation_reference(double lambda, const DistributionSpec& service,
                                     const DistributionSpec& vacation_part1,
                                     const DistributionSpec& vacation_part2) {
  const auto [eb, eb2] = moments(service);
  const double rho = lambda * eb;
  if (!(lambda >= 0.0)) throw std::domain_error("vacation reference: lambda must be >= 0");
  if (!(rho < 1.0)) throw std::domain_error("vacation reference: lambda * E[B] must be < 1");
  const auto [v1, v1m2] = moments(vacation_part1);
  const auto [v2, v2m2] = moments(vacation_part2);
  const double ev = v1 + v2;
  const double ev2 = v1m2 + 2.0 * v1 * v2 + v2m2;
  return lambda * (lambda * eb2 / (2.0 * (1.0 - rho)) + ev2 / (2.0 * ev) + eb);
}

}  // namespace polling
