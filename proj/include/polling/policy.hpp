// Two-phase switching policies for a two-queue polling server.
//
// A policy is eight non-positive coefficients. While the server visits
// queue i, two affine functions of the queue occupancies control the visit:
//
//   beginning:  pi_B = alpha_i^B * n_i + n_j + mu * beta_i^B
//   concluding: pi_C = n_i + alpha_i^C * n_j + mu * beta_i^C
//
// The beginning phase lasts while pi_B < 0; the concluding phase lasts while
// pi_C > 0, and the server switches to the other queue as soon as pi_C <= 0.
// Both boundaries are inclusive: pi_B >= 0 ends B, pi_C <= 0 ends C.
// The beta coefficients are stored in normalized time units and scaled by mu
// at evaluation, so one parameter vector is comparable across service rates.

#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace polling {

enum class PhaseKind { Beginning, Concluding };

// Queue label, 1 or 2. array_index() gives the 0-based position used by
// the std::array fields throughout the library.
class QueueIndex {
 public:
  explicit constexpr QueueIndex(int value) : value_(value) {
    if (value != 1 && value != 2) throw std::invalid_argument("queue index must be 1 or 2");
  }
  static constexpr QueueIndex q1() { return QueueIndex(1); }
  static constexpr QueueIndex q2() { return QueueIndex(2); }
  constexpr int value() const { return value_; }
  constexpr int array_index() const { return value_ - 1; }
  constexpr QueueIndex opposite() const { return QueueIndex(3 - value_); }
  friend constexpr bool operator==(QueueIndex a, QueueIndex b) { return a.value_ == b.value_; }

 private:
  int value_;
};

// The eight switching coefficients. Index 0 belongs to queue 1, index 1 to
// queue 2. All-zero coefficients give the exhaustive policy.
struct PolicyParams {
  std::array<double, 2> alpha_b{0.0, 0.0};
  std::array<double, 2> beta_b{0.0, 0.0};
  std::array<double, 2> alpha_c{0.0, 0.0};
  std::array<double, 2> beta_c{0.0, 0.0};
};

inline const std::array<const char*, 8> kCoefficientNames = {
    "alpha1B", "alpha2B", "beta1B", "beta2B", "alpha1C", "alpha2C", "beta1C", "beta2C"};

inline std::array<double, 8> coefficient_values(const PolicyParams& p) {
  return {p.alpha_b[0], p.alpha_b[1], p.beta_b[0], p.beta_b[1],
          p.alpha_c[0], p.alpha_c[1], p.beta_c[0], p.beta_c[1]};
}

// Membership check for the policy class: every coefficient must be <= 0.
// Returns the names of offending coefficients; empty means valid.
inline std::vector<std::string> validate_params(const PolicyParams& p) {
  std::vector<std::string> violations;
  const auto values = coefficient_values(p);
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] <= 0.0) || std::isnan(values[i]))
      violations.push_back(std::string(kCoefficientNames[i]) + " = " + std::to_string(values[i]) +
                           " (must be <= 0)");
  }
  return violations;
}

// Stable sub-class condition on top of class membership.
inline bool stable_class_condition(const PolicyParams& p) {
  return p.alpha_c[0] * p.alpha_c[1] < 1.0;
}

inline double pi_value(const PolicyParams& p, PhaseKind phase, QueueIndex i, double n_i,
                       double n_j, double mu) {
  const int q = i.array_index();
  if (phase == PhaseKind::Beginning) return p.alpha_b[q] * n_i + n_j + mu * p.beta_b[q];
  return n_i + p.alpha_c[q] * n_j + mu * p.beta_c[q];
}

inline bool beginning_over(const PolicyParams& p, QueueIndex i, double n_i, double n_j,
                           double mu) {
  return pi_value(p, PhaseKind::Beginning, i, n_i, n_j, mu) >= 0.0;
}

inline bool switch_now(const PolicyParams& p, QueueIndex i, double n_i, double n_j, double mu) {
  return pi_value(p, PhaseKind::Concluding, i, n_i, n_j, mu) <= 0.0;
}

// Priority-factor policy: switch away from queue i once n_j > alpha_i * n_i,
// i.e. alpha_i^C = -1/alpha_i with all other coefficients zero.
inline PolicyParams priority_factor_policy(double alpha1, double alpha2) {
  if (!(alpha1 > 0.0) || !(alpha2 > 0.0))
    throw std::invalid_argument("priority factors must be positive");
  PolicyParams p;
  p.alpha_c = {-1.0 / alpha1, -1.0 / alpha2};
  return p;
}

// Exhaustive service at one queue, priority factor alpha at the other.
// The product alpha1C*alpha2C is zero, so these are always in the stable class.
inline PolicyParams mixed_exhaustive_policy(QueueIndex exhaustive_side, double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("priority factor must be positive");
  PolicyParams p;
  p.alpha_c[exhaustive_side.opposite().array_index()] = -1.0 / alpha;
  return p;
}

// Threshold ("robust") policy. While the server visits queue i, the beginning
// phase ends once the opposite queue reaches mu*trigger_bj customers, and the
// server switches once the visited queue has drained to mu*drain_ci or fewer.
// Arguments are in normalized units; all alphas are zero.
inline PolicyParams robust_threshold_policy(double trigger_b1, double trigger_b2,
                                            double drain_c1, double drain_c2) {
  if (trigger_b1 < 0 || trigger_b2 < 0 || drain_c1 < 0 || drain_c2 < 0)
    throw std::invalid_argument("thresholds must be non-negative");
  PolicyParams p;
  p.beta_b = {-trigger_b2, -trigger_b1};  // while at Q_i the trigger watches Q_j
  p.beta_c = {-drain_c1, -drain_c2};
  return p;
}

inline PolicyParams exhaustive_policy() { return PolicyParams{}; }

}  // namespace polling
