// Analytic toolkit for the polling system: Lyapunov value, conditional
// visit-time expectations at server-visit epochs, one-cycle drift, the
// stability test, and the 2x2 linear system whose solution theta* is the
// fixed point of the visit-epoch mean recursion.
//
// All expressions here drop the residual terms built from the concluding-
// function value at switching instants (the H terms). They are exactly zero
// for exhaustive-type policies and contribute O(1/mu) otherwise; predictions
// carry an explicit flag for the omission.

#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "polling/policy.hpp"

namespace polling {

struct SystemRates {
  double mu = 1.0;
  std::array<double, 2> rho{0.0, 0.0};
  std::array<double, 2> s{0.0, 0.0};  // mean switchover times, Q1->Q2 then Q2->Q1

  double lambda(int q) const { return rho[q] * mu; }
  double total_rho() const { return rho[0] + rho[1]; }
};

// eta_i = (1 - rho_i) - alpha_i^C * rho_j; positive whenever rho_i < 1 and
// the policy is in the class (alpha^C <= 0).
inline std::array<double, 2> etas(const SystemRates& r, const PolicyParams& p) {
  return {(1.0 - r.rho[0]) - p.alpha_c[0] * r.rho[1],
          (1.0 - r.rho[1]) - p.alpha_c[1] * r.rho[0]};
}

// V(x) = rho2 * theta1 + (1 - rho1) * theta2. Weighted so that the one-cycle
// drift depends only on the second visit time of the cycle.
inline double lyapunov(const std::array<double, 2>& x, const SystemRates& r) {
  return r.rho[1] * x[0] + (1.0 - r.rho[0]) * x[1];
}

// Conditional expected visit times (E[M1|x], E[M2|x]) for a cycle starting at
// normalized state x = (theta1, theta2), H terms omitted.
inline std::array<double, 2> expected_visit_times(const std::array<double, 2>& x,
                                                  const SystemRates& r, const PolicyParams& p) {
  const auto eta = etas(r, p);
  if (!(eta[0] > 0.0) || !(eta[1] > 0.0))
    throw std::domain_error("expected_visit_times: eta must be positive (rho_i < 1 required)");
  const double a1c = p.alpha_c[0], a2c = p.alpha_c[1];
  const double b1c = p.beta_c[0], b2c = p.beta_c[1];
  const double rho1 = r.rho[0], rho2 = r.rho[1];

  const double m1 = (x[0] + a1c * x[1] + b1c) / eta[0];
  const double m2 = ((1.0 - a1c * a2c) * ((1.0 - rho1) * x[1] + rho2 * x[0]) +
                     b1c * (rho2 + a2c * (rho1 - 1.0))) /
                        (eta[0] * eta[1]) +
                    ((rho2 + a2c * rho1) * r.s[0] + b2c) / eta[1];
  return {m1, m2};
}

struct DriftBreakdown {
  double e_m1 = 0.0;
  double e_m2 = 0.0;
  double delta_v = 0.0;
  bool h_terms_omitted = true;
};

// One-cycle mean drift of the Lyapunov function from state x:
// delta_v = (rho - 1) * E[M2|x] + rho2 * (s1 + s2).
inline DriftBreakdown drift(const std::array<double, 2>& x, const SystemRates& r,
                            const PolicyParams& p) {
  const auto m = expected_visit_times(x, r, p);
  DriftBreakdown d;
  d.e_m1 = m[0];
  d.e_m2 = m[1];
  d.delta_v = (r.total_rho() - 1.0) * m[1] + r.rho[1] * (r.s[0] + r.s[1]);
  return d;
}

struct Coefficients {
  double a11 = 0, a12 = 0, a21 = 0, a22 = 0, a13 = 0, a23 = 0;
  double d = 0;  // (1-rho1-rho2)(1-a1C*a2C) / (eta1*eta2)
};

// Coefficients of the visit-epoch mean recursion and of the fixed-point
// system a11*t1 + a12*t2 = a13, a21*t1 + a22*t2 = a23.
inline Coefficients coefficients(const SystemRates& r, const PolicyParams& p) {
  const auto eta = etas(r, p);
  const double ee = eta[0] * eta[1];
  if (ee == 0.0) throw std::domain_error("coefficients: eta1*eta2 must be nonzero");
  const double rho1 = r.rho[0], rho2 = r.rho[1];
  const double a1c = p.alpha_c[0], a2c = p.alpha_c[1];
  const double b1c = p.beta_c[0], b2c = p.beta_c[1];
  const double s1 = r.s[0], s2 = r.s[1];

  Coefficients c;
  c.a11 = ((rho1 + rho2 - 1.0) - (rho1 - 1.0) * rho1 * a2c - rho1 * rho2 * a1c * a2c) / ee;
  c.a12 = ((1.0 - rho1) * rho1 - (1.0 - rho1) * (1.0 - rho2) * a1c) / ee;
  c.a21 = (-rho1 * rho2 * a2c - (rho2 - 1.0) * rho2 * a1c * a2c) / ee;
  c.a22 = ((1.0 - rho1) * (rho2 - 1.0) + rho2 * (1.0 - rho2) * a1c -
           (rho1 + rho2 - 1.0) * a1c * a2c) /
          ee;
  c.a13 = (1.0 - rho1 - rho2) * b1c / ee - (rho1 * b2c + rho1 * s1) / eta[1] - rho1 * s2;
  c.a23 = a2c * (rho1 + rho2 - 1.0) * b1c / ee + ((1.0 - rho2) * b2c + rho1 * s1 * a2c) / eta[1] -
          rho2 * s2;
  c.d = (1.0 - rho1 - rho2) * (1.0 - a1c * a2c) / ee;
  return c;
}

// |d| below this is treated as singular and theta* reported undefined.
inline constexpr double kSingularTolerance = 1e-12;

struct FixedPoint {
  std::optional<std::array<double, 2>> theta;
  std::optional<double> psi;   // expected cycle length at theta*
  std::string reason;          // set when theta is undefined
  // relative imbalance of the closed-form identity the solution must satisfy
  double identity_residual = std::numeric_limits<double>::quiet_NaN();
};

// Both sides of the identity that the fixed point satisfies; used as an
// internal consistency check on the linear solve.
inline std::pair<double, double> fixed_point_identity(const SystemRates& r,
                                                      const PolicyParams& p,
                                                      const std::array<double, 2>& theta) {
  const auto eta = etas(r, p);
  const double ee = eta[0] * eta[1];
  const double rho1 = r.rho[0], rho2 = r.rho[1];
  const double a1c = p.alpha_c[0], a2c = p.alpha_c[1];
  const double lhs = (1.0 - rho1 - rho2) * (1.0 - a1c * a2c) *
                     ((1.0 - rho1) * theta[1] + rho2 * theta[0]) / ee;
  const double rhs = rho2 * (r.s[0] + r.s[1]) +
                     (rho1 + rho2 - 1.0) * ((rho2 + a2c * rho1) * r.s[0] + p.beta_c[1]) / eta[1] +
                     (rho1 + rho2 - 1.0) * p.beta_c[0] * (rho2 + a2c * (rho1 - 1.0)) / ee;
  return {lhs, rhs};
}

inline FixedPoint theta_star(const SystemRates& r, const PolicyParams& p) {
  FixedPoint fp;
  const auto c = coefficients(r, p);
  const double det = c.a11 * c.a22 - c.a12 * c.a21;
  if (std::abs(det) < kSingularTolerance || std::abs(c.d) < kSingularTolerance) {
    fp.reason = "singular mean-recursion system (rho1+rho2 = 1 or alpha1C*alpha2C = 1)";
    return fp;
  }
  const std::array<double, 2> theta = {(c.a13 * c.a22 - c.a12 * c.a23) / det,
                                       (c.a11 * c.a23 - c.a21 * c.a13) / det};
  fp.theta = theta;
  const auto m = expected_visit_times(theta, r, p);
  fp.psi = m[0] + m[1] + r.s[0] + r.s[1];
  const auto [lhs, rhs] = fixed_point_identity(r, p, theta);
  const double scale = std::max({std::abs(lhs), std::abs(rhs), 1e-30});
  fp.identity_residual = std::abs(lhs - rhs) / scale;
  return fp;
}

struct StabilityVerdict {
  bool stable = false;
  std::vector<std::string> reasons;  // violated conditions; empty when stable
};

// Sufficient condition only: rho1+rho2 < 1 and alpha1C*alpha2C < 1.
// stable=false means "not certified by this criterion", not proven unstable.
inline StabilityVerdict is_stable(const SystemRates& r, const PolicyParams& p) {
  StabilityVerdict v;
  if (!(r.total_rho() < 1.0)) v.reasons.push_back("load");
  if (!stable_class_condition(p)) v.reasons.push_back("alphaC-product");
  v.stable = v.reasons.empty();
  return v;
}

struct StabilityReport {
  std::array<double, 2> eta{};
  Coefficients coeffs;
  double det_d = 0;  // a11*a22 - a12*a21, equals coeffs.d analytically
  std::optional<std::array<double, 2>> theta_star;
  std::optional<double> psi_star;
  bool stable = false;
  std::vector<std::string> reasons;
};

inline StabilityReport stability_report(const SystemRates& r, const PolicyParams& p) {
  StabilityReport rep;
  rep.eta = etas(r, p);
  rep.coeffs = coefficients(r, p);
  rep.det_d = rep.coeffs.a11 * rep.coeffs.a22 - rep.coeffs.a12 * rep.coeffs.a21;
  const auto fp = theta_star(r, p);
  rep.theta_star = fp.theta;
  rep.psi_star = fp.psi;
  if (!fp.reason.empty()) rep.reasons.push_back(fp.reason);
  const auto verdict = is_stable(r, p);
  rep.stable = verdict.stable;
  for (const auto& reason : verdict.reasons) rep.reasons.push_back(reason);
  return rep;
}

// Matrix of the centered mean recursion m_{k+1} = A m_k.
inline std::array<std::array<double, 2>, 2> mean_recursion_matrix(const SystemRates& r,
                                                                  const PolicyParams& p) {
  const auto c = coefficients(r, p);
  return {{{1.0 + c.a11, c.a12}, {c.a21, 1.0 + c.a22}}};
}

inline double spectral_radius(const std::array<std::array<double, 2>, 2>& a) {
  const double tr = a[0][0] + a[1][1];
  const double det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
  const double disc = tr * tr - 4.0 * det;
  if (disc >= 0.0) {
    const double root = std::sqrt(disc);
    return std::max(std::abs((tr + root) / 2.0), std::abs((tr - root) / 2.0));
  }
  return std::sqrt(det);  // complex pair, |eig| = sqrt(det)
}

// Iterates the centered recursion from m0 = E[Theta_0] - theta*. Under the
// stability condition the trajectory contracts to (0,0).
inline std::vector<std::array<double, 2>> palm_mean_recursion(const std::array<double, 2>& m0,
                                                              const SystemRates& r,
                                                              const PolicyParams& p, int steps) {
  if (steps < 1) throw std::invalid_argument("palm_mean_recursion: steps must be >= 1");
  const auto a = mean_recursion_matrix(r, p);
  std::vector<std::array<double, 2>> trajectory;
  trajectory.reserve(static_cast<std::size_t>(steps) + 1);
  trajectory.push_back(m0);
  for (int k = 0; k < steps; ++k) {
    const auto& m = trajectory.back();
    trajectory.push_back({a[0][0] * m[0] + a[0][1] * m[1], a[1][0] * m[0] + a[1][1] * m[1]});
  }
  return trajectory;
}

}  // namespace polling
