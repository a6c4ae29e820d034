// Copyright 2026 The enclose Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Prescribed performance functions and the barrier transforms used by the
// distance and heading controllers.
//
// Distance edges work on xi = eta / beta(t) inside (-xi_lower, xi_upper):
//
//   sigma(xi) = xi_u xi_l xi / ((xi_u - xi)(xi_l + xi))
//   zeta      = (d sigma / d xi) / beta
//
// Heading errors work on e inside (-e_bar, e_bar):
//
//   sigma_theta(e) = e_bar^2 e / (e_bar^2 - e^2)

#ifndef ENCLOSE_TRANSFORM_HPP
#define ENCLOSE_TRANSFORM_HPP

#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "enclose/errors.hpp"

namespace enclose {

/// beta(t) = (beta0 - beta_inf) exp(-gamma t) + beta_inf.
struct PerformanceFunction {
  double beta0 = 1.0;
  double beta_inf = 0.15;
  double gamma = 0.1;

  void validate() const {
    if (!(beta_inf > 0.0) || !(beta0 > beta_inf) || !(gamma > 0.0) || !std::isfinite(beta0) ||
        !std::isfinite(gamma)) {
      throw InvalidParameter(fmt::format(
          "performance function needs beta0 > beta_inf > 0 and gamma > 0, got ({}, {}, {})", beta0,
          beta_inf, gamma));
    }
  }

  friend bool operator==(const PerformanceFunction&, const PerformanceFunction&) = default;
};

struct BetaValue {
  double value;
  double rate;
};

inline BetaValue beta(const PerformanceFunction& p, double t) {
  const double decay = (p.beta0 - p.beta_inf) * std::exp(-p.gamma * t);
  return {decay + p.beta_inf, -p.gamma * decay};
}

/// Constant bounds on xi; both entries are positive magnitudes.
struct XiBounds {
  double lower;
  double upper;
};

/// Relative width of the band treated as "on the barrier".
inline constexpr double kBarrierGuard = 1e-12;

namespace detail {

inline void require_interior(double xi, const XiBounds& b) {
  if (!(xi < b.upper * (1.0 - kBarrierGuard)) || !(xi > -b.lower * (1.0 - kBarrierGuard))) {
    throw OutOfBarrier(
        fmt::format("xi = {:.17g} is not inside (-{:.17g}, {:.17g})", xi, b.lower, b.upper));
  }
}

/// d sigma / d xi.
inline double sigma_slope(double xi, const XiBounds& b) {
  const double u = b.upper;
  const double l = b.lower;
  const double du = u - xi;
  const double dl = l + xi;
  return u * l * (u * l + xi * xi) / (du * du * dl * dl);
}

}  // namespace detail

inline double sigma_edge(double xi, const XiBounds& b) {
  detail::require_interior(xi, b);
  return b.upper * b.lower * xi / ((b.upper - xi) * (b.lower + xi));
}

inline double zeta_edge(double xi, const XiBounds& b, double beta_t) {
  detail::require_interior(xi, b);
  return detail::sigma_slope(xi, b) / beta_t;
}

/// Auxiliary coefficient zeta-bar = d^2 sigma / d xi^2.
inline double zeta_bar_edge(double xi, const XiBounds& b) {
  detail::require_interior(xi, b);
  const double u = b.upper;
  const double l = b.lower;
  const double num = 2.0 * u * l * xi * xi * xi + 6.0 * u * u * l * l * xi - 2.0 * u * u * u * l * l +
                     2.0 * u * u * l * l * l;
  const double du = u - xi;
  const double dl = l + xi;
  return num / (du * du * du * dl * dl * dl);
}

/// zeta-dot = (zeta_bar (eta_dot - beta_dot xi) - zeta beta beta_dot) / beta^2.
inline double zeta_dot_edge(double xi, const XiBounds& b, double beta_t, double beta_dot,
                            double eta_dot) {
  const double zeta = zeta_edge(xi, b, beta_t);
  const double zbar = zeta_bar_edge(xi, b);
  return (zbar * (eta_dot - beta_dot * xi) - zeta * beta_t * beta_dot) / (beta_t * beta_t);
}

inline double sigma_dot_edge(double zeta, double eta_dot, double beta_dot, double xi) {
  return zeta * (eta_dot - beta_dot * xi);
}

struct HeadingTransform {
  double value;  ///< sigma_theta
  double slope;  ///< d sigma_theta / d e_theta
};

inline HeadingTransform sigma_theta(double e_theta, double e_theta_bar) {
  if (!(e_theta_bar > 0.0) || !(e_theta_bar < std::numbers::pi / 2.0)) {
    throw InvalidParameter(fmt::format("heading bound must be in (0, pi/2), got {}", e_theta_bar));
  }
  if (!(std::abs(e_theta) < e_theta_bar * (1.0 - kBarrierGuard))) {
    throw OutOfBarrier(OutOfBarrier::Kind::kHeading, -1,
                       fmt::format("heading error {:.6f} rad is not inside (-{:.6f}, {:.6f})",
                                   e_theta, e_theta_bar, e_theta_bar));
  }
  const double b2 = e_theta_bar * e_theta_bar;
  const double e2 = e_theta * e_theta;
  const double gap = b2 - e2;
  return {b2 * e_theta / gap, (b2 * b2 + b2 * e2) / (gap * gap)};
}

}  // namespace enclose

#endif  // ENCLOSE_TRANSFORM_HPP
