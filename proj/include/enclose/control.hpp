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

// Per-agent control laws for unicycles enclosing a moving target.
//
// The virtual input u_i is the velocity a single integrator would apply; the
// unicycle realises it through a linear velocity v_i = |u_i| / cos(e_theta)
// and an angular velocity w_i from a heading barrier that keeps
// |e_theta| < e_bar < pi/2.
//
// evaluate_controls() runs the whole pipeline for one frozen world snapshot:
//   1. edge errors and transforms from positions
//   2. u for all agents
//   3. theta_d, e_theta, v
//   4. realised planar velocities from (v, theta)
//   5. eta_dot, zeta_dot, sigma_dot, then u_dot
//   6. theta_d_dot, then w

#ifndef ENCLOSE_CONTROL_HPP
#define ENCLOSE_CONTROL_HPP

#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include <fmt/format.h>

#include "enclose/errors.hpp"
#include "enclose/formation.hpp"
#include "enclose/rigidity.hpp"
#include "enclose/transform.hpp"

namespace enclose {

/// |u| at or below this is treated as zero for the heading branch.
inline constexpr double kZeroVirtualInput = 1e-9;
/// Distance to pi/2 at which the linear velocity law refuses to evaluate.
inline constexpr double kSingularityGuard = 1e-9;

struct ControlGains {
  std::vector<double> k_edge;       ///< per canonical edge
  std::vector<double> k_h1;         ///< per agent
  std::vector<double> k_h2;         ///< per agent
  std::vector<double> e_theta_bar;  ///< per agent, radians

  void validate(int n_agents) const {
    const auto n = static_cast<std::size_t>(n_agents);
    if (k_edge.size() != 2 * n - 1 || k_h1.size() != n || k_h2.size() != n ||
        e_theta_bar.size() != n) {
      throw DimensionMismatch("control gains do not match the number of agents / edges");
    }
    for (double k : k_edge) {
      if (!(k > 0.0)) throw InvalidParameter(fmt::format("edge gain must be positive, got {}", k));
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (!(k_h1[i] > 0.0) || !(k_h2[i] > 0.0)) {
        throw InvalidParameter(fmt::format("angular gains of agent {} must be positive, got {} / {}",
                                           i + 1, k_h1[i], k_h2[i]));
      }
      if (!(e_theta_bar[i] > 0.0) || !(e_theta_bar[i] < std::numbers::pi / 2.0)) {
        throw InvalidParameter(fmt::format("heading bound of agent {} must be in (0, 90) deg, got {}",
                                           i + 1, rad_to_deg(e_theta_bar[i])));
      }
    }
  }
};

/// Wraps to (-pi, pi].
inline double wrap_angle(double a) {
  double r = std::remainder(a, 2.0 * std::numbers::pi);
  if (r <= -std::numbers::pi) r += 2.0 * std::numbers::pi;
  return r;
}

/// u_i = -sum_{j} p_ij zeta_ij k_ij sigma_ij + v0 over the chain neighbours
/// and the target. Returns one vector per agent (agent i at index i-1).
inline std::vector<Vec2> virtual_input(std::span<const Vec2> coords, const SensingGraph& graph,
                                       std::span<const double> zeta, std::span<const double> sigma,
                                       std::span<const double> k_edge, const Vec2& v0) {
  detail::check_coordinates(coords, graph);
  std::vector<Vec2> u(graph.n_agents(), v0);
  for (int k = 0; k < graph.n_edges(); ++k) {
    const Edge& e = graph.edge(k);
    const Vec2 term = (coords[e.i] - coords[e.j]) * (zeta[k] * k_edge[k] * sigma[k]);
    u[e.i - 1] -= term;
    if (!e.radial()) u[e.j - 1] += term;  // p_ji = -p_ij
  }
  return u;
}

inline double desired_heading(const Vec2& u, double eps = kZeroVirtualInput) {
  if (u.norm() <= eps) return 0.0;
  return std::atan2(u.y(), u.x());
}

inline double heading_error(double theta, double theta_d) { return wrap_angle(theta - theta_d); }

inline double linear_velocity(const Vec2& u, double e_theta, int agent = -1) {
  if (!(std::abs(e_theta) < std::numbers::pi / 2.0 - kSingularityGuard)) {
    throw SingularityGuard(agent, fmt::format("agent {}: heading error {:.6f} rad reaches pi/2",
                                              agent, e_theta));
  }
  return u.norm() / std::cos(e_theta);
}

/// d/dt atan2(u_y, u_x) = u^T [[0,1],[-1,0]] u_dot / |u|^2; zero when u ~ 0.
inline double theta_d_dot(const Vec2& u, const Vec2& u_dot, double eps = kZeroVirtualInput) {
  const double n2 = u.squaredNorm();
  if (std::sqrt(n2) <= eps) return 0.0;
  return (u.x() * u_dot.y() - u.y() * u_dot.x()) / n2;
}

/// Chain rule over the virtual input. `velocities` is vertex indexed like
/// `coords`, with the target velocity v0 at index 0.
inline std::vector<Vec2> u_dot(std::span<const Vec2> coords, std::span<const Vec2> velocities,
                               const SensingGraph& graph, std::span<const double> zeta,
                               std::span<const double> zeta_dot, std::span<const double> sigma,
                               std::span<const double> sigma_dot, std::span<const double> k_edge,
                               const Vec2& v0_dot) {
  detail::check_coordinates(coords, graph);
  detail::check_coordinates(velocities, graph);
  std::vector<Vec2> out(graph.n_agents(), v0_dot);
  for (int k = 0; k < graph.n_edges(); ++k) {
    const Edge& e = graph.edge(k);
    const Vec2 p = coords[e.i] - coords[e.j];
    const Vec2 pd = velocities[e.i] - velocities[e.j];
    const Vec2 term = k_edge[k] * (pd * (zeta[k] * sigma[k]) + p * (zeta_dot[k] * sigma[k]) +
                                   p * (zeta[k] * sigma_dot[k]));
    out[e.i - 1] -= term;
    if (!e.radial()) out[e.j - 1] += term;
  }
  return out;
}

/// w = -k1 e_bar^2 sigma - k2 ((e_bar^2 - e^2)/e_bar^2)^2 sign(sigma)|sigma|^(1/2) + theta_d_dot.
inline double angular_velocity(double e_theta, double e_theta_bar, double k_h1, double k_h2,
                               double theta_d_dot_value) {
  const HeadingTransform s = sigma_theta(e_theta, e_theta_bar);
  const double b2 = e_theta_bar * e_theta_bar;
  const double shrink = (b2 - e_theta * e_theta) / b2;
  const double root = std::copysign(std::sqrt(std::abs(s.value)), s.value);
  return -k_h1 * b2 * s.value - k_h2 * shrink * shrink * root + theta_d_dot_value;
}

/// Fixed-time settling bound of the heading loop: 1/(4 k1) + 4/(2^(3/4) k2).
inline double settling_time_bound(double k_h1, double k_h2) {
  return 1.0 / (4.0 * k_h1) + 4.0 / (std::pow(2.0, 0.75) * k_h2);
}

/// Everything the closed loop needs to evaluate one control snapshot.
struct ControlContext {
  const SensingGraph& graph;
  const ConstraintEnvelope& envelope;
  std::span<const PerformanceFunction> perf;
  const ControlGains& gains;
};

/// All intermediate quantities of one control evaluation.
struct ControlSnapshot {
  double t = 0.0;
  Vec2 v0 = Vec2::Zero();
  Vec2 v0_dot = Vec2::Zero();

  EdgeErrors errors;
  std::vector<double> beta, beta_dot, sigma, zeta, eta_dot, zeta_dot, sigma_dot;

  std::vector<Vec2> u, u_dot, velocity;
  std::vector<double> theta_d, e_theta, sigma_theta, v, w, theta_d_dot;
};

/// `coords` is vertex indexed (target at 0); `headings` has one entry per
/// agent. Throws OutOfBarrier (with the edge or agent index) or
/// SingularityGuard when the state is outside the admissible set.
inline ControlSnapshot evaluate_controls(const ControlContext& ctx, std::span<const Vec2> coords,
                                         std::span<const double> headings, double t,
                                         const Vec2& v0, const Vec2& v0_dot) {
  const SensingGraph& g = ctx.graph;
  const int n = g.n_agents();
  const int m = g.n_edges();
  if (static_cast<int>(headings.size()) != n) {
    throw DimensionMismatch(fmt::format("expected {} headings, got {}", n, headings.size()));
  }

  ControlSnapshot s;
  s.t = t;
  s.v0 = v0;
  s.v0_dot = v0_dot;

  // 1. edge errors and transforms
  s.errors = edge_errors(coords, g, ctx.envelope, ctx.perf, t);
  s.beta.resize(m);
  s.beta_dot.resize(m);
  s.sigma.resize(m);
  s.zeta.resize(m);
  for (int k = 0; k < m; ++k) {
    const BetaValue b = beta(ctx.perf[k], t);
    s.beta[k] = b.value;
    s.beta_dot[k] = b.rate;
    const XiBounds bounds = ctx.envelope[k].xi_bounds();
    try {
      s.sigma[k] = sigma_edge(s.errors.xi[k], bounds);
    } catch (const OutOfBarrier& ex) {
      throw OutOfBarrier(OutOfBarrier::Kind::kEdge, k,
                         fmt::format("edge {} at t = {:.6f}: {}", g.edge_label(k), t, ex.what()));
    }
    s.zeta[k] = zeta_edge(s.errors.xi[k], bounds, b.value);
  }

  // 2. virtual inputs
  s.u = virtual_input(coords, g, s.zeta, s.sigma, ctx.gains.k_edge, v0);

  // 3. heading and linear velocity; 4. realised velocities
  s.theta_d.resize(n);
  s.e_theta.resize(n);
  s.sigma_theta.resize(n);
  s.v.resize(n);
  s.velocity.resize(n);
  std::vector<Vec2> vertex_velocity(n + 1);
  vertex_velocity[0] = v0;
  for (int i = 0; i < n; ++i) {
    s.theta_d[i] = desired_heading(s.u[i]);
    s.e_theta[i] = heading_error(headings[i], s.theta_d[i]);
    try {
      s.sigma_theta[i] = sigma_theta(s.e_theta[i], ctx.gains.e_theta_bar[i]).value;
    } catch (const OutOfBarrier& ex) {
      throw OutOfBarrier(OutOfBarrier::Kind::kHeading, i,
                         fmt::format("agent {} at t = {:.6f}: {}", i + 1, t, ex.what()));
    }
    s.v[i] = linear_velocity(s.u[i], s.e_theta[i], i + 1);
    s.velocity[i] = s.v[i] * Vec2(std::cos(headings[i]), std::sin(headings[i]));
    vertex_velocity[i + 1] = s.velocity[i];
  }

  // 5. transformed-error rates and u_dot
  s.eta_dot.resize(m);
  s.zeta_dot.resize(m);
  s.sigma_dot.resize(m);
  for (int k = 0; k < m; ++k) {
    const Edge& e = g.edge(k);
    const Vec2 p = coords[e.i] - coords[e.j];
    s.eta_dot[k] = 2.0 * p.dot(vertex_velocity[e.i] - vertex_velocity[e.j]);
    const double xi = s.errors.xi[k];
    s.zeta_dot[k] =
        zeta_dot_edge(xi, ctx.envelope[k].xi_bounds(), s.beta[k], s.beta_dot[k], s.eta_dot[k]);
    s.sigma_dot[k] = sigma_dot_edge(s.zeta[k], s.eta_dot[k], s.beta_dot[k], xi);
  }
  s.u_dot = u_dot(coords, vertex_velocity, g, s.zeta, s.zeta_dot, s.sigma, s.sigma_dot,
                  ctx.gains.k_edge, v0_dot);

  // 6. desired-heading rate and angular velocity
  s.theta_d_dot.resize(n);
  s.w.resize(n);
  for (int i = 0; i < n; ++i) {
    s.theta_d_dot[i] = theta_d_dot(s.u[i], s.u_dot[i]);
    s.w[i] = angular_velocity(s.e_theta[i], ctx.gains.e_theta_bar[i], ctx.gains.k_h1[i],
                              ctx.gains.k_h2[i], s.theta_d_dot[i]);
  }
  return s;
}

}  // namespace enclose

#endif  // ENCLOSE_CONTROL_HPP
