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

// Reference scenarios and seeded random generators for sweeps and
// property tests.

#ifndef ENCLOSE_PRESETS_HPP
#define ENCLOSE_PRESETS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "enclose/control.hpp"
#include "enclose/formation.hpp"
#include "enclose/rigidity.hpp"
#include "enclose/sim.hpp"

namespace enclose {

/// Five unicycles enclosing a target moving with v0 = (1, 1.5 cos(0.1 t)).
/// Mirrors scenarios/paper_sec6.yaml.
inline Scenario paper_sec6_scenario() {
  Scenario s;
  s.name = "paper_sec6";
  s.formation = {5.0, {65.0, 75.0, 75.0, 80.0}};
  s.ranges.lower = {0.6, 0.6, 1.0, 1.0, 0.8, 0.8, 0.8, 0.8, 0.8};
  s.ranges.upper = {12.0, 15.0, 15.0, 12.0, 15.0, 15.0, 15.0, 15.0, 15.0};
  s.perf.assign(9, PerformanceFunction{1.0, 0.15, 0.1});
  s.k_edge.assign(9, 0.2);
  s.k_h1.assign(5, 0.5);
  s.k_h2.assign(5, 0.5);
  s.heading_bound_deg.assign(5, 50.0);
  s.mu = 3.0;
  s.initial_target = Vec2(1.9, 1.9);
  s.initial_agents = {{7.9, 1.3, 110.0},
                      {2.1, 4.4, 50.0},
                      {-6.5, 4.3, 300.0},
                      {-6.8, -5.4, 75.0},
                      {2.2, -7.0, 110.0}};
  s.target.model = TargetMotion::Model::kSineY;
  s.target.constant = Vec2(1.0, 0.0);
  s.target.amplitude = 1.5;
  s.target.frequency = 0.1;
  s.target.phase_deg = 0.0;
  s.speed_bound = 2.0;
  s.run = {50.0, 1e-3, 10, false};
  s.outputs.plots = true;
  return s;
}

/// Random separation angles c_12..c_{N-1,N} (degrees) whose implied closing
/// angle is also admissible. Every angle, including the closing one, lies in
/// [min_deg, 180 - min_deg].
inline std::vector<double> random_separation_angles(std::mt19937_64& rng, int n_agents,
                                                    double min_deg = 10.0) {
  std::uniform_real_distribution<double> weight(0.5, 1.5);
  if (n_agents == 2) {
    std::uniform_real_distribution<double> a(min_deg, 180.0 - min_deg);
    return {a(rng)};
  }
  for (;;) {
    std::vector<double> w(n_agents);
    double total = 0.0;
    for (double& x : w) total += (x = weight(rng));
    bool ok = true;
    for (double& x : w) {
      x *= 360.0 / total;
      ok = ok && x >= min_deg && x <= 180.0 - min_deg;
    }
    if (ok) return {w.begin(), w.end() - 1};
  }
}

/// Virtual inputs at t = 0 for a scenario whose headings are not yet known.
inline std::vector<Vec2> initial_virtual_inputs(const Scenario& s) {
  const DesiredFramework fw = henneberg_build(s.formation.radius, s.formation.separation_deg);
  const WorldState w0 = s.initial_world();
  const std::vector<Vec2> coords = w0.coordinates();
  const Eigen::VectorXd phi = edge_function(coords, fw.graph);
  const int m = fw.graph.n_edges();
  std::vector<double> e0(m), beta0(m);
  for (int k = 0; k < m; ++k) {
    e0[k] = std::sqrt(phi(k)) - fw.desired_distances[k];
    beta0[k] = s.perf[k].beta0;
  }
  const ConstraintEnvelope env = build_envelope(fw, s.ranges, e0, s.mu, beta0);
  const EdgeErrors err = edge_errors(coords, fw.graph, env, s.perf, 0.0);
  std::vector<double> sigma(m), zeta(m);
  for (int k = 0; k < m; ++k) {
    const double b = beta(s.perf[k], 0.0).value;
    sigma[k] = sigma_edge(err.xi[k], env[k].xi_bounds());
    zeta[k] = zeta_edge(err.xi[k], env[k].xi_bounds(), b);
  }
  return virtual_input(coords, fw.graph, zeta, sigma, s.k_edge, s.target.velocity(0.0));
}

struct RandomScenarioOptions {
  double duration = 30.0;
  double dt = 1e-3;
  int log_decimation = 10;
  double heading_bound_deg = 60.0;
  /// Initial heading errors are drawn from +-fraction * heading bound.
  double heading_fraction = 0.6;
  /// Agent displacement from the desired slot, as a fraction of the radius.
  double displacement = 0.25;
  /// dt is halved until stiffness * dt is at most this (RK4 limit ~2.78).
  double max_stiffness_dt = 1.5;
};

/// A seeded scenario that satisfies both initial-condition assumptions:
/// every edge starts inside its corridor and every heading error starts
/// inside its bound.
inline Scenario random_scenario(std::uint64_t seed, int n_agents,
                                const RandomScenarioOptions& opt = {}) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

  for (;;) {
    Scenario s;
    s.name = "random";
    s.seed = seed;
    s.formation.radius = uniform(3.0, 8.0);
    s.formation.separation_deg = random_separation_angles(rng, n_agents, 30.0);
    const DesiredFramework fw = henneberg_build(s.formation.radius, s.formation.separation_deg);
    const int m = fw.graph.n_edges();
    for (int k = 0; k < m; ++k) {
      s.ranges.lower.push_back(fw.desired_distances[k] * uniform(0.1, 0.3));
      s.ranges.upper.push_back(fw.desired_distances[k] * uniform(1.8, 2.5));
    }
    const PerformanceFunction perf{1.0, uniform(0.1, 0.3), uniform(0.05, 0.2)};
    s.perf.assign(m, perf);
    s.k_edge.assign(m, uniform(0.1, 0.4));
    s.k_h1.assign(n_agents, uniform(0.4, 1.0));
    s.k_h2.assign(n_agents, uniform(0.4, 1.0));
    s.heading_bound_deg.assign(n_agents, opt.heading_bound_deg);
    s.mu = uniform(0.3, 0.6) * s.formation.radius;

    if (unit(rng) < 0.5) {
      const double heading = uniform(-std::numbers::pi, std::numbers::pi);
      s.target.model = TargetMotion::Model::kConstant;
      s.target.constant = uniform(0.6, 1.2) * Vec2(std::cos(heading), std::sin(heading));
      s.speed_bound = s.target.constant.norm() + 0.5;
    } else {
      s.target.model = TargetMotion::Model::kSineY;
      s.target.constant = Vec2(uniform(0.8, 1.2), 0.0);
      s.target.amplitude = uniform(0.3, 1.0);
      s.target.frequency = uniform(0.05, 0.3);
      s.speed_bound = s.target.constant.norm() + s.target.amplitude + 0.5;
    }

    s.initial_target = Vec2(uniform(-5.0, 5.0), uniform(-5.0, 5.0));
    const double rot = uniform(-std::numbers::pi, std::numbers::pi);
    const Eigen::Rotation2Dd rotation(rot);
    for (int i = 1; i <= n_agents; ++i) {
      const double dir = uniform(-std::numbers::pi, std::numbers::pi);
      const Vec2 offset =
          uniform(0.0, opt.displacement) * s.formation.radius * Vec2(std::cos(dir), std::sin(dir));
      const Vec2 p = s.initial_target + rotation * fw.coordinates[i] + offset;
      s.initial_agents.push_back({p.x(), p.y(), 0.0});
    }
    s.run = {opt.duration, opt.dt, opt.log_decimation, false};
    const double lambda = edge_loop_stiffness(fw, s.k_edge, s.perf);
    while (lambda * s.run.dt > opt.max_stiffness_dt) {
      s.run.dt /= 2.0;
      s.run.log_decimation *= 2;
    }

    // Corridor check (second assumption); resample on failure.
    const std::vector<Vec2> coords = s.initial_world().coordinates();
    bool inside = true;
    for (int k = 0; k < m; ++k) {
      const Edge& e = fw.graph.edge(k);
      const double d = (coords[e.i] - coords[e.j]).norm();
      inside = inside && d > s.ranges.lower[k] && d < s.ranges.upper[k];
    }
    if (!inside) continue;

    const std::vector<Vec2> u0 = initial_virtual_inputs(s);
    for (int i = 0; i < n_agents; ++i) {
      const double spread = opt.heading_fraction * opt.heading_bound_deg;
      s.initial_agents[i].heading_deg =
          rad_to_deg(desired_heading(u0[i])) + uniform(-spread, spread);
    }
    return s;
  }
}

}  // namespace enclose

#endif  // ENCLOSE_PRESETS_HPP
