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

// Feasibility of an enclosing pattern against per-edge distance corridors,
// synthesis of the error envelope, and per-edge error evaluation.

#ifndef ENCLOSE_FORMATION_HPP
#define ENCLOSE_FORMATION_HPP

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "enclose/errors.hpp"
#include "enclose/rigidity.hpp"
#include "enclose/transform.hpp"

namespace enclose {

/// Radius plus the N-1 free separation angles (degrees).
struct FormationSpec {
  double radius = 0.0;
  std::vector<double> separation_deg;

  int n_agents() const noexcept { return static_cast<int>(separation_deg.size()) + 1; }
  friend bool operator==(const FormationSpec&, const FormationSpec&) = default;
};

/// Collision threshold and interaction range per canonical edge.
struct DistanceRanges {
  std::vector<double> lower;
  std::vector<double> upper;

  friend bool operator==(const DistanceRanges&, const DistanceRanges&) = default;
};

struct FeasibilityViolation {
  enum class Kind { kRadius, kAngle, kLowerDistance, kUpperDistance, kShape };

  Kind kind;
  /// Edge id for distance violations; angle index (0-based, N-1 is the
  /// closing angle) for angle violations; -1 otherwise.
  int index;
  std::string bound;
  /// Signed distance to the violated bound; negative means violated.
  double margin;
};

struct FeasibilityReport {
  std::vector<FeasibilityViolation> violations;
  bool ok() const noexcept { return violations.empty(); }
};

inline FeasibilityReport check_feasibility(const FormationSpec& spec, const DistanceRanges& ranges) {
  using Kind = FeasibilityViolation::Kind;
  FeasibilityReport report;
  auto& v = report.violations;
  const int n = spec.n_agents();
  if (spec.separation_deg.empty()) {
    v.push_back({Kind::kShape, -1, "at least one separation angle is required", -1.0});
    return report;
  }
  if (!(spec.radius > 0.0)) v.push_back({Kind::kRadius, -1, "radius > 0", spec.radius});

  const double closing = closing_angle(spec.separation_deg);
  for (int k = 0; k < n; ++k) {
    if (k == n - 1 && n < 3) break;
    const double a = k < n - 1 ? spec.separation_deg[k] : closing;
    const double margin = std::min(a, 180.0 - a);
    if (!(margin > 0.0)) {
      const std::string name =
          k < n - 1 ? fmt::format("c_{}{}", k + 1, k + 2) : fmt::format("c_{}1", n);
      v.push_back({Kind::kAngle, k, fmt::format("0 < {} < 180 deg", name), margin});
    }
  }

  const SensingGraph graph(n);
  const auto m = static_cast<std::size_t>(graph.n_edges());
  if (ranges.lower.size() != m || ranges.upper.size() != m) {
    v.push_back({Kind::kShape, -1,
                 fmt::format("ranges must list {} edges, got {} lower / {} upper", m,
                             ranges.lower.size(), ranges.upper.size()),
                 -1.0});
    return report;
  }
  for (int k = 0; k < graph.n_edges(); ++k) {
    const Edge& e = graph.edge(k);
    const double d_star =
        e.radial() ? spec.radius : chord_length(spec.radius, spec.separation_deg[e.i - 1]);
    const double lo = ranges.lower[k];
    const double hi = ranges.upper[k];
    const std::string label = graph.edge_label(k);
    if (!(lo > 0.0)) {
      v.push_back({Kind::kLowerDistance, k, fmt::format("d_lower_{} > 0", label), lo});
    }
    if (!(d_star - lo > 0.0)) {
      v.push_back({Kind::kLowerDistance, k,
                   fmt::format("d_lower_{} < d*_{} ({} < {})", label, label, lo, d_star),
                   d_star - lo});
    }
    if (!(hi - d_star > 0.0)) {
      v.push_back({Kind::kUpperDistance, k,
                   fmt::format("d*_{} < d_upper_{} ({} < {})", label, label, d_star, hi),
                   hi - d_star});
    }
  }
  return report;
}

/// Per-edge slice of the constraint envelope.
struct EdgeEnvelope {
  double d_star;
  double d_lower;
  double d_upper;
  double e_lower_star;
  double e_upper_star;
  double eta_lower;
  double eta_upper;
  double xi_lower;
  double xi_upper;
  double beta0;

  XiBounds xi_bounds() const noexcept { return {xi_lower, xi_upper}; }
};

struct ConstraintEnvelope {
  double mu = 3.0;
  std::vector<EdgeEnvelope> edges;

  std::size_t size() const noexcept { return edges.size(); }
  const EdgeEnvelope& operator[](std::size_t k) const { return edges[k]; }
};

inline constexpr double kDefaultMu = 3.0;

/// Combines the CM&CF corridor with the IR-preservation slack:
///   e_lower* = min(d* - d_lower, |e(0)| + mu)
///   e_upper* = min(d_upper - d*, |e(0)| + mu)
/// then maps to squared-error bounds and divides by beta(0).
inline ConstraintEnvelope build_envelope(const DesiredFramework& fw, const DistanceRanges& ranges,
                                         std::span<const double> initial_errors, double mu,
                                         std::span<const double> beta0) {
  const FormationSpec spec{fw.radius,
                           {fw.separation_deg.begin(), fw.separation_deg.end() - 1}};
  const FeasibilityReport feas = check_feasibility(spec, ranges);
  if (!feas.ok()) {
    throw InfeasibleFormation(fmt::format("infeasible formation: {} (margin {:.6g})",
                                          feas.violations.front().bound,
                                          feas.violations.front().margin));
  }
  const int m = fw.graph.n_edges();
  if (static_cast<int>(initial_errors.size()) != m || static_cast<int>(beta0.size()) != m) {
    throw DimensionMismatch(fmt::format("expected {} initial errors and beta0 values, got {} / {}",
                                        m, initial_errors.size(), beta0.size()));
  }
  if (!(mu > 0.0)) throw InvalidParameter(fmt::format("mu must be positive, got {}", mu));

  ConstraintEnvelope env;
  env.mu = mu;
  env.edges.reserve(m);
  for (int k = 0; k < m; ++k) {
    const std::string label = fw.graph.edge_label(k);
    if (!(beta0[k] > 0.0)) {
      throw InvalidParameter(fmt::format("beta0 of edge {} must be positive", label));
    }
    EdgeEnvelope ee{};
    ee.d_star = fw.desired_distances[k];
    ee.d_lower = ranges.lower[k];
    ee.d_upper = ranges.upper[k];
    ee.beta0 = beta0[k];
    const double e0 = initial_errors[k];
    const double slack = std::abs(e0) + mu;
    ee.e_lower_star = std::min(ee.d_star - ee.d_lower, slack);
    ee.e_upper_star = std::min(ee.d_upper - ee.d_star, slack);
    if (!(-ee.e_lower_star < e0 && e0 < ee.e_upper_star)) {
      throw InitialConditionViolation(
          k, fmt::format("edge {}: initial error {:.6g} m is not inside (-{:.6g}, {:.6g})", label,
                         e0, ee.e_lower_star, ee.e_upper_star));
    }
    if (ee.e_lower_star >= ee.d_star) {
      throw DegenerateBound(k, fmt::format("edge {}: e_lower* = {:.6g} >= d* = {:.6g}", label,
                                           ee.e_lower_star, ee.d_star));
    }
    ee.eta_lower = ee.e_lower_star * (-ee.e_lower_star + 2.0 * ee.d_star);
    ee.eta_upper = ee.e_upper_star * (ee.e_upper_star + 2.0 * ee.d_star);
    ee.xi_lower = ee.eta_lower / ee.beta0;
    ee.xi_upper = ee.eta_upper / ee.beta0;
    env.edges.push_back(ee);
  }
  return env;
}

/// Per-edge distance, error, squared error and normalized error.
struct EdgeErrors {
  std::vector<double> distance;
  std::vector<double> error;
  std::vector<double> eta;
  std::vector<double> xi;
};

inline EdgeErrors edge_errors(std::span<const Vec2> coords, const SensingGraph& graph,
                              const ConstraintEnvelope& env,
                              std::span<const PerformanceFunction> perf, double t) {
  detail::check_coordinates(coords, graph);
  const int m = graph.n_edges();
  if (static_cast<int>(env.size()) != m || static_cast<int>(perf.size()) != m) {
    throw DimensionMismatch("envelope / performance functions do not match the graph");
  }
  EdgeErrors out;
  out.distance.resize(m);
  out.error.resize(m);
  out.eta.resize(m);
  out.xi.resize(m);
  for (int k = 0; k < m; ++k) {
    const Edge& e = graph.edge(k);
    const double d2 = (coords[e.i] - coords[e.j]).squaredNorm();
    const double ds = env[k].d_star;
    out.distance[k] = std::sqrt(d2);
    out.error[k] = out.distance[k] - ds;
    out.eta[k] = d2 - ds * ds;
    out.xi[k] = out.eta[k] / beta(perf[k], t).value;
  }
  return out;
}

/// Positive magnitudes: the admissible error band is (-lower, upper).
struct ErrorBand {
  double lower;
  double upper;
};

/// Time-varying distance-error bounds implied by the squared-error bounds
/// scaled by beta(t)/beta(0).
inline std::vector<ErrorBand> time_varying_error_bounds(const ConstraintEnvelope& env,
                                                        std::span<const PerformanceFunction> perf,
                                                        double t) {
  if (perf.size() != env.size()) {
    throw DimensionMismatch("performance functions do not match the envelope");
  }
  std::vector<ErrorBand> out(env.size());
  for (std::size_t k = 0; k < env.size(); ++k) {
    const EdgeEnvelope& ee = env[k];
    const double scale = beta(perf[k], t).value / ee.beta0;
    const double ds2 = ee.d_star * ee.d_star;
    const double lower_arg = ds2 - ee.eta_lower * scale;
    if (lower_arg < 0.0) {
      throw NumericalDomain(
          fmt::format("edge {}: eta_lower * beta(t)/beta(0) exceeds d*^2", k));
    }
    out[k].upper = -ee.d_star + std::sqrt(ds2 + ee.eta_upper * scale);
    out[k].lower = ee.d_star - std::sqrt(lower_arg);
  }
  return out;
}

}  // namespace enclose

#endif  // ENCLOSE_FORMATION_HPP
