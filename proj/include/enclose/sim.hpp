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

// Unicycle agents around a single-integrator target, integrated with
// classical RK4. Controls are state feedback and are re-evaluated at every
// RK stage.

#ifndef ENCLOSE_SIM_HPP
#define ENCLOSE_SIM_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "enclose/control.hpp"
#include "enclose/errors.hpp"
#include "enclose/formation.hpp"
#include "enclose/rigidity.hpp"
#include "enclose/transform.hpp"

namespace enclose {

/// Analytic target velocity models.
///   constant : v = c
///   sine_y   : v = c + (0, A cos(w t + phi))
///   circular : v = c + A (-sin(w t + phi), cos(w t + phi))
struct TargetMotion {
  enum class Model { kConstant, kSineY, kCircular };

  Model model = Model::kConstant;
  Vec2 constant = Vec2::Zero();
  double amplitude = 0.0;  ///< m/s
  double frequency = 0.0;  ///< rad/s
  double phase_deg = 0.0;

  Vec2 velocity(double t) const {
    const double a = frequency * t + deg_to_rad(phase_deg);
    switch (model) {
      case Model::kSineY:
        return constant + Vec2(0.0, amplitude * std::cos(a));
      case Model::kCircular:
        return constant + amplitude * Vec2(-std::sin(a), std::cos(a));
      case Model::kConstant:
        break;
    }
    return constant;
  }

  Vec2 acceleration(double t) const {
    const double a = frequency * t + deg_to_rad(phase_deg);
    switch (model) {
      case Model::kSineY:
        return Vec2(0.0, -amplitude * frequency * std::sin(a));
      case Model::kCircular:
        return -amplitude * frequency * Vec2(std::cos(a), std::sin(a));
      case Model::kConstant:
        break;
    }
    return Vec2::Zero();
  }

  friend bool operator==(const TargetMotion&, const TargetMotion&) = default;
};

inline const char* model_name(TargetMotion::Model m) {
  switch (m) {
    case TargetMotion::Model::kSineY:
      return "sine_y";
    case TargetMotion::Model::kCircular:
      return "circular";
    case TargetMotion::Model::kConstant:
      break;
  }
  return "constant";
}

/// Centered difference of a velocity profile, for targets without an
/// analytic derivative (two extra evaluations).
template <class VelocityFn>
Vec2 centered_acceleration(const VelocityFn& velocity, double t, double h = 1e-5) {
  return (velocity(t + h) - velocity(t - h)) / (2.0 * h);
}

struct Pose {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;  ///< radians, wrapped to (-pi, pi]

  Vec2 position() const { return {x, y}; }
};

struct WorldState {
  double t = 0.0;
  Vec2 target = Vec2::Zero();
  std::vector<Pose> agents;

  /// Vertex-indexed positions (target at 0).
  std::vector<Vec2> coordinates() const {
    std::vector<Vec2> c;
    c.reserve(agents.size() + 1);
    c.push_back(target);
    for (const Pose& a : agents) c.push_back(a.position());
    return c;
  }

  std::vector<double> headings() const {
    std::vector<double> h;
    h.reserve(agents.size());
    for (const Pose& a : agents) h.push_back(a.theta);
    return h;
  }
};

struct AgentInit {
  double x = 0.0;
  double y = 0.0;
  double heading_deg = 0.0;

  friend bool operator==(const AgentInit&, const AgentInit&) = default;
};

struct RunOptions {
  double duration = 50.0;
  double dt = 1e-3;
  int log_decimation = 10;
  bool full_rate = false;
  /// A step that would leave the admissible set is retried as two half
  /// steps, recursively, at most this many times (0 = strict fixed step).
  int max_refinement = 8;

  friend bool operator==(const RunOptions&, const RunOptions&) = default;
};

struct OutputOptions {
  bool plots = false;
  friend bool operator==(const OutputOptions&, const OutputOptions&) = default;
};

/// A complete, file-level description of one run. Angles are kept in
/// degrees here, exactly as written in scenario files; ClosedLoop converts.
struct Scenario {
  std::string name;
  FormationSpec formation;
  DistanceRanges ranges;
  std::vector<PerformanceFunction> perf;  ///< per canonical edge
  std::vector<double> k_edge;             ///< per canonical edge
  std::vector<double> k_h1;               ///< per agent
  std::vector<double> k_h2;               ///< per agent
  std::vector<double> heading_bound_deg;  ///< per agent
  double mu = kDefaultMu;
  Vec2 initial_target = Vec2::Zero();
  std::vector<AgentInit> initial_agents;
  TargetMotion target;
  double speed_bound = 0.0;  ///< strict upper bound on |v0(t)|
  RunOptions run;
  OutputOptions outputs;
  /// Relative rigidity floor: sigma_min(R) must stay above
  /// rigidity_floor * sigma_max(R(p*)).
  double rigidity_floor = 1e-6;
  std::optional<std::uint64_t> seed;

  int n_agents() const noexcept { return formation.n_agents(); }

  WorldState initial_world() const {
    WorldState w;
    w.t = 0.0;
    w.target = initial_target;
    for (const AgentInit& a : initial_agents) {
      w.agents.push_back({a.x, a.y, wrap_angle(deg_to_rad(a.heading_deg))});
    }
    return w;
  }

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

/// Largest decay rate (1/s) of the edge loop linearized at the desired
/// shape once beta has settled: 2 lambda_max(M^T diag(k / beta_inf^2) M).
/// The loop stiffens as beta shrinks; explicit RK4 stays stable while
/// stiffness * dt is below about 2.78.
inline double edge_loop_stiffness(const DesiredFramework& fw, std::span<const double> k_edge,
                                  std::span<const PerformanceFunction> perf) {
  const Eigen::MatrixXd m = decompose(rigidity_matrix(fw.coordinates, fw.graph)).sub_matrix;
  if (static_cast<Eigen::Index>(k_edge.size()) != m.rows() ||
      static_cast<Eigen::Index>(perf.size()) != m.rows()) {
    throw DimensionMismatch("gains / performance functions do not match the graph");
  }
  Eigen::VectorXd w(m.rows());
  for (Eigen::Index k = 0; k < m.rows(); ++k) {
    const double b = perf[k].beta_inf;
    w(k) = k_edge[k] / (b * b);
  }
  const Eigen::MatrixXd j = 2.0 * m.transpose() * w.asDiagonal() * m;
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(j, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().maxCoeff();
}

/// Validated scenario with the framework, envelope and gains resolved.
class ClosedLoop {
 public:
  /// Runs every feasibility and assumption check. Throws ValidationError
  /// naming the offending field, or InitialConditionViolation when an edge
  /// starts outside its corridor.
  explicit ClosedLoop(Scenario scenario) : scenario_(std::move(scenario)) {
    const Scenario& s = scenario_;
    const int n = s.n_agents();
    if (s.formation.separation_deg.empty()) {
      throw ValidationError("formation.angles", "at least one separation angle is required");
    }
    const FeasibilityReport feas = check_feasibility(s.formation, s.ranges);
    if (!feas.ok()) {
      const FeasibilityViolation& v = feas.violations.front();
      const bool range_issue = v.kind == FeasibilityViolation::Kind::kLowerDistance ||
                               v.kind == FeasibilityViolation::Kind::kUpperDistance ||
                               v.kind == FeasibilityViolation::Kind::kShape;
      throw ValidationError(range_issue ? "ranges" : "formation",
                            fmt::format("infeasible formation: {} (margin {:.6g})", v.bound, v.margin));
    }
    framework_ = henneberg_build(s.formation.radius, s.formation.separation_deg);
    const int m = framework_->graph.n_edges();

    if (static_cast<int>(s.perf.size()) != m) {
      throw ValidationError("ppc", fmt::format("expected {} performance triples", m));
    }
    for (const PerformanceFunction& p : s.perf) {
      try {
        p.validate();
      } catch (const InvalidParameter& ex) {
        throw ValidationError("ppc", ex.what());
      }
    }

    gains_.k_edge = s.k_edge;
    gains_.k_h1 = s.k_h1;
    gains_.k_h2 = s.k_h2;
    for (double b : s.heading_bound_deg) gains_.e_theta_bar.push_back(deg_to_rad(b));
    if (static_cast<int>(s.heading_bound_deg.size()) != n) {
      throw ValidationError("heading_bound", fmt::format("expected {} heading bounds", n));
    }
    try {
      gains_.validate(n);
    } catch (const Error& ex) {
      const bool heading = std::any_of(gains_.e_theta_bar.begin(), gains_.e_theta_bar.end(),
                                       [](double b) { return !(b > 0.0 && b < std::numbers::pi / 2); });
      throw ValidationError(heading ? "heading_bound" : "gains", ex.what());
    }

    if (static_cast<int>(s.initial_agents.size()) != n) {
      throw ValidationError("initial.agents",
                            fmt::format("expected {} agent poses, got {}", n, s.initial_agents.size()));
    }
    const RunOptions& r = s.run;
    if (!(r.dt > 0.0) || !(r.duration >= 0.0) || r.log_decimation < 1 || r.max_refinement < 0 ||
        r.max_refinement > 30) {
      throw ValidationError(
          "run", "need dt > 0, duration >= 0, log_decimation >= 1 and max_refinement in [0, 30]");
    }
    if (!(s.mu > 0.0)) throw ValidationError("mu", "mu must be positive");
    if (!(s.rigidity_floor >= 0.0)) {
      throw ValidationError("outputs.rigidity_floor", "rigidity floor must be nonnegative");
    }

    // Strict speed bound, sampled over the horizon.
    const int samples = std::max(1000, static_cast<int>(std::ceil(r.duration / 0.01)));
    for (int k = 0; k <= samples; ++k) {
      const double t = r.duration * k / samples;
      const double speed = s.target.velocity(t).norm();
      if (!(speed < s.speed_bound)) {
        throw ValidationError("target_motion.speed_bound",
                              fmt::format("|v0({:.4f})| = {:.6g} is not below {:.6g}", t, speed,
                                          s.speed_bound));
      }
    }

    const WorldState w0 = s.initial_world();
    const std::vector<Vec2> coords = w0.coordinates();
    const Eigen::VectorXd phi = edge_function(coords, framework_->graph);
    std::vector<double> e0(m), beta0(m);
    for (int k = 0; k < m; ++k) {
      e0[k] = std::sqrt(phi(k)) - framework_->desired_distances[k];
      beta0[k] = s.perf[k].beta0;
    }
    envelope_ = build_envelope(*framework_, s.ranges, e0, s.mu, beta0);

    reference_sigma_max_ =
        is_infinitesimally_rigid(framework_->coordinates, framework_->graph).sigma_max;

    try {
      (void)evaluate(w0);
    } catch (const OutOfBarrier& ex) {
      throw ValidationError(ex.kind() == OutOfBarrier::Kind::kHeading ? "heading_bound" : "initial",
                            fmt::format("initial state violates a barrier: {}", ex.what()));
    } catch (const SingularityGuard& ex) {
      throw ValidationError("heading_bound", ex.what());
    }
  }

  const Scenario& scenario() const noexcept { return scenario_; }
  const DesiredFramework& framework() const noexcept { return *framework_; }
  const SensingGraph& graph() const noexcept { return framework_->graph; }
  const ConstraintEnvelope& envelope() const noexcept { return envelope_; }
  const ControlGains& gains() const noexcept { return gains_; }
  std::span<const PerformanceFunction> perf() const noexcept { return scenario_.perf; }
  const TargetMotion& target() const noexcept { return scenario_.target; }
  const RunOptions& options() const noexcept { return scenario_.run; }
  int n_agents() const noexcept { return framework_->graph.n_agents(); }

  /// Absolute rigidity floor on sigma_min(R).
  double rigidity_floor() const noexcept { return scenario_.rigidity_floor * reference_sigma_max_; }

  /// Worst-case edge-loop stiffness (1/s); see edge_loop_stiffness.
  double stiffness() const { return edge_loop_stiffness(*framework_, gains_.k_edge, scenario_.perf); }

  ControlContext context() const { return {framework_->graph, envelope_, scenario_.perf, gains_}; }

  ControlSnapshot evaluate(const WorldState& w) const {
    const std::vector<Vec2> coords = w.coordinates();
    const std::vector<double> headings = w.headings();
    return evaluate_controls(context(), coords, headings, w.t, target().velocity(w.t),
                             target().acceleration(w.t));
  }

 private:
  Scenario scenario_;
  std::optional<DesiredFramework> framework_;
  ConstraintEnvelope envelope_;
  ControlGains gains_;
  double reference_sigma_max_ = 0.0;
};

namespace detail {

/// State layout: [target x, y, then per agent x, y, theta].
inline Eigen::VectorXd pack(const WorldState& w) {
  const auto n = static_cast<Eigen::Index>(w.agents.size());
  Eigen::VectorXd x(2 + 3 * n);
  x(0) = w.target.x();
  x(1) = w.target.y();
  for (Eigen::Index i = 0; i < n; ++i) {
    x(2 + 3 * i) = w.agents[i].x;
    x(3 + 3 * i) = w.agents[i].y;
    x(4 + 3 * i) = w.agents[i].theta;
  }
  return x;
}

inline WorldState unpack(const Eigen::VectorXd& x, double t) {
  WorldState w;
  w.t = t;
  w.target = Vec2(x(0), x(1));
  const Eigen::Index n = (x.size() - 2) / 3;
  w.agents.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) w.agents[i] = {x(2 + 3 * i), x(3 + 3 * i), x(4 + 3 * i)};
  return w;
}

inline Eigen::VectorXd derivative(const ControlSnapshot& s) {
  const auto n = static_cast<Eigen::Index>(s.velocity.size());
  Eigen::VectorXd d(2 + 3 * n);
  d(0) = s.v0.x();
  d(1) = s.v0.y();
  for (Eigen::Index i = 0; i < n; ++i) {
    d(2 + 3 * i) = s.velocity[i].x();
    d(3 + 3 * i) = s.velocity[i].y();
    d(4 + 3 * i) = s.w[i];
  }
  return d;
}

inline WorldState rk4_step(const ClosedLoop& loop, const WorldState& w, const ControlSnapshot& s1,
                           double dt) {
  const Eigen::VectorXd x = pack(w);
  const double t = w.t;
  const Eigen::VectorXd k1 = derivative(s1);
  const Eigen::VectorXd k2 = derivative(loop.evaluate(unpack(x + 0.5 * dt * k1, t + 0.5 * dt)));
  const Eigen::VectorXd k3 = derivative(loop.evaluate(unpack(x + 0.5 * dt * k2, t + 0.5 * dt)));
  const Eigen::VectorXd k4 = derivative(loop.evaluate(unpack(x + dt * k3, t + dt)));
  WorldState next = unpack(x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4), t + dt);
  for (Pose& a : next.agents) a.theta = wrap_angle(a.theta);
  return next;
}

}  // namespace detail

/// Advances the world by one RK4 step of size dt (the scenario's dt when
/// omitted). Throws OutOfBarrier / SingularityGuard if any stage leaves the
/// admissible set.
inline WorldState step(const WorldState& w, const ClosedLoop& loop,
                       std::optional<double> dt = std::nullopt) {
  return detail::rk4_step(loop, w, loop.evaluate(w), dt.value_or(loop.options().dt));
}

struct TraceRecord {
  int step = 0;
  WorldState world;

  std::vector<double> distance, error, eta, xi, sigma, e_upper_t, e_lower_t;  // per edge

  std::vector<Vec2> u, velocity;  // per agent
  std::vector<double> theta_d, e_theta, sigma_theta, v, w, theta_d_dot;

  Vec2 v0 = Vec2::Zero();
  double sigma_min_r = std::numeric_limits<double>::quiet_NaN();
  bool violation = false;
};

struct RunViolation {
  std::string kind;  ///< "edge_barrier", "heading_barrier" or "singularity"
  int index = -1;    ///< edge id or 0-based agent index
  int step = 0;
  double t = 0.0;
  std::string message;
};

struct SimTrace {
  int n_agents = 0;
  double dt = 0.0;
  std::vector<TraceRecord> records;
  std::optional<RunViolation> violation;
  /// Steps that needed refinement, and the deepest halving used.
  int refined_steps = 0;
  int max_refinement_depth = 0;

  bool completed() const noexcept { return !violation.has_value(); }
};

namespace detail {

inline TraceRecord make_record(const ClosedLoop& loop, const WorldState& w, int step_index,
                               const ControlSnapshot* s) {
  TraceRecord r;
  r.step = step_index;
  r.world = w;
  r.v0 = loop.target().velocity(w.t);
  const std::vector<Vec2> coords = w.coordinates();
  const int n = loop.n_agents();
  const int m = loop.graph().n_edges();
  r.sigma_min_r = is_infinitesimally_rigid(coords, loop.graph()).sigma_min;
  const std::vector<ErrorBand> bands = time_varying_error_bounds(loop.envelope(), loop.perf(), w.t);
  r.e_upper_t.resize(m);
  r.e_lower_t.resize(m);
  for (int k = 0; k < m; ++k) {
    r.e_upper_t[k] = bands[k].upper;
    r.e_lower_t[k] = bands[k].lower;
  }
  if (s != nullptr) {
    r.distance = s->errors.distance;
    r.error = s->errors.error;
    r.eta = s->errors.eta;
    r.xi = s->errors.xi;
    r.sigma = s->sigma;
    r.u = s->u;
    r.velocity = s->velocity;
    r.theta_d = s->theta_d;
    r.e_theta = s->e_theta;
    r.sigma_theta = s->sigma_theta;
    r.v = s->v;
    r.w = s->w;
    r.theta_d_dot = s->theta_d_dot;
    return r;
  }
  // Controls unavailable: keep the geometric quantities, NaN the rest.
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const EdgeErrors e = edge_errors(coords, loop.graph(), loop.envelope(), loop.perf(), w.t);
  r.distance = e.distance;
  r.error = e.error;
  r.eta = e.eta;
  r.xi = e.xi;
  r.sigma.assign(m, nan);
  r.u.assign(n, Vec2::Constant(nan));
  r.velocity.assign(n, Vec2::Constant(nan));
  r.theta_d.assign(n, nan);
  r.e_theta.assign(n, nan);
  r.sigma_theta.assign(n, nan);
  r.v.assign(n, nan);
  r.w.assign(n, nan);
  r.theta_d_dot.assign(n, nan);
  return r;
}

struct Advance {
  WorldState world;
  ControlSnapshot snapshot;
  int depth = 0;
};

/// One RK4 step from w.t to t_end followed by an evaluation of the landing
/// state. If either throws, the interval is split in two and retried down to
/// `max_depth` halvings.
inline Advance advance(const ClosedLoop& loop, const WorldState& w, const ControlSnapshot& s,
                       double t_end, int depth, int max_depth) {
  try {
    WorldState next = rk4_step(loop, w, s, t_end - w.t);
    next.t = t_end;
    ControlSnapshot ns = loop.evaluate(next);
    return {std::move(next), std::move(ns), depth};
  } catch (const Error&) {
    if (depth >= max_depth) throw;
  }
  const double mid = w.t + 0.5 * (t_end - w.t);
  Advance first = advance(loop, w, s, mid, depth + 1, max_depth);
  Advance second = advance(loop, first.world, first.snapshot, t_end, depth + 1, max_depth);
  second.depth = std::max(first.depth, second.depth);
  return second;
}

inline RunViolation to_violation(const Error& ex, int step_index, double t) {
  RunViolation v;
  v.step = step_index;
  v.t = t;
  v.message = ex.what();
  if (const auto* b = dynamic_cast<const OutOfBarrier*>(&ex)) {
    v.kind = b->kind() == OutOfBarrier::Kind::kHeading ? "heading_barrier" : "edge_barrier";
    v.index = b->index();
  } else if (const auto* g = dynamic_cast<const SingularityGuard*>(&ex)) {
    v.kind = "singularity";
    v.index = g->agent() - 1;
  } else {
    v.kind = "error";
  }
  return v;
}

}  // namespace detail

/// Called once per integration step with the pre-step world and its control
/// snapshot.
using StepObserver = std::function<void(const WorldState&, const ControlSnapshot&, int)>;

/// Integrates over the scenario horizon on the fixed grid t_k = k dt. The
/// run halts at the first barrier or singularity violation that survives
/// step refinement; the trace then ends with a flagged record of the last
/// admissible state.
inline SimTrace run(const ClosedLoop& loop, const StepObserver& observer = {}) {
  const RunOptions& opt = loop.options();
  const int decimation = opt.full_rate ? 1 : opt.log_decimation;
  const int steps = static_cast<int>(std::llround(opt.duration / opt.dt));

  SimTrace trace;
  trace.n_agents = loop.n_agents();
  trace.dt = opt.dt;
  trace.records.reserve(steps / decimation + 2);

  WorldState w = loop.scenario().initial_world();
  std::optional<ControlSnapshot> snap;
  try {
    snap = loop.evaluate(w);
  } catch (const Error& ex) {
    trace.records.push_back(detail::make_record(loop, w, 0, nullptr));
    trace.records.back().violation = true;
    trace.violation = detail::to_violation(ex, 0, w.t);
    return trace;
  }
  for (int k = 0;; ++k) {
    if (observer) observer(w, *snap, k);
    const bool last = k == steps;
    if (k % decimation == 0 || last) trace.records.push_back(detail::make_record(loop, w, k, &*snap));
    if (last) break;
    try {
      // The grid time is computed, not accumulated, so it stays exact.
      detail::Advance next =
          detail::advance(loop, w, *snap, (k + 1) * opt.dt, 0, opt.max_refinement);
      if (next.depth > 0) {
        ++trace.refined_steps;
        trace.max_refinement_depth = std::max(trace.max_refinement_depth, next.depth);
      }
      w = std::move(next.world);
      snap = std::move(next.snapshot);
    } catch (const Error& ex) {
      if (trace.records.back().step != k) {
        trace.records.push_back(detail::make_record(loop, w, k, &*snap));
      }
      trace.records.back().violation = true;
      trace.violation = detail::to_violation(ex, k, w.t);
      return trace;
    }
  }
  return trace;
}

inline SimTrace run(const Scenario& scenario) { return run(ClosedLoop(scenario)); }

/// One of the four runtime checks.
struct CheckResult {
  std::string name;
  std::optional<std::size_t> first_failure;  ///< record index
  double worst_margin = std::numeric_limits<double>::infinity();
  std::size_t worst_record = 0;

  bool ok() const noexcept { return !first_failure.has_value(); }
};

struct MonitorReport {
  CheckResult static_bounds{"a: -e_lower* < e < e_upper*"};
  CheckResult time_varying_bounds{"b: -e_lower(t) < e < e_upper(t)"};
  CheckResult heading_bounds{"c: |e_theta| < e_theta_bar"};
  CheckResult rigidity{"d: sigma_min(R) > floor"};
  bool terminated_early = false;

  bool clean() const noexcept {
    return !terminated_early && static_bounds.ok() && time_varying_bounds.ok() &&
           heading_bounds.ok() && rigidity.ok();
  }
};

namespace detail {

inline void account(CheckResult& c, double margin, std::size_t record) {
  // NaN margins count as failures.
  if (!(margin > 0.0) && !c.first_failure) c.first_failure = record;
  if (!(margin >= c.worst_margin)) {
    c.worst_margin = margin;
    c.worst_record = record;
  }
}

}  // namespace detail

/// Checks every logged record against the static and time-varying error
/// bounds, the heading bounds and the rigidity floor. Margins are signed:
/// positive is inside.
inline MonitorReport monitor(const SimTrace& trace, const ConstraintEnvelope& env,
                             std::span<const double> e_theta_bar, double rigidity_floor) {
  MonitorReport rep;
  rep.terminated_early = trace.violation.has_value();
  for (std::size_t r = 0; r < trace.records.size(); ++r) {
    const TraceRecord& rec = trace.records[r];
    double a = std::numeric_limits<double>::infinity();
    double b = a;
    for (std::size_t k = 0; k < env.size(); ++k) {
      const double e = rec.error[k];
      a = std::min({a, e + env[k].e_lower_star, env[k].e_upper_star - e});
      b = std::min({b, e + rec.e_lower_t[k], rec.e_upper_t[k] - e});
      if (std::isnan(e)) a = b = std::numeric_limits<double>::quiet_NaN();
    }
    double c = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < e_theta_bar.size(); ++i) {
      const double m = e_theta_bar[i] - std::abs(rec.e_theta[i]);
      c = std::isnan(m) ? m : std::min(c, m);
    }
    detail::account(rep.static_bounds, a, r);
    detail::account(rep.time_varying_bounds, b, r);
    detail::account(rep.heading_bounds, c, r);
    detail::account(rep.rigidity, rec.sigma_min_r - rigidity_floor, r);
  }
  return rep;
}

inline MonitorReport monitor(const SimTrace& trace, const ClosedLoop& loop) {
  return monitor(trace, loop.envelope(), loop.gains().e_theta_bar, loop.rigidity_floor());
}

struct MetricTolerances {
  double edge = 0.05;                          ///< m
  double heading = deg_to_rad(0.5);            ///< rad
};

struct EdgeMetric {
  std::string label;
  double final_abs_error = 0.0;
  /// First logged time after which |e| < tol holds for the rest of the trace.
  std::optional<double> time_to_tolerance;
};

struct AgentMetric {
  std::optional<double> heading_settling_time;
  double final_velocity_mismatch = 0.0;
};

struct Metrics {
  std::vector<EdgeMetric> edges;
  std::vector<AgentMetric> agents;
  double final_time = 0.0;
  double initial_sigma_min_r = 0.0;
  double min_sigma_min_r = 0.0;
  /// 1 - min / initial of the rigidity margin.
  double max_rigidity_dip = 0.0;
  double initial_sigma_norm = 0.0;
  double final_sigma_norm = 0.0;
};

namespace detail {

template <class Pred>
std::optional<double> settled_since(const std::vector<TraceRecord>& recs, Pred&& inside) {
  std::optional<double> since;
  for (const TraceRecord& r : recs) {
    if (inside(r)) {
      if (!since) since = r.world.t;
    } else {
      since.reset();
    }
  }
  return since;
}

inline double l2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace detail

inline Metrics metrics(const SimTrace& trace, const MetricTolerances& tol = {}) {
  Metrics out;
  if (trace.records.empty()) return out;
  const SensingGraph graph(trace.n_agents);
  const TraceRecord& first = trace.records.front();
  const TraceRecord& last = trace.records.back();
  out.final_time = last.world.t;

  for (int k = 0; k < graph.n_edges(); ++k) {
    EdgeMetric em;
    em.label = graph.edge_label(k);
    em.final_abs_error = std::abs(last.error[k]);
    em.time_to_tolerance = detail::settled_since(
        trace.records, [&](const TraceRecord& r) { return std::abs(r.error[k]) < tol.edge; });
    out.edges.push_back(em);
  }
  for (int i = 0; i < trace.n_agents; ++i) {
    AgentMetric am;
    am.heading_settling_time = detail::settled_since(
        trace.records, [&](const TraceRecord& r) { return std::abs(r.e_theta[i]) < tol.heading; });
    am.final_velocity_mismatch = (last.velocity[i] - last.v0).norm();
    out.agents.push_back(am);
  }
  out.initial_sigma_min_r = first.sigma_min_r;
  out.min_sigma_min_r = first.sigma_min_r;
  for (const TraceRecord& r : trace.records) {
    out.min_sigma_min_r = std::min(out.min_sigma_min_r, r.sigma_min_r);
  }
  out.max_rigidity_dip =
      first.sigma_min_r > 0.0 ? 1.0 - out.min_sigma_min_r / first.sigma_min_r : 0.0;
  out.initial_sigma_norm = detail::l2(first.sigma);
  out.final_sigma_norm = detail::l2(last.sigma);
  return out;
}

}  // namespace enclose

#endif  // ENCLOSE_SIM_HPP
