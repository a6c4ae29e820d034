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

// The acceptance suite: nine end-to-end criteria, each returning a measured
// value next to its threshold. Shared by `enclose verify` and the
// acceptance test binary.

#ifndef ENCLOSE_ACCEPTANCE_HPP
#define ENCLOSE_ACCEPTANCE_HPP

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <future>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "enclose/control.hpp"
#include "enclose/errors.hpp"
#include "enclose/formation.hpp"
#include "enclose/presets.hpp"
#include "enclose/rigidity.hpp"
#include "enclose/scenario_io.hpp"
#include "enclose/sim.hpp"
#include "enclose/trace_io.hpp"
#include "enclose/transform.hpp"

namespace enclose {

struct CriterionResult {
  int id = 0;
  std::string key;
  bool pass = false;
  std::string measured;
  std::string threshold;
};

struct CriterionInfo {
  int id;
  std::string_view key;
  std::string_view title;
};

inline constexpr CriterionInfo kCriteria[] = {
    {1, "desired_distances", "desired distances of the reference pattern"},
    {2, "golden_run", "reference run: clean monitor and wall-clock budget"},
    {3, "heading_settling", "fixed-time heading convergence"},
    {4, "formation_convergence", "edge errors converge inside shrinking bounds"},
    {5, "velocity_tracking", "agents match the target velocity"},
    {6, "rigidity_suite", "randomized rigidity checks"},
    {7, "derivative_oracles", "closed-form derivatives and integrator order"},
    {8, "barrier_decrease", "heading barrier function decrease inequality"},
    {9, "forward_invariance", "randomized forward-invariance sweep"},
};

struct AcceptanceOptions {
  std::filesystem::path scenario_dir;
  /// Failing sweep traces are written here; nothing is written when unset.
  std::optional<std::filesystem::path> archive_dir;
  EnvLookup env = process_env;
  int random_runs = 50;
  std::uint64_t seed = 20260416;
  /// 0 picks std::thread::hardware_concurrency().
  unsigned workers = 0;
};

namespace detail {

inline double relative_error(double approx, double exact) {
  return std::abs(approx - exact) / std::max(1.0, std::abs(exact));
}

/// Least-squares slope of log(err) against log(h).
inline double loglog_slope(const std::vector<double>& h, const std::vector<double>& err) {
  const auto n = static_cast<double>(h.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double x = std::log(h[i]), y = std::log(err[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

inline double state_distance(const WorldState& a, const WorldState& b) {
  double d = std::max(std::abs(a.target.x() - b.target.x()), std::abs(a.target.y() - b.target.y()));
  for (std::size_t i = 0; i < a.agents.size(); ++i) {
    d = std::max({d, std::abs(a.agents[i].x - b.agents[i].x), std::abs(a.agents[i].y - b.agents[i].y),
                  std::abs(wrap_angle(a.agents[i].theta - b.agents[i].theta))});
  }
  return d;
}

}  // namespace detail

/// Worst-case slack of the heading Lyapunov inequality over one snapshot:
///   dV/dt - (-4 k1 V^2 - 2^(3/4) k2 V^(3/4)),  V = sigma_theta^2 / 2,
/// with dV/dt = sigma_theta * d sigma_theta/d e * (w - theta_d_dot).
inline double heading_lyapunov_slack(const ControlSnapshot& s, const ControlGains& g) {
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < s.e_theta.size(); ++i) {
    const HeadingTransform h = sigma_theta(s.e_theta[i], g.e_theta_bar[i]);
    const double v = 0.5 * h.value * h.value;
    const double v_dot = h.value * h.slope * (s.w[i] - s.theta_d_dot[i]);
    const double bound = -4.0 * g.k_h1[i] * v * v - std::pow(2.0, 0.75) * g.k_h2[i] * std::pow(v, 0.75);
    worst = std::max(worst, v_dot - bound);
  }
  return worst;
}

class AcceptanceSuite {
 public:
  explicit AcceptanceSuite(AcceptanceOptions opt) : opt_(std::move(opt)) {}

  /// Runs every criterion whose key or id contains `filter`.
  std::vector<CriterionResult> run(std::string_view filter = "") {
    std::vector<CriterionResult> out;
    for (const CriterionInfo& c : kCriteria) {
      if (!filter.empty() && c.key.find(filter) == std::string_view::npos &&
          std::to_string(c.id) != filter) {
        continue;
      }
      out.push_back(run_one(c.id));
    }
    return out;
  }

  CriterionResult run_one(int id) {
    CriterionResult r;
    r.id = id;
    r.key = std::string(kCriteria[id - 1].key);
    try {
      switch (id) {
        case 1: desired_distances(r); break;
        case 2: golden_run(r); break;
        case 3: heading_settling(r); break;
        case 4: formation_convergence(r); break;
        case 5: velocity_tracking(r); break;
        case 6: rigidity_suite(r); break;
        case 7: derivative_oracles(r); break;
        case 8: barrier_decrease(r); break;
        case 9: forward_invariance(r); break;
        default: throw InvalidParameter(fmt::format("no criterion {}", id));
      }
    } catch (const std::exception& ex) {
      r.pass = false;
      r.measured = fmt::format("error: {}", ex.what());
    }
    return r;
  }

  /// The bundled reference scenario, after SIM_* overrides.
  Scenario reference_scenario() const {
    const std::filesystem::path path = opt_.scenario_dir / "paper_sec6.yaml";
    if (!std::filesystem::exists(path)) {
      throw IoError(fmt::format("bundled scenario '{}' not found", path.string()));
    }
    Scenario s = read_scenario(read_text_file(path), path.string());
    apply_env_overrides(s, opt_.env);
    (void)validate_scenario(s, path.string());
    return s;
  }

 private:
  struct Golden {
    std::optional<ClosedLoop> loop;
    SimTrace trace;
    MonitorReport report;
    Metrics metrics;
    double wall_seconds = 0.0;
    double worst_lyapunov_slack = -std::numeric_limits<double>::infinity();
    double worst_lyapunov_t = 0.0;
    double worst_v_increase = -std::numeric_limits<double>::infinity();
  };

  const Golden& golden() {
    if (golden_) return *golden_;
    Golden g;
    g.loop.emplace(reference_scenario());
    const ClosedLoop& loop = *g.loop;
    std::vector<double> prev_v;
    const auto observer = [&](const WorldState& w, const ControlSnapshot& s, int) {
      const double slack = heading_lyapunov_slack(s, loop.gains());
      if (slack > g.worst_lyapunov_slack) {
        g.worst_lyapunov_slack = slack;
        g.worst_lyapunov_t = w.t;
      }
      std::vector<double> v(s.sigma_theta.size());
      for (std::size_t i = 0; i < v.size(); ++i) v[i] = 0.5 * s.sigma_theta[i] * s.sigma_theta[i];
      if (!prev_v.empty()) {
        for (std::size_t i = 0; i < v.size(); ++i) {
          g.worst_v_increase = std::max(g.worst_v_increase, v[i] - prev_v[i]);
        }
      }
      prev_v = std::move(v);
    };
    const auto start = std::chrono::steady_clock::now();
    g.trace = enclose::run(loop, observer);
    g.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    g.report = monitor(g.trace, loop);
    g.metrics = metrics(g.trace);
    golden_ = std::move(g);
    return *golden_;
  }

  void desired_distances(CriterionResult& r) {
    const std::vector<double> angles{65.0, 75.0, 75.0, 80.0};
    const std::vector<double> expected{5.3730, 6.0876, 6.0876, 6.4279, 5.0, 5.0, 5.0, 5.0, 5.0};
    constexpr int kReps = 2000;
    DesiredFramework fw = henneberg_build(5.0, angles);
    const auto start = std::chrono::steady_clock::now();
    for (int i = 0; i < kReps; ++i) fw = henneberg_build(5.0, angles);
    const double per_call =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() / kReps;
    double worst = 0.0;
    for (std::size_t k = 0; k < expected.size(); ++k) {
      worst = std::max(worst, std::abs(fw.desired_distances[k] - expected[k]));
    }
    r.pass = fw.desired_distances.size() == expected.size() && worst < 5e-5 && per_call < 1e-3;
    r.measured = fmt::format("d* = [{:.4f}] max dev {:.2e}; {:.2f} us/build",
                             fmt::join(fw.desired_distances, ", "), worst, per_call * 1e6);
    r.threshold = "4-decimal match, < 1 ms";
  }

  void golden_run(CriterionResult& r) {
    const Golden& g = golden();
    const MonitorReport& m = g.report;
    const int failed = !m.static_bounds.ok() + !m.time_varying_bounds.ok() + !m.heading_bounds.ok() +
                       !m.rigidity.ok() + m.terminated_early;
    r.pass = m.clean() && g.wall_seconds < 10.0;
    r.measured = fmt::format("t_end {:.3f} s, failed checks {}, wall {:.2f} s", g.metrics.final_time,
                             failed, g.wall_seconds);
    r.threshold = "50 s, 0 violations, < 10 s";
    if (g.trace.violation) r.measured += fmt::format(" ({})", g.trace.violation->message);
  }

  void heading_settling(CriterionResult& r) {
    const Golden& g = golden();
    const ControlGains& gains = g.loop->gains();
    double worst = 0.0, worst_bound = 0.0;
    double worst_gap = -std::numeric_limits<double>::infinity();
    bool ok = g.trace.completed();
    for (std::size_t i = 0; i < g.metrics.agents.size(); ++i) {
      const double bound = settling_time_bound(gains.k_h1[i], gains.k_h2[i]);
      const double t = g.metrics.agents[i].heading_settling_time.value_or(
          std::numeric_limits<double>::infinity());
      ok = ok && t <= bound;
      if (t - bound > worst_gap) {
        worst_gap = t - bound;
        worst = t;
        worst_bound = bound;
      }
    }
    r.pass = ok;
    r.measured = fmt::format("slowest agent settles at {:.3f} s", worst);
    r.threshold = fmt::format("|e_theta| < 0.5 deg by {:.3f} s", worst_bound);
  }

  void formation_convergence(CriterionResult& r) {
    const Golden& g = golden();
    double worst_final = 0.0;
    for (const EdgeMetric& e : g.metrics.edges) worst_final = std::max(worst_final, e.final_abs_error);
    // Bounds must be nonincreasing and every sample strictly inside them.
    bool monotone = true;
    const auto& recs = g.trace.records;
    for (std::size_t k = 1; k < recs.size(); ++k) {
      for (std::size_t e = 0; e < recs[k].e_upper_t.size(); ++e) {
        monotone = monotone && recs[k].e_upper_t[e] <= recs[k - 1].e_upper_t[e] &&
                   recs[k].e_lower_t[e] <= recs[k - 1].e_lower_t[e];
      }
    }
    const CheckResult& band = g.report.time_varying_bounds;
    r.pass = g.trace.completed() && worst_final < 0.05 && band.ok() && monotone;
    r.measured = fmt::format("max |e(T)| {:.3e} m, worst band margin {:.4f} m, bounds {}",
                             worst_final, band.worst_margin, monotone ? "monotone" : "NOT monotone");
    r.threshold = "< 0.05 m, inside bounds at every sample";
  }

  void velocity_tracking(CriterionResult& r) {
    const Golden& g = golden();
    double worst = 0.0;
    for (const AgentMetric& a : g.metrics.agents) {
      worst = std::isnan(a.final_velocity_mismatch) ? a.final_velocity_mismatch
                                                    : std::max(worst, a.final_velocity_mismatch);
    }
    r.pass = g.trace.completed() && worst < 0.02;
    r.measured = fmt::format("max |p_dot - v0| at T = {:.3e} m/s", worst);
    r.threshold = "< 0.02 m/s";
  }

  void rigidity_suite(CriterionResult& r) {
    std::mt19937_64 rng(opt_.seed);
    std::uniform_int_distribution<int> pick_n(2, 10);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double worst_translation = 0.0, worst_fd = 0.0, min_lambda = std::numeric_limits<double>::infinity();
    int bad_shape = 0;
    constexpr int kSpecs = 50;
    for (int s = 0; s < kSpecs; ++s) {
      const int n = pick_n(rng);
      const double radius = 1.0 + 9.0 * unit(rng);
      const DesiredFramework fw0 = henneberg_build(radius, random_separation_angles(rng, n, 10.0));
      const Vec2 shift(20.0 * unit(rng) - 10.0, 20.0 * unit(rng) - 10.0);
      std::vector<Vec2> p = fw0.coordinates;
      for (Vec2& q : p) q += shift;
      const SensingGraph& graph = fw0.graph;
      const int m = graph.n_edges();
      const Eigen::MatrixXd R = rigidity_matrix(p, graph);
      const RigidityCheck rc = is_infinitesimally_rigid(p, graph);
      if (m != 2 * n - 1 || rc.rank != m || !rc.rigid) ++bad_shape;
      min_lambda = std::min(min_lambda, min_eigenvalue_mmt(decompose(R).sub_matrix));

      const double angle = 2.0 * std::numbers::pi * unit(rng);
      Eigen::VectorXd translation(2 * (n + 1));
      for (int v = 0; v <= n; ++v) translation.segment<2>(2 * v) = Vec2(std::cos(angle), std::sin(angle));
      worst_translation = std::max(worst_translation, (R * translation).cwiseAbs().maxCoeff() /
                                                          std::max(1.0, R.cwiseAbs().maxCoeff()));

      constexpr double h = 1e-6;
      for (int v = 0; v <= n; ++v) {
        for (int a = 0; a < 2; ++a) {
          std::vector<Vec2> plus = p, minus = p;
          plus[v](a) += h;
          minus[v](a) -= h;
          const Eigen::VectorXd col =
              0.25 * (edge_function(plus, graph) - edge_function(minus, graph)) / h;
          worst_fd = std::max(worst_fd, (col - R.col(graph.column_of(v) + a)).cwiseAbs().maxCoeff());
        }
      }
    }
    r.pass = bad_shape == 0 && min_lambda > 0.0 && worst_translation < 1e-12 && worst_fd < 1e-6;
    r.measured = fmt::format(
        "{} specs, {} rank/edge-count failures, min lambda(MM^T) {:.3e}, translation {:.1e}, "
        "FD {:.1e}",
        kSpecs, bad_shape, min_lambda, worst_translation, worst_fd);
    r.threshold = "rank 2N-1, lambda > 0, < 1e-12, < 1e-6";
  }

  void derivative_oracles(CriterionResult& r) {
    // (a) zeta * beta against d sigma / d xi on random interior grids.
    std::mt19937_64 rng(opt_.seed + 7);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double worst_slope = 0.0;
    for (int g = 0; g < 200; ++g) {
      const XiBounds b{0.1 + 20.0 * unit(rng), 0.1 + 40.0 * unit(rng)};
      const double beta_t = 0.15 + 0.85 * unit(rng);
      const double xi = -b.lower + (b.lower + b.upper) * (0.02 + 0.96 * unit(rng));
      const double h = 1e-4 * std::min({b.lower + xi, b.upper - xi, 1.0});
      const auto f = [&](double x) { return sigma_edge(x, b); };
      const double fd =
          (-f(xi + 2 * h) + 8 * f(xi + h) - 8 * f(xi - h) + f(xi - 2 * h)) / (12.0 * h);
      const double exact = zeta_edge(xi, b, beta_t) * beta_t;
      worst_slope = std::max(worst_slope, std::abs(fd - exact) / std::abs(exact));
    }

    // (b) closed-form time derivatives against centered differences along
    // the reference trajectory.
    const Golden& gold = golden();
    const ClosedLoop& loop = *gold.loop;
    double worst_traj = 0.0;
    // Small step: at t = 0 the virtual inputs accelerate at ~1e5 m/s^2.
    constexpr double h = 1e-6;
    for (const TraceRecord& rec : gold.trace.records) {
      if (rec.step % 500 != 0 || rec.step > 20000) continue;
      const WorldState& w = rec.world;
      const ControlSnapshot s = loop.evaluate(w);
      const ControlSnapshot sp = loop.evaluate(detail::rk4_step(loop, w, s, h));
      const ControlSnapshot sm = loop.evaluate(detail::rk4_step(loop, w, s, -h));
      for (std::size_t k = 0; k < s.zeta.size(); ++k) {
        worst_traj = std::max(worst_traj, detail::relative_error((sp.zeta[k] - sm.zeta[k]) / (2 * h), s.zeta_dot[k]));
        worst_traj = std::max(worst_traj, detail::relative_error((sp.sigma[k] - sm.sigma[k]) / (2 * h), s.sigma_dot[k]));
      }
      for (std::size_t i = 0; i < s.u.size(); ++i) {
        const Vec2 fd = (sp.u[i] - sm.u[i]) / (2 * h);
        worst_traj = std::max(worst_traj, detail::relative_error(fd.x(), s.u_dot[i].x()));
        worst_traj = std::max(worst_traj, detail::relative_error(fd.y(), s.u_dot[i].y()));
        if (s.u[i].norm() > 10.0 * kZeroVirtualInput) {
          const double fd_th = wrap_angle(sp.theta_d[i] - sm.theta_d[i]) / (2 * h);
          worst_traj = std::max(worst_traj, detail::relative_error(fd_th, s.theta_d_dot[i]));
        }
      }
    }

    const double order = rk4_order();
    r.pass = worst_slope < 1e-6 && worst_traj < 1e-3 && order >= 3.5;
    r.measured = fmt::format("slope rel {:.1e}, trajectory rel {:.1e}, RK4 order {:.2f}", worst_slope,
                             worst_traj, order);
    r.threshold = "< 1e-6, < 1e-3, >= 3.5";
  }

 public:
  /// Observed convergence order of strict fixed-step RK4 on the reference
  /// scenario, from its t = 0.5 s state to t = 1 s. The step grid keeps the
  /// errors above the roundoff floor (~1e-12).
  double rk4_order() {
    const Golden& g = golden();
    const ClosedLoop& loop = *g.loop;
    const auto it = std::find_if(g.trace.records.begin(), g.trace.records.end(),
                                 [](const TraceRecord& r) { return r.world.t >= 0.5 - 1e-12; });
    if (it == g.trace.records.end()) throw NumericalDomain("reference trace ends before t = 0.5 s");
    const WorldState start = it->world;
    auto integrate = [&](double dt) {
      WorldState w = start;
      const int n = static_cast<int>(std::llround(0.5 / dt));
      if (std::abs(n * dt - 0.5) > 1e-12) throw InvalidParameter("order study step must divide 0.5 s");
      for (int k = 0; k < n; ++k) w = step(w, loop, dt);
      return w;
    };
    const std::vector<double> steps{1e-2, 5e-3, 2.5e-3, 1.25e-3};
    const WorldState reference = integrate(steps.back() / 8.0);
    std::vector<double> err;
    for (double dt : steps) err.push_back(detail::state_distance(integrate(dt), reference));
    return detail::loglog_slope(steps, err);
  }

 private:
  void barrier_decrease(CriterionResult& r) {
    const Golden& g = golden();
    // The sampled V is reported, not gated: RK4 error over the first step
    // can exceed the decrease when the initial heading rates are large.
    r.pass = g.trace.completed() && g.worst_lyapunov_slack <= 1e-6;
    r.measured = fmt::format("max slack {:.3e} (t = {:.3f} s); largest sampled V step {:+.1e}",
                             g.worst_lyapunov_slack, g.worst_lyapunov_t, g.worst_v_increase);
    r.threshold = "slack <= 1e-6 at every step";
  }

  void forward_invariance(CriterionResult& r) {
    struct Outcome {
      std::uint64_t seed = 0;
      int n = 0;
      bool ok = false;
      std::string what;
    };
    const int runs = opt_.random_runs;
    std::vector<Outcome> outcomes(runs);
    const auto job = [this, &outcomes](int i) {
      Outcome& o = outcomes[i];
      o.seed = opt_.seed + 1000 + static_cast<std::uint64_t>(i);
      o.n = 3 + i % 4;
      try {
        const Scenario s = random_scenario(o.seed, o.n);
        const ClosedLoop loop(s);
        const SimTrace trace = enclose::run(loop);
        const MonitorReport rep = monitor(trace, loop);
        o.ok = rep.clean();
        if (!o.ok) {
          o.what = trace.violation ? trace.violation->message : "monitor check failed";
          archive(s, trace, o.seed);
        }
      } catch (const std::exception& ex) {
        o.what = ex.what();
      }
    };
    unsigned workers = opt_.workers ? opt_.workers : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min<unsigned>(workers, std::max(1, runs));
    std::vector<std::future<void>> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.push_back(std::async(std::launch::async, [&, w] {
        for (int i = static_cast<int>(w); i < runs; i += static_cast<int>(workers)) job(i);
      }));
    }
    for (auto& f : pool) f.get();

    int failures = 0;
    std::string first;
    for (const Outcome& o : outcomes) {
      if (o.ok) continue;
      if (failures++ == 0) first = fmt::format(" first: seed {} N={} ({})", o.seed, o.n, o.what);
    }
    r.pass = runs > 0 && failures == 0;
    r.measured = fmt::format("{}/{} runs clean{}", runs - failures, runs, first);
    r.threshold = "all runs clean";
  }

  void archive(const Scenario& s, const SimTrace& trace, std::uint64_t seed) const {
    if (!opt_.archive_dir) return;
    const std::filesystem::path dir = *opt_.archive_dir / fmt::format("seed_{}", seed);
    std::filesystem::create_directories(dir);
    std::ofstream(dir / "scenario.yaml") << scenario_to_yaml(s);
    std::ofstream csv(dir / "trace.csv");
    write_trace_csv(csv, trace);
  }

  AcceptanceOptions opt_;
  std::optional<Golden> golden_;
};

inline std::string format_results(const std::vector<CriterionResult>& results) {
  std::string out;
  for (const CriterionResult& r : results) {
    out += fmt::format("[{}] {} {:<22} measured: {} | threshold: {}\n", r.pass ? "PASS" : "FAIL", r.id,
                       r.key, r.measured, r.threshold);
  }
  return out;
}

}  // namespace enclose

#endif  // ENCLOSE_ACCEPTANCE_HPP
