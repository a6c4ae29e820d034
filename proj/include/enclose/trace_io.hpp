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

// Trace table (CSV) and run summary (JSON) serialization.
//
// Column layout:
//   t, target_x, target_y,
//   agent_<i>_{x,y,theta,v,w,e_theta}          for i = 1..N
//   edge_<i>_<j>_{d,e,eta,xi,sigma,e_upper_t,e_lower_t}  in canonical order
//   sigma_min_R, violation

#ifndef ENCLOSE_TRACE_IO_HPP
#define ENCLOSE_TRACE_IO_HPP

#include <charconv>
#include <cmath>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "enclose/errors.hpp"
#include "enclose/rigidity.hpp"
#include "enclose/sim.hpp"

namespace enclose {

inline constexpr std::string_view kAgentFields[] = {"x", "y", "theta", "v", "w", "e_theta"};
inline constexpr std::string_view kEdgeFields[] = {"d",     "e",         "eta",      "xi",
                                                   "sigma", "e_upper_t", "e_lower_t"};

inline std::vector<std::string> trace_columns(int n_agents) {
  const SensingGraph graph(n_agents);
  std::vector<std::string> cols{"t", "target_x", "target_y"};
  for (int i = 1; i <= n_agents; ++i) {
    for (std::string_view f : kAgentFields) cols.push_back(fmt::format("agent_{}_{}", i, f));
  }
  for (int k = 0; k < graph.n_edges(); ++k) {
    for (std::string_view f : kEdgeFields) {
      cols.push_back(fmt::format("edge_{}_{}", graph.edge_label(k), f));
    }
  }
  cols.push_back("sigma_min_R");
  cols.push_back("violation");
  return cols;
}

namespace detail {

inline void put(std::string& line, double v) {
  line += fmt::format("{:.16e},", v);
}

}  // namespace detail

inline void write_trace_csv(std::ostream& out, const SimTrace& trace) {
  const std::vector<std::string> cols = trace_columns(trace.n_agents);
  for (std::size_t c = 0; c < cols.size(); ++c) out << (c ? "," : "") << cols[c];
  out << '\n';
  std::string line;
  for (const TraceRecord& r : trace.records) {
    line.clear();
    detail::put(line, r.world.t);
    detail::put(line, r.world.target.x());
    detail::put(line, r.world.target.y());
    for (int i = 0; i < trace.n_agents; ++i) {
      const Pose& p = r.world.agents[i];
      detail::put(line, p.x);
      detail::put(line, p.y);
      detail::put(line, p.theta);
      detail::put(line, r.v[i]);
      detail::put(line, r.w[i]);
      detail::put(line, r.e_theta[i]);
    }
    for (std::size_t k = 0; k < r.error.size(); ++k) {
      detail::put(line, r.distance[k]);
      detail::put(line, r.error[k]);
      detail::put(line, r.eta[k]);
      detail::put(line, r.xi[k]);
      detail::put(line, r.sigma[k]);
      detail::put(line, r.e_upper_t[k]);
      detail::put(line, r.e_lower_t[k]);
    }
    detail::put(line, r.sigma_min_r);
    line += r.violation ? "1" : "0";
    out << line << '\n';
  }
}

/// What a trace header says about the run that produced it.
struct TraceLayout {
  int n_agents = 0;
  std::vector<Edge> edges;
};

namespace detail {

inline std::vector<std::string> split_csv(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    out.emplace_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (!out.empty() && !out.back().empty() && out.back().back() == '\r') out.back().pop_back();
  return out;
}

inline int parse_int(std::string_view s) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ParseError(fmt::format("trace header: '{}' is not an index", s));
  }
  return v;
}

}  // namespace detail

/// Reconstructs (N, edge order) from the header row alone.
inline TraceLayout parse_trace_header(std::string_view header) {
  const std::vector<std::string> cols = detail::split_csv(header);
  TraceLayout layout;
  for (const std::string& c : cols) {
    if (c.starts_with("agent_") && c.ends_with("_x")) ++layout.n_agents;
    if (c.starts_with("edge_") && c.ends_with("_d")) {
      const std::string_view mid = std::string_view(c).substr(5, c.size() - 7);
      const std::size_t us = mid.find('_');
      if (us == std::string_view::npos) throw ParseError(fmt::format("trace header: bad column '{}'", c));
      layout.edges.push_back({detail::parse_int(mid.substr(0, us)), detail::parse_int(mid.substr(us + 1))});
    }
  }
  if (layout.n_agents < 2) throw ParseError("trace header: fewer than two agent column groups");
  if (cols != trace_columns(layout.n_agents)) {
    throw ParseError(fmt::format("trace header does not match the layout for N = {}", layout.n_agents));
  }
  return layout;
}

/// Header plus numeric rows, for post-processing and tests.
struct TraceTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  std::size_t column(std::string_view name) const {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (columns[c] == name) return c;
    }
    throw ParseError(fmt::format("trace has no column '{}'", name));
  }
};

inline TraceTable read_trace_csv(std::istream& in) {
  TraceTable table;
  std::string line;
  if (!std::getline(in, line)) throw ParseError("trace: empty input");
  (void)parse_trace_header(line);
  table.columns = detail::split_csv(line);
  std::size_t row_no = 1;
  while (std::getline(in, line)) {
    ++row_no;
    if (line.empty()) continue;
    const std::vector<std::string> cells = detail::split_csv(line);
    if (cells.size() != table.columns.size()) {
      throw ParseError(fmt::format("trace row {}: {} cells, expected {}", row_no, cells.size(),
                                   table.columns.size()));
    }
    std::vector<double> row;
    row.reserve(cells.size());
    for (const std::string& cell : cells) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        // stod rejects "nan" spellings on some libcs; accept them explicitly.
        if (cell == "nan" || cell == "-nan") {
          row.push_back(std::nan(""));
        } else {
          throw ParseError(fmt::format("trace row {}: '{}' is not a number", row_no, cell));
        }
      }
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

namespace detail {

inline nlohmann::json optional_number(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

inline nlohmann::json finite_or_null(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

inline nlohmann::json check_json(const CheckResult& c, const SimTrace& trace) {
  nlohmann::json j;
  j["name"] = c.name;
  j["ok"] = c.ok();
  j["first_failure_t"] =
      c.first_failure ? nlohmann::json(trace.records[*c.first_failure].world.t) : nlohmann::json(nullptr);
  j["worst_margin"] = finite_or_null(c.worst_margin);
  j["worst_t"] = trace.records.empty() ? nlohmann::json(nullptr)
                                       : nlohmann::json(trace.records[c.worst_record].world.t);
  return j;
}

}  // namespace detail

inline nlohmann::json scenario_to_json(const Scenario& s) {
  nlohmann::json j;
  j["name"] = s.name;
  j["formation"] = {{"radius", s.formation.radius}, {"angles_deg", s.formation.separation_deg}};
  j["ranges"] = {{"lower", s.ranges.lower}, {"upper", s.ranges.upper}};
  nlohmann::json ppc = nlohmann::json::array();
  for (const PerformanceFunction& p : s.perf) {
    ppc.push_back({{"beta0", p.beta0}, {"beta_inf", p.beta_inf}, {"gamma", p.gamma}});
  }
  j["ppc"] = ppc;
  j["gains"] = {{"k", s.k_edge}, {"k_h1", s.k_h1}, {"k_h2", s.k_h2}};
  j["heading_bound_deg"] = s.heading_bound_deg;
  j["mu"] = s.mu;
  nlohmann::json agents = nlohmann::json::array();
  for (const AgentInit& a : s.initial_agents) agents.push_back({a.x, a.y, a.heading_deg});
  j["initial"] = {{"target", {s.initial_target.x(), s.initial_target.y()}}, {"agents", agents}};
  j["target_motion"] = {{"model", model_name(s.target.model)},
                        {"constant", {s.target.constant.x(), s.target.constant.y()}},
                        {"amplitude", s.target.amplitude},
                        {"frequency", s.target.frequency},
                        {"phase_deg", s.target.phase_deg},
                        {"speed_bound", s.speed_bound}};
  j["run"] = {{"duration", s.run.duration},
              {"dt", s.run.dt},
              {"log_decimation", s.run.log_decimation},
              {"full_rate", s.run.full_rate},
              {"max_refinement", s.run.max_refinement}};
  j["outputs"] = {{"plots", s.outputs.plots}, {"rigidity_floor", s.rigidity_floor}};
  j["seed"] = s.seed ? nlohmann::json(*s.seed) : nlohmann::json(nullptr);
  return j;
}

/// Metrics, monitor report and parameter echo for one run.
inline nlohmann::json run_summary(const ClosedLoop& loop, const SimTrace& trace,
                                  const MonitorReport& report, const Metrics& m,
                                  double wall_seconds) {
  nlohmann::json j;
  j["scenario"] = loop.scenario().name;
  j["completed"] = trace.completed();
  j["records"] = trace.records.size();
  j["wall_seconds"] = wall_seconds;
  j["refined_steps"] = trace.refined_steps;
  j["max_refinement_depth"] = trace.max_refinement_depth;
  if (trace.violation) {
    const RunViolation& v = *trace.violation;
    j["violation"] = {{"kind", v.kind}, {"index", v.index}, {"step", v.step}, {"t", v.t},
                      {"message", v.message}};
  } else {
    j["violation"] = nullptr;
  }

  nlohmann::json checks = nlohmann::json::array();
  for (const CheckResult* c : {&report.static_bounds, &report.time_varying_bounds,
                               &report.heading_bounds, &report.rigidity}) {
    checks.push_back(detail::check_json(*c, trace));
  }
  j["monitor"] = {{"clean", report.clean()},
                  {"terminated_early", report.terminated_early},
                  {"rigidity_floor", loop.rigidity_floor()},
                  {"checks", checks}};

  nlohmann::json edges = nlohmann::json::array();
  for (std::size_t k = 0; k < m.edges.size(); ++k) {
    edges.push_back({{"edge", m.edges[k].label},
                     {"d_star", loop.envelope()[k].d_star},
                     {"final_abs_error", m.edges[k].final_abs_error},
                     {"time_to_tolerance", detail::optional_number(m.edges[k].time_to_tolerance)}});
  }
  nlohmann::json agents = nlohmann::json::array();
  const std::vector<double> e0 = trace.records.empty()
                                     ? std::vector<double>{}
                                     : trace.records.front().e_theta;
  for (std::size_t i = 0; i < m.agents.size(); ++i) {
    nlohmann::json a;
    a["agent"] = i + 1;
    a["heading_settling_time"] = detail::optional_number(m.agents[i].heading_settling_time);
    a["settling_time_bound"] =
        settling_time_bound(loop.gains().k_h1[i], loop.gains().k_h2[i]);
    a["final_velocity_mismatch"] = detail::finite_or_null(m.agents[i].final_velocity_mismatch);
    a["initial_heading_error_deg"] =
        i < e0.size() ? detail::finite_or_null(rad_to_deg(e0[i])) : nlohmann::json(nullptr);
    agents.push_back(a);
  }
  j["metrics"] = {{"final_time", m.final_time},
                  {"edges", edges},
                  {"agents", agents},
                  {"initial_sigma_min_R", m.initial_sigma_min_r},
                  {"min_sigma_min_R", m.min_sigma_min_r},
                  {"max_rigidity_dip", m.max_rigidity_dip},
                  {"initial_sigma_norm", detail::finite_or_null(m.initial_sigma_norm)},
                  {"final_sigma_norm", detail::finite_or_null(m.final_sigma_norm)}};
  j["parameters"] = scenario_to_json(loop.scenario());
  return j;
}

}  // namespace enclose

#endif  // ENCLOSE_TRACE_IO_HPP
