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

// Scenario files (YAML). Angles are degrees in files; distances meters;
// time seconds. Per-edge and per-agent fields accept either one scalar or a
// full list. See scenarios/paper_sec6.yaml for the layout.

#ifndef ENCLOSE_SCENARIO_IO_HPP
#define ENCLOSE_SCENARIO_IO_HPP

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <fmt/ranges.h>
#include <yaml-cpp/yaml.h>

#include "enclose/errors.hpp"
#include "enclose/sim.hpp"

namespace enclose {

namespace detail {

inline std::string at_line(const YAML::Node& n) {
  return n.Mark().is_null() ? std::string("?") : std::to_string(n.Mark().line + 1);
}

class YamlReader {
 public:
  explicit YamlReader(std::string source) : source_(std::move(source)) {}

  YAML::Node required(const YAML::Node& parent, const std::string& key,
                      const std::string& path) const {
    if (!parent.IsMap() || !parent[key]) {
      throw ValidationError(path, fmt::format("{}:{}: missing required field '{}'", source_,
                                              at_line(parent), path));
    }
    return parent[key];
  }

  double number(const YAML::Node& n, const std::string& path) const {
    try {
      return n.as<double>();
    } catch (const YAML::Exception&) {
      throw ParseError(fmt::format("{}:{}: field '{}' must be a number", source_, at_line(n), path));
    }
  }

  int integer(const YAML::Node& n, const std::string& path) const {
    try {
      return n.as<int>();
    } catch (const YAML::Exception&) {
      throw ParseError(
          fmt::format("{}:{}: field '{}' must be an integer", source_, at_line(n), path));
    }
  }

  bool boolean(const YAML::Node& n, const std::string& path) const {
    try {
      return n.as<bool>();
    } catch (const YAML::Exception&) {
      throw ParseError(fmt::format("{}:{}: field '{}' must be true/false", source_, at_line(n), path));
    }
  }

  std::string text(const YAML::Node& n, const std::string& path) const {
    if (!n.IsScalar()) {
      throw ParseError(fmt::format("{}:{}: field '{}' must be a scalar", source_, at_line(n), path));
    }
    return n.as<std::string>();
  }

  std::vector<double> numbers(const YAML::Node& n, const std::string& path) const {
    if (!n.IsSequence()) {
      throw ParseError(fmt::format("{}:{}: field '{}' must be a list", source_, at_line(n), path));
    }
    std::vector<double> out;
    for (std::size_t i = 0; i < n.size(); ++i) out.push_back(number(n[i], path));
    return out;
  }

  /// Scalar broadcast to `count`, or a list of exactly `count` numbers.
  std::vector<double> broadcast(const YAML::Node& n, std::size_t count,
                                const std::string& path) const {
    if (n.IsScalar()) return std::vector<double>(count, number(n, path));
    std::vector<double> v = numbers(n, path);
    if (v.size() != count) {
      throw ValidationError(path, fmt::format("{}:{}: field '{}' needs 1 or {} values, got {}",
                                              source_, at_line(n), path, count, v.size()));
    }
    return v;
  }

  Vec2 vec2(const YAML::Node& n, const std::string& path) const {
    const std::vector<double> v = numbers(n, path);
    if (v.size() != 2) {
      throw ValidationError(path, fmt::format("{}:{}: field '{}' must be [x, y]", source_,
                                              at_line(n), path));
    }
    return {v[0], v[1]};
  }

  const std::string& source() const noexcept { return source_; }

 private:
  std::string source_;
};

}  // namespace detail

/// Reads a scenario from YAML text without running feasibility checks.
inline Scenario read_scenario(const std::string& text, const std::string& source = "<scenario>") {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& ex) {
    throw ParseError(fmt::format("{}:{}: {}", source, ex.mark.line + 1, ex.msg));
  }
  if (!root.IsMap()) throw ParseError(fmt::format("{}: top level must be a mapping", source));
  const detail::YamlReader rd(source);

  Scenario s;
  s.name = root["name"] ? rd.text(root["name"], "name")
                        : std::filesystem::path(source).stem().string();

  const YAML::Node formation = rd.required(root, "formation", "formation");
  s.formation.radius = rd.number(rd.required(formation, "radius", "formation.radius"), "formation.radius");
  s.formation.separation_deg =
      rd.numbers(rd.required(formation, "angles", "formation.angles"), "formation.angles");
  if (s.formation.separation_deg.empty()) {
    throw ValidationError("formation.angles",
                          fmt::format("{}:{}: at least one separation angle is required", source,
                                      detail::at_line(formation["angles"])));
  }
  const auto n = static_cast<std::size_t>(s.n_agents());
  const std::size_t m = 2 * n - 1;

  const YAML::Node ranges = rd.required(root, "ranges", "ranges");
  const std::vector<double> cl =
      rd.broadcast(rd.required(ranges, "chain_lower", "ranges.chain_lower"), n - 1, "ranges.chain_lower");
  const std::vector<double> cu =
      rd.broadcast(rd.required(ranges, "chain_upper", "ranges.chain_upper"), n - 1, "ranges.chain_upper");
  const std::vector<double> rl =
      rd.broadcast(rd.required(ranges, "radial_lower", "ranges.radial_lower"), n, "ranges.radial_lower");
  const std::vector<double> ru =
      rd.broadcast(rd.required(ranges, "radial_upper", "ranges.radial_upper"), n, "ranges.radial_upper");
  s.ranges.lower = cl;
  s.ranges.lower.insert(s.ranges.lower.end(), rl.begin(), rl.end());
  s.ranges.upper = cu;
  s.ranges.upper.insert(s.ranges.upper.end(), ru.begin(), ru.end());

  const YAML::Node ppc = rd.required(root, "ppc", "ppc");
  const std::vector<double> b0 = rd.broadcast(rd.required(ppc, "beta0", "ppc.beta0"), m, "ppc.beta0");
  const std::vector<double> binf =
      rd.broadcast(rd.required(ppc, "beta_inf", "ppc.beta_inf"), m, "ppc.beta_inf");
  const std::vector<double> gam = rd.broadcast(rd.required(ppc, "gamma", "ppc.gamma"), m, "ppc.gamma");
  for (std::size_t k = 0; k < m; ++k) s.perf.push_back({b0[k], binf[k], gam[k]});

  const YAML::Node gains = rd.required(root, "gains", "gains");
  s.k_edge = rd.broadcast(rd.required(gains, "k", "gains.k"), m, "gains.k");
  s.k_h1 = rd.broadcast(rd.required(gains, "k_h1", "gains.k_h1"), n, "gains.k_h1");
  s.k_h2 = rd.broadcast(rd.required(gains, "k_h2", "gains.k_h2"), n, "gains.k_h2");

  s.heading_bound_deg =
      rd.broadcast(rd.required(root, "heading_bound", "heading_bound"), n, "heading_bound");
  s.mu = root["mu"] ? rd.number(root["mu"], "mu") : kDefaultMu;

  const YAML::Node initial = rd.required(root, "initial", "initial");
  s.initial_target = rd.vec2(rd.required(initial, "target", "initial.target"), "initial.target");
  const YAML::Node agents = rd.required(initial, "agents", "initial.agents");
  if (!agents.IsSequence()) {
    throw ParseError(fmt::format("{}:{}: 'initial.agents' must be a list of [x, y, heading]",
                                 source, detail::at_line(agents)));
  }
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const std::vector<double> v = rd.numbers(agents[i], "initial.agents");
    if (v.size() != 3) {
      throw ValidationError("initial.agents", fmt::format("{}:{}: agent pose must be [x, y, heading_deg]",
                                                          source, detail::at_line(agents[i])));
    }
    s.initial_agents.push_back({v[0], v[1], v[2]});
  }
  if (s.initial_agents.size() != n) {
    throw ValidationError("initial.agents",
                          fmt::format("{}:{}: {} angles imply {} agents, got {} poses", source,
                                      detail::at_line(agents), n - 1, n, s.initial_agents.size()));
  }

  const YAML::Node motion = rd.required(root, "target_motion", "target_motion");
  const std::string model = rd.text(rd.required(motion, "model", "target_motion.model"), "target_motion.model");
  if (model == "constant") {
    s.target.model = TargetMotion::Model::kConstant;
  } else if (model == "sine_y") {
    s.target.model = TargetMotion::Model::kSineY;
  } else if (model == "circular") {
    s.target.model = TargetMotion::Model::kCircular;
  } else {
    throw ValidationError("target_motion.model",
                          fmt::format("{}:{}: unknown target model '{}' (constant, sine_y, circular)",
                                      source, detail::at_line(motion["model"]), model));
  }
  s.target.constant =
      rd.vec2(rd.required(motion, "constant", "target_motion.constant"), "target_motion.constant");
  if (s.target.model != TargetMotion::Model::kConstant) {
    s.target.amplitude = rd.number(rd.required(motion, "amplitude", "target_motion.amplitude"),
                                   "target_motion.amplitude");
    s.target.frequency = rd.number(rd.required(motion, "frequency", "target_motion.frequency"),
                                   "target_motion.frequency");
    if (motion["phase"]) s.target.phase_deg = rd.number(motion["phase"], "target_motion.phase");
  }
  s.speed_bound = rd.number(rd.required(motion, "speed_bound", "target_motion.speed_bound"),
                            "target_motion.speed_bound");

  const YAML::Node run = rd.required(root, "run", "run");
  s.run.duration = rd.number(rd.required(run, "duration", "run.duration"), "run.duration");
  if (run["dt"]) s.run.dt = rd.number(run["dt"], "run.dt");
  if (run["log_decimation"]) s.run.log_decimation = rd.integer(run["log_decimation"], "run.log_decimation");
  if (run["full_rate"]) s.run.full_rate = rd.boolean(run["full_rate"], "run.full_rate");
  if (run["max_refinement"]) {
    s.run.max_refinement = rd.integer(run["max_refinement"], "run.max_refinement");
  }

  if (const YAML::Node out = root["outputs"]) {
    if (out["plots"]) s.outputs.plots = rd.boolean(out["plots"], "outputs.plots");
    if (out["rigidity_floor"]) {
      s.rigidity_floor = rd.number(out["rigidity_floor"], "outputs.rigidity_floor");
    }
  }
  if (root["seed"]) {
    try {
      s.seed = root["seed"].as<std::uint64_t>();
    } catch (const YAML::Exception&) {
      throw ParseError(fmt::format("{}:{}: 'seed' must be a nonnegative integer", source,
                                   detail::at_line(root["seed"])));
    }
  }
  return s;
}

/// Validates a scenario eagerly. Every failure comes back as a
/// ValidationError carrying the field name.
inline ClosedLoop validate_scenario(const Scenario& s, const std::string& source = "<scenario>") {
  try {
    return ClosedLoop(s);
  } catch (const ValidationError& ex) {
    throw ValidationError(ex.field(), fmt::format("{}: {}: {}", source, ex.field(), ex.what()));
  } catch (const InitialConditionViolation& ex) {
    throw ValidationError("initial", fmt::format("{}: initial: {}", source, ex.what()));
  } catch (const DegenerateBound& ex) {
    throw ValidationError("mu", fmt::format("{}: mu: {}", source, ex.what()));
  } catch (const Error& ex) {
    throw ValidationError("scenario", fmt::format("{}: {}", source, ex.what()));
  }
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open '{}'", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Reads and validates a scenario file.
inline Scenario parse_scenario(const std::filesystem::path& path) {
  Scenario s = read_scenario(read_text_file(path), path.string());
  (void)validate_scenario(s, path.string());
  return s;
}

/// Resolves a scenario argument: an existing file path wins, otherwise
/// `<dir>/<name>.yaml`. A miss is an IoError, never a silent fallback.
inline std::filesystem::path locate_scenario(const std::string& name_or_path,
                                             const std::filesystem::path& dir) {
  if (std::filesystem::is_regular_file(name_or_path)) return name_or_path;
  const std::filesystem::path bundled = dir / (name_or_path + ".yaml");
  if (std::filesystem::is_regular_file(bundled)) return bundled;
  throw IoError(fmt::format("scenario '{}' not found (looked for '{}' and '{}')", name_or_path,
                            name_or_path, bundled.string()));
}

namespace detail {

inline std::string list(const std::vector<double>& v) { return fmt::format("[{}]", fmt::join(v, ", ")); }

}  // namespace detail

/// Writes the scenario back as YAML with every list expanded. Numbers use
/// the shortest round-trip representation, so read_scenario(echo) == s.
inline std::string scenario_to_yaml(const Scenario& s) {
  using detail::list;
  const int n = s.n_agents();
  std::vector<double> cl(s.ranges.lower.begin(), s.ranges.lower.begin() + (n - 1));
  std::vector<double> rl(s.ranges.lower.begin() + (n - 1), s.ranges.lower.end());
  std::vector<double> cu(s.ranges.upper.begin(), s.ranges.upper.begin() + (n - 1));
  std::vector<double> ru(s.ranges.upper.begin() + (n - 1), s.ranges.upper.end());
  std::vector<double> b0, binf, gam;
  for (const PerformanceFunction& p : s.perf) {
    b0.push_back(p.beta0);
    binf.push_back(p.beta_inf);
    gam.push_back(p.gamma);
  }

  std::string out;
  auto line = [&out](const std::string& l) { out += l + "\n"; };
  line(fmt::format("name: \"{}\"", s.name));
  line("formation:");
  line(fmt::format("  radius: {}", s.formation.radius));
  line(fmt::format("  angles: {}", list(s.formation.separation_deg)));
  line("ranges:");
  line(fmt::format("  chain_lower: {}", list(cl)));
  line(fmt::format("  chain_upper: {}", list(cu)));
  line(fmt::format("  radial_lower: {}", list(rl)));
  line(fmt::format("  radial_upper: {}", list(ru)));
  line("ppc:");
  line(fmt::format("  beta0: {}", list(b0)));
  line(fmt::format("  beta_inf: {}", list(binf)));
  line(fmt::format("  gamma: {}", list(gam)));
  line("gains:");
  line(fmt::format("  k: {}", list(s.k_edge)));
  line(fmt::format("  k_h1: {}", list(s.k_h1)));
  line(fmt::format("  k_h2: {}", list(s.k_h2)));
  line(fmt::format("heading_bound: {}", list(s.heading_bound_deg)));
  line(fmt::format("mu: {}", s.mu));
  line("initial:");
  line(fmt::format("  target: [{}, {}]", s.initial_target.x(), s.initial_target.y()));
  line("  agents:");
  for (const AgentInit& a : s.initial_agents) {
    line(fmt::format("    - [{}, {}, {}]", a.x, a.y, a.heading_deg));
  }
  line("target_motion:");
  line(fmt::format("  model: {}", model_name(s.target.model)));
  line(fmt::format("  constant: [{}, {}]", s.target.constant.x(), s.target.constant.y()));
  if (s.target.model != TargetMotion::Model::kConstant) {
    line(fmt::format("  amplitude: {}", s.target.amplitude));
    line(fmt::format("  frequency: {}", s.target.frequency));
    line(fmt::format("  phase: {}", s.target.phase_deg));
  }
  line(fmt::format("  speed_bound: {}", s.speed_bound));
  line("run:");
  line(fmt::format("  duration: {}", s.run.duration));
  line(fmt::format("  dt: {}", s.run.dt));
  line(fmt::format("  log_decimation: {}", s.run.log_decimation));
  line(fmt::format("  full_rate: {}", s.run.full_rate));
  line(fmt::format("  max_refinement: {}", s.run.max_refinement));
  line("outputs:");
  line(fmt::format("  plots: {}", s.outputs.plots));
  line(fmt::format("  rigidity_floor: {}", s.rigidity_floor));
  if (s.seed) line(fmt::format("seed: {}", *s.seed));
  return out;
}

/// Environment lookup, injectable for tests.
using EnvLookup = std::function<const char*(const char*)>;

inline const char* process_env(const char* name) { return std::getenv(name); }

/// Applies SIM_* overrides used by sweep tooling:
///   SIM_K, SIM_KH1, SIM_KH2, SIM_HEADING_BOUND (deg), SIM_MU, SIM_DT,
///   SIM_DURATION, SIM_LOG_DECIMATION.
/// Scalar overrides replace every per-edge / per-agent entry.
inline void apply_env_overrides(Scenario& s, const EnvLookup& env = process_env) {
  auto value = [&](const char* name) -> std::optional<double> {
    const char* raw = env(name);
    if (raw == nullptr || *raw == '\0') return std::nullopt;
    char* end = nullptr;
    const double v = std::strtod(raw, &end);
    if (end == raw || *end != '\0') {
      throw ValidationError(name, fmt::format("environment override {}='{}' is not a number", name, raw));
    }
    return v;
  };
  if (auto v = value("SIM_K")) std::fill(s.k_edge.begin(), s.k_edge.end(), *v);
  if (auto v = value("SIM_KH1")) std::fill(s.k_h1.begin(), s.k_h1.end(), *v);
  if (auto v = value("SIM_KH2")) std::fill(s.k_h2.begin(), s.k_h2.end(), *v);
  if (auto v = value("SIM_HEADING_BOUND")) {
    std::fill(s.heading_bound_deg.begin(), s.heading_bound_deg.end(), *v);
  }
  if (auto v = value("SIM_MU")) s.mu = *v;
  if (auto v = value("SIM_DT")) s.run.dt = *v;
  if (auto v = value("SIM_DURATION")) s.run.duration = *v;
  if (auto v = value("SIM_LOG_DECIMATION")) s.run.log_decimation = static_cast<int>(*v);
}

}  // namespace enclose

#endif  // ENCLOSE_SCENARIO_IO_HPP
