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

// enclose: run, check and verify target-enclosing scenarios.
//
// Exit status: 0 success, 1 invalid input or I/O failure, 2 constraint
// violation or failed acceptance criterion.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ranges.h>

#include "enclose/acceptance.hpp"
#include "enclose/errors.hpp"
#include "enclose/scenario_io.hpp"
#include "enclose/sim.hpp"
#include "enclose/svg_plot.hpp"
#include "enclose/trace_io.hpp"

#ifndef ENCLOSE_SCENARIO_DIR
#define ENCLOSE_SCENARIO_DIR "scenarios"
#endif

namespace fs = std::filesystem;
using namespace enclose;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitViolation = 2;

fs::path scenario_dir() {
  const char* env = std::getenv("ENCLOSE_SCENARIO_DIR");
  return env != nullptr && *env != '\0' ? fs::path(env) : fs::path(ENCLOSE_SCENARIO_DIR);
}

Scenario load(const std::string& arg) {
  const fs::path path = locate_scenario(arg, scenario_dir());
  Scenario s = read_scenario(read_text_file(path), path.string());
  apply_env_overrides(s);
  return s;
}

int cmd_check(const std::string& arg) {
  const Scenario s = load(arg);
  const ClosedLoop loop = validate_scenario(s, arg);
  const ConstraintEnvelope& env = loop.envelope();
  fmt::print("scenario {}: N = {}, {} edges, valid\n", s.name, loop.n_agents(), loop.graph().n_edges());
  fmt::print("{:>6} {:>10} {:>10} {:>10} {:>10} {:>10}\n", "edge", "d*", "d_lower", "d_upper",
             "e_lower*", "e_upper*");
  for (int k = 0; k < loop.graph().n_edges(); ++k) {
    const EdgeEnvelope& e = env[k];
    fmt::print("{:>6} {:>10.4f} {:>10.4f} {:>10.4f} {:>10.4f} {:>10.4f}\n", loop.graph().edge_label(k),
               e.d_star, e.d_lower, e.d_upper, e.e_lower_star, e.e_upper_star);
  }
  const ControlSnapshot s0 = loop.evaluate(s.initial_world());
  for (int i = 0; i < loop.n_agents(); ++i) {
    fmt::print("agent {}: initial heading error {:.2f} deg (bound {:.1f}), settling bound {:.3f} s\n", i + 1,
               rad_to_deg(s0.e_theta[i]), s.heading_bound_deg[i],
               settling_time_bound(s.k_h1[i], s.k_h2[i]));
  }
  return kExitOk;
}

int cmd_run(const std::string& arg, const std::string& out_arg, bool plots, bool full_rate) {
  Scenario s = load(arg);
  if (full_rate) s.run.full_rate = true;
  const ClosedLoop loop = validate_scenario(s, arg);
  const fs::path out = out_arg.empty() ? fs::path("runs") / s.name : fs::path(out_arg);
  fs::create_directories(out);

  const auto start = std::chrono::steady_clock::now();
  const SimTrace trace = run(loop);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const MonitorReport report = monitor(trace, loop);
  const Metrics m = metrics(trace);

  {
    std::ofstream csv(out / "trace.csv");
    if (!csv) throw IoError(fmt::format("cannot write '{}'", (out / "trace.csv").string()));
    write_trace_csv(csv, trace);
  }
  std::ofstream(out / "summary.json") << run_summary(loop, trace, report, m, wall).dump(2) << '\n';
  std::ofstream(out / "scenario.yaml") << scenario_to_yaml(s);
  if (plots || s.outputs.plots) (void)write_run_plots(out / "plots", loop, trace);

  fmt::print("{}: {} records to t = {:.3f} s in {:.2f} s -> {}\n", s.name, trace.records.size(),
             m.final_time, wall, out.string());
  for (const CheckResult* c : {&report.static_bounds, &report.time_varying_bounds,
                               &report.heading_bounds, &report.rigidity}) {
    fmt::print("  {:<36} {}  worst margin {:.4g}\n", c->name, c->ok() ? "ok  " : "FAIL",
               c->worst_margin);
  }
  if (trace.violation) {
    const RunViolation& v = *trace.violation;
    fmt::print("  run halted at t = {:.4f} s: {} {} ({})\n", v.t, v.kind, v.index, v.message);
  }
  return report.clean() ? kExitOk : kExitViolation;
}

int cmd_verify(const std::string& filter, const std::string& archive, int runs) {
  AcceptanceOptions opt;
  opt.scenario_dir = scenario_dir();
  if (!archive.empty()) opt.archive_dir = archive;
  opt.random_runs = runs;
  AcceptanceSuite suite(opt);
  const std::vector<CriterionResult> results = suite.run(filter);
  if (results.empty()) throw InvalidParameter(fmt::format("no criterion matches '{}'", filter));
  fmt::print("{}", format_results(results));
  const bool ok = std::all_of(results.begin(), results.end(), [](const auto& r) { return r.pass; });
  fmt::print("{} of {} criteria passed\n",
             std::count_if(results.begin(), results.end(), [](const auto& r) { return r.pass; }),
             results.size());
  return ok ? kExitOk : kExitViolation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distance-constrained target enclosing with unicycle agents"};
  app.require_subcommand(1);

  std::string scenario, out, filter, archive;
  bool plots = false, full_rate = false;
  int runs = 50;

  CLI::App* run_cmd = app.add_subcommand("run", "simulate a scenario and write trace, summary and plots");
  run_cmd->add_option("scenario", scenario, "scenario file or bundled scenario name")->required();
  run_cmd->add_option("--out", out, "output directory (default runs/<name>)");
  run_cmd->add_flag("--plots", plots, "write SVG plots");
  run_cmd->add_flag("--full-rate", full_rate, "log every integration step");

  CLI::App* check_cmd = app.add_subcommand("check", "validate a scenario without running it");
  check_cmd->add_option("scenario", scenario, "scenario file or bundled scenario name")->required();

  CLI::App* verify_cmd = app.add_subcommand("verify", "run the acceptance suite");
  verify_cmd->add_option("--filter", filter, "only criteria whose key contains NAME (or id)");
  verify_cmd->add_option("--archive", archive, "directory for traces of failing sweep runs");
  verify_cmd->add_option("--runs", runs, "number of randomized sweep scenarios")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) return cmd_run(scenario, out, plots, full_rate);
    if (check_cmd->parsed()) return cmd_check(scenario);
    return cmd_verify(filter, archive, runs);
  } catch (const ValidationError& ex) {
    fmt::print(stderr, "invalid scenario [{}]: {}\n", ex.field(), ex.what());
  } catch (const ParseError& ex) {
    fmt::print(stderr, "parse error: {}\n", ex.what());
  } catch (const IoError& ex) {
    fmt::print(stderr, "I/O error: {}\n", ex.what());
  } catch (const std::exception& ex) {
    fmt::print(stderr, "error: {}\n", ex.what());
  }
  return kExitInvalid;
}
