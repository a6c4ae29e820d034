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


// Acceptance suite runner: one PASS/FAIL line per criterion.

#include <algorithm>
#include <cstdlib>
#include <filesystem>

#include <fmt/format.h>

#include "enclose/acceptance.hpp"

int main(int argc, char** argv) {
  enclose::AcceptanceOptions opt;
  opt.scenario_dir = ENCLOSE_SCENARIO_DIR;
  opt.archive_dir = std::filesystem::path(ENCLOSE_ARCHIVE_DIR);
  enclose::AcceptanceSuite suite(opt);
  const auto results = suite.run(argc > 1 ? argv[1] : "");
  fmt::print("{}", enclose::format_results(results));
  const bool ok = !results.empty() &&
                  std::all_of(results.begin(), results.end(), [](const auto& r) { return r.pass; });
  return ok ? EXIT_SUCCESS : EXIT_FAILURE;
}
