/*
 Copyright 2026 The ballbot-sim Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#ifndef BALLBOT_CLI_HPP
#define BALLBOT_CLI_HPP

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace ballbot {

// ============================================================================
// Command implementations behind the ballbot-sim executable.  The binary in
// tools/ is a thin argument parser over these functions, so everything here
// is also reachable (and tested) as a plain library call.
//
// Exit codes: 0 success, 1 runtime failure (every trial aborted, missing
// logs), 2 configuration or usage error.
// ============================================================================

/// A compare input directory lacks a readable metrics table.
struct MissingLogsError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunOptions {
  std::string scenario;       ///< scenario name or path (see find_scenario)
  std::string out_dir = "runs";
  int trials = -1;            ///< < 0 keeps the scenario's trial count
  std::int64_t seed = -1;     ///< >= 0 replaces the scenario's base seed
  bool quiet = false;
};

struct SweepOptions {
  std::string scenario;
  std::string param;          ///< override path, e.g. "rider.weight"
  std::string values;         ///< "v1,v2,..." or "first:last:count"
  std::string out_dir = "runs";
  int trials = -1;
  std::int64_t seed = -1;
  int jobs = 0;               ///< parallel points; 0 picks hardware threads
  bool quiet = false;
};

/// Locates a scenario: an existing path is used as-is; otherwise the name
/// (with .ini appended when missing) is searched in $BALLBOT_SCENARIO_DIR
/// and then in the bundled scenario directory.
[[nodiscard]] std::string find_scenario(const std::string& name_or_path);

/// Runs every trial of a scenario and writes <out>/<scenario-stem>/ with
/// trial_NNN.csv logs, manifest.ini, metrics.csv and summary.txt; the
/// summary is also printed to `out` unless quiet.
int cmd_run(const RunOptions& options, std::ostream& out, std::ostream& err);

/// Parses and resolves a scenario, reporting the effective configuration.
int cmd_validate(const std::string& scenario, std::ostream& out,
                 std::ostream& err);

/// Tabulates mean (SD) metrics of two or more run directories side by side
/// plus ratio-of-means rows against the first directory.
int cmd_compare(const std::vector<std::string>& run_dirs, std::ostream& out,
                std::ostream& err);

/// Re-runs a scenario across a list of values for one configuration key,
/// writing per-point run directories plus a sweep.csv of parameter value
/// versus synthesized gains and summary metrics.  Failing points are
/// recorded and do not stop the sweep.
int cmd_sweep(const SweepOptions& options, std::ostream& out,
              std::ostream& err);

}  // namespace ballbot

#endif  // BALLBOT_CLI_HPP
