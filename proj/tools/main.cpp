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

// ballbot-sim: closed-loop rider-ballbot simulation runner.
//
// Subcommands:
//   run       execute a scenario's trials, writing logs + metrics + manifest
//   validate  parse and resolve a scenario without running it
//   compare   tabulate metrics of two or more run directories side by side
//   sweep     re-run a scenario across values of one configuration key
//
// All the work happens in the ballbot library (ballbot/cli.hpp); this file
// only maps arguments onto it.

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ballbot/cli.hpp"
#include "ballbot/scenario.hpp"

int main(int argc, char** argv) {
  CLI::App app{"rider-ballbot closed-loop simulation suite"};
  app.set_version_flag("--version", std::string(ballbot::version_string()));
  app.require_subcommand(1);

  ballbot::RunOptions run_options;
  CLI::App* run = app.add_subcommand(
      "run", "run every trial of a scenario and write a run directory");
  run->add_option("scenario", run_options.scenario,
                  "scenario name or path (searched in $BALLBOT_SCENARIO_DIR "
                  "and the bundled set)")
      ->required();
  run->add_option("--out", run_options.out_dir,
                  "parent directory for run output (default: runs)");
  run->add_option("--trials", run_options.trials,
                  "override the scenario's trial count");
  run->add_option("--seed", run_options.seed,
                  "override the scenario's base seed");
  run->add_flag("--quiet", run_options.quiet,
                "print only the output directory");

  std::string validate_scenario;
  CLI::App* validate = app.add_subcommand(
      "validate", "parse and resolve a scenario, reporting the result");
  validate->add_option("scenario", validate_scenario, "scenario name or path")
      ->required();

  std::vector<std::string> compare_dirs;
  CLI::App* compare = app.add_subcommand(
      "compare", "tabulate run directories side by side with ratio rows");
  compare->add_option("dirs", compare_dirs, "two or more run directories")
      ->expected(-2);

  ballbot::SweepOptions sweep_options;
  CLI::App* sweep = app.add_subcommand(
      "sweep", "re-run a scenario across values of one configuration key");
  sweep->add_option("scenario", sweep_options.scenario,
                    "scenario name or path")
      ->required();
  sweep->add_option("--param", sweep_options.param,
                    "configuration key to vary, e.g. rider.weight")
      ->required();
  sweep->add_option("--values", sweep_options.values,
                    "comma-separated values or first:last:count")
      ->required();
  sweep->add_option("--out", sweep_options.out_dir,
                    "parent directory for sweep output (default: runs)");
  sweep->add_option("--trials", sweep_options.trials,
                    "override the scenario's trial count");
  sweep->add_option("--seed", sweep_options.seed,
                    "override the scenario's base seed");
  sweep->add_option("--jobs", sweep_options.jobs,
                    "parallel sweep points (default: hardware threads)");
  sweep->add_flag("--quiet", sweep_options.quiet,
                  "print only the sweep summary line");

  CLI11_PARSE(app, argc, argv);

  if (*run) {
    return ballbot::cmd_run(run_options, std::cout, std::cerr);
  }
  if (*validate) {
    return ballbot::cmd_validate(validate_scenario, std::cout, std::cerr);
  }
  if (*compare) {
    return ballbot::cmd_compare(compare_dirs, std::cout, std::cerr);
  }
  if (*sweep) {
    return ballbot::cmd_sweep(sweep_options, std::cout, std::cerr);
  }
  return 2;
}
