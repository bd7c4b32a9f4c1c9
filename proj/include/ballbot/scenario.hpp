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

#ifndef BALLBOT_SCENARIO_HPP
#define BALLBOT_SCENARIO_HPP

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "ballbot/sim.hpp"

namespace ballbot {

// ============================================================================
// Scenario files
// ============================================================================
//
// A scenario is a sectioned key = value text file describing one closed-loop
// experiment.  Sections: [plant] [rider] [controller] [shared_control]
// [profile] [sim] [output].  Every key is optional with the documented
// default; unknown sections or keys are rejected with line context.  Lines
// starting with # or ; are comments.

struct ConfigParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Raw lean-profile description; turned into a LeanProfile (with the
/// rider's max-lean clamp) at resolve time.
struct ProfileConfig {
  enum class Kind { kRampHold, kTrapezoid, kSinusoid, kScript };
  Kind kind = Kind::kRampHold;
  double start = 0.5;    ///< [s]
  double rate = 0.35;    ///< [rad/s]
  double target = 0.35;  ///< [rad]
  double hold = std::numeric_limits<double>::infinity();  ///< [s]
  double amplitude = 0.2;  ///< [rad], sinusoid
  double frequency = 0.5;  ///< [Hz], sinusoid
  std::vector<double> times;   ///< [s], script
  std::vector<double> values;  ///< [rad], script
};

/// Parsed scenario: raw configuration exactly as specified plus defaults.
/// Controller gains are not part of the file; they are synthesized from
/// plant and rider at resolve time.
struct Scenario {
  PlantParams plant{};
  /// i_w tracks m_w and r_w as a spherical shell unless the file sets it.
  bool wheel_inertia_explicit = false;
  RiderParams rider{};
  ControllerConfig controller{};
  ProfileConfig profile{};
  SimConfig sim{};
  int trials = 3;
  std::uint64_t seed = 1;
};

/// Run-ready scenario with derived quantities filled in.
struct ResolvedScenario {
  PlantParams plant{};
  RiderSetup rider{};
  ControllerConfig controller{};  ///< gains synthesized for the rider
  SimConfig sim{};
  int trials = 1;
  std::uint64_t seed = 1;
};

[[nodiscard]] Scenario parse_scenario(std::istream& in,
                                      const std::string& origin = "<stream>");
[[nodiscard]] Scenario parse_scenario_file(const std::string& path);

/// Applies one "section.key" override with a value in file syntax.  Used by
/// parameter sweeps; throws ConfigParseError on unknown paths or bad values.
void apply_override(Scenario& s, const std::string& path,
                    const std::string& value);

/// Validates and completes a scenario: recomputes the default wheel inertia
/// from the resolved wheel mass and radius when not explicit, constructs the
/// lean profile under the rider's max-lean clamp, and synthesizes the
/// personalized gains.
[[nodiscard]] ResolvedScenario resolve(const Scenario& s);

/// Writes the fully-resolved scenario as a manifest: a valid scenario file
/// listing every field with its effective value, plus informational comment
/// lines (tool version, synthesized gain vector).  Re-parsing and re-running
/// a manifest reproduces the run byte-identically.  Contains no timestamps.
void write_manifest(const Scenario& s, const GainVector& gains,
                    std::ostream& out);

/// Library and schema version advertised in manifests.
[[nodiscard]] const char* version_string();

}  // namespace ballbot

#endif  // BALLBOT_SCENARIO_HPP
