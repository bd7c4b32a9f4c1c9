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

#ifndef BALLBOT_SIM_HPP
#define BALLBOT_SIM_HPP

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "ballbot/controllers.hpp"
#include "ballbot/rider.hpp"
#include "ballbot/trajectory.hpp"
#include "ballbot/types.hpp"

namespace ballbot {

// ============================================================================
// Deterministic sensor noise
// ============================================================================

/// Standard-normal generator built on SplitMix64 and the Box-Muller
/// transform.  Self-contained so trials replay bit-identically for a given
/// seed regardless of the standard library's distribution internals.
class GaussianNoise {
 public:
  explicit GaussianNoise(std::uint64_t seed) : state_(seed) {}

  /// Next standard-normal draw.  Consumes exactly two raw words per call.
  [[nodiscard]] double next() {
    // u1 in (0, 1] keeps the log finite; u2 in [0, 1).
    const double u1 =
        1.0 - static_cast<double>(next_word() >> 11) * 0x1.0p-53;
    const double u2 = static_cast<double>(next_word() >> 11) * 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

 private:
  [[nodiscard]] std::uint64_t next_word() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

// ============================================================================
// Closed-loop scenario
// ============================================================================

/// Rider model: anthropometrics (for gain lumping and the torso pendulum)
/// plus the scripted lean.
struct RiderSetup {
  RiderParams params{};
  LeanProfile profile{};
};

/// Interpolated physics sample between control ticks, kept only when
/// SimConfig::record_substeps is set.
struct SubstepSample {
  double t = 0.0;
  State state{};
  double tau = 0.0;  ///< torque applied during the step [N m]
};

struct SimConfig {
  double duration = 8.0;        ///< [s]
  double control_rate = 400.0;  ///< [Hz]
  int physics_substeps = 10;    ///< integrator steps per control tick
  WrenchMode wrench_mode = WrenchMode::kQuasiStatic;
  State initial_state{};
  std::uint64_t seed = 0;
  /// Standard deviation of the additive noise on each sensed wrench channel
  /// (forces in N, torque in N m).  Zero reproduces the true wrench exactly.
  double sensor_noise_std = 0.0;
  double fall_over_fraction = 0.9;  ///< of pi/2, tilt abort threshold
  double position_limit = 50.0;     ///< ball travel abort threshold [m]
  bool record_substeps = false;
};

inline void validate(const SimConfig& c) {
  if (!(c.duration > 0.0) || !(c.control_rate > 0.0)) {
    throw std::invalid_argument("SimConfig: duration and rate must be positive");
  }
  if (c.physics_substeps < 1) {
    throw std::invalid_argument("SimConfig: need at least one substep");
  }
  if (!(c.sensor_noise_std >= 0.0)) {
    throw std::invalid_argument("SimConfig: noise std must be >= 0");
  }
  if (!(c.fall_over_fraction > 0.0) || c.fall_over_fraction > 1.0) {
    throw std::invalid_argument("SimConfig: fall_over_fraction in (0, 1]");
  }
  if (!(c.position_limit > 0.0)) {
    throw std::invalid_argument("SimConfig: position_limit must be positive");
  }
}

/// Extended log with the optional substep trace.
struct SimResult {
  TrajectoryLog log;
  std::vector<SubstepSample> substeps;  ///< empty unless recorded
};

/// Runs one closed-loop trial.
///
/// Control runs at the configured rate with the delivered torque held
/// (zero order) across the physics substeps of each tick.  The rider wrench
/// used for sensing and logging is evaluated at the tick start; in dynamic
/// wrench mode it is made consistent with the torque applied over the
/// previous tick (zero on the first) since the current tick's torque does
/// not exist yet.  Inside the integrator, quasi-static wrenches are held
/// over the tick while dynamic wrenches are re-solved at every integrator
/// stage together with the chassis accelerations.
///
/// Safety clamps (|F| <= 2000 N, |tau_p| <= 500 N m) bound the wrench that
/// is logged and sensed; the flag records when they engage.  Dynamic-mode
/// physics uses the exact coupled wrench, which is finite by construction.
[[nodiscard]] SimResult run_scenario(const PlantParams& plant,
                                     const RiderSetup& rider,
                                     const ControllerConfig& controller,
                                     const SimConfig& config);

/// Runs one trial per seed, identical otherwise.  Results are in seed order.
[[nodiscard]] std::vector<SimResult> run_trial_set(
    const PlantParams& plant, const RiderSetup& rider,
    const ControllerConfig& controller, const SimConfig& config,
    const std::vector<std::uint64_t>& seeds);

}  // namespace ballbot

#endif  // BALLBOT_SIM_HPP
