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

#ifndef BALLBOT_TRAJECTORY_HPP
#define BALLBOT_TRAJECTORY_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace ballbot {

// ============================================================================
// Per-tick trace of a closed-loop trial
// ============================================================================

/// Diagnostic flag bits for TickRecord::flags.
inline constexpr std::uint32_t kFlagEqSaturated = 1u << 0;
inline constexpr std::uint32_t kFlagEqNoConvergence = 1u << 1;
inline constexpr std::uint32_t kFlagEqJacobianSingular = 1u << 2;
inline constexpr std::uint32_t kFlagTorqueClipped = 1u << 3;
inline constexpr std::uint32_t kFlagWrenchClamped = 1u << 4;

/// One control tick.  Kinematic fields are sampled at the tick start; the
/// command and torque fields are what the controller issued on that tick.
/// The final record of a trial holds the terminal state with the command
/// fields still in force under the last tick's zero-order hold.
struct TickRecord {
  double t = 0.0;          ///< [s]
  double theta = 0.0;      ///< chassis tilt [rad]
  double phi = 0.0;        ///< wheel angle [rad]
  double theta_dot = 0.0;  ///< [rad/s]
  double phi_dot = 0.0;    ///< [rad/s]
  double v = 0.0;          ///< ground speed r_w * phi_dot [m/s]
  double zeta = 0.0;       ///< rider lean [rad]
  double f_px = 0.0;       ///< applied rider force, chassis x [N]
  double f_pz = 0.0;       ///< applied rider force, chassis z [N]
  double tau_p = 0.0;      ///< applied rider pitch torque [N m]
  double f_px_sensed = 0.0;   ///< wrench seen by the controller [N]
  double f_pz_sensed = 0.0;   ///< [N]
  double tau_p_sensed = 0.0;  ///< [N m]
  double phi_dot_cmd_raw = 0.0;  ///< admittance candidate [rad/s]
  double phi_dot_cmd = 0.0;      ///< governed command [rad/s]
  double theta_eq = 0.0;  ///< regulator tilt reference [rad]
  double tau_eq = 0.0;    ///< feedforward torque [N m]
  double tau_ref = 0.0;   ///< torque-loop reference [N m]
  double tau = 0.0;       ///< torque delivered to the plant [N m]
  std::uint32_t flags = 0;
};

/// Why a trial stopped.
enum class StopReason {
  kFinished,       ///< ran to the configured duration
  kFallOver,       ///< |theta| reached the fall-over guard
  kPositionLimit,  ///< ball travelled past the track limit
  kNonFinite,      ///< a state or command stopped being finite
};

[[nodiscard]] inline std::string to_string(StopReason r) {
  switch (r) {
    case StopReason::kFinished: return "finished";
    case StopReason::kFallOver: return "fall_over";
    case StopReason::kPositionLimit: return "position_limit";
    case StopReason::kNonFinite: return "non_finite";
  }
  return "unknown";
}

/// Closed-loop trial trace: one record per control tick plus the terminal
/// sample, so a trial of N ticks yields N + 1 records.
struct TrajectoryLog {
  std::vector<TickRecord> records;
  StopReason stop_reason = StopReason::kFinished;
  double control_dt = 0.0;  ///< control period [s]
  std::uint64_t seed = 0;   ///< sensor-noise seed used for the trial
};

}  // namespace ballbot

#endif  // BALLBOT_TRAJECTORY_HPP
