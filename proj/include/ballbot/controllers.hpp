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

#ifndef BALLBOT_CONTROLLERS_HPP
#define BALLBOT_CONTROLLERS_HPP

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Core>

#include "ballbot/equilibrium.hpp"
#include "ballbot/gains.hpp"
#include "ballbot/types.hpp"

namespace ballbot {

// ============================================================================
// Admittance: rider torque -> drive-speed candidate
// ============================================================================

/// Virtual rigid body the rider's pitch torque pushes on.  Its velocity is
/// the speed the rider is asking for.
struct AdmittanceTuning {
  double virtual_mass = 5.0;     ///< [kg]
  double virtual_damping = 10.0; ///< [N s/m]
  double sensitivity = 0.5;      ///< torque-to-force gain [1/m]
  double deadband = 0.5;         ///< ignored torque magnitude [N m]
  double v_max = 1.4;            ///< speed-candidate clamp [m/s]
};

inline void validate(const AdmittanceTuning& t) {
  if (!(t.virtual_mass > 0.0) || !(t.virtual_damping > 0.0) ||
      !(t.sensitivity > 0.0) || !(t.deadband >= 0.0)) {
    throw std::invalid_argument("AdmittanceTuning: non-positive tuning");
  }
  if (!(t.v_max > 0.0) || t.v_max > 2.4) {
    throw std::invalid_argument(
        "AdmittanceTuning: v_max must be in (0, 2.4] m/s");
  }
}

/// Continuous deadband: zero inside +-width, then |x| - width with the sign
/// of x.  Continuity avoids chattering near the threshold.
[[nodiscard]] inline double soft_deadband(double x, double width) {
  const double mag = std::abs(x) - width;
  return mag > 0.0 ? std::copysign(mag, x) : 0.0;
}

/// One control-period step of the admittance, explicit Euler.  `v_c` is the
/// virtual body's velocity and persists between calls; the return value is
/// the equivalent wheel-speed candidate v_c / r_w [rad/s].
[[nodiscard]] inline double admittance_step(double tau_p,
                                            const AdmittanceTuning& tuning,
                                            double dt, double r_w,
                                            double& v_c) {
  const double drive = tuning.sensitivity * soft_deadband(tau_p, tuning.deadband);
  const double accel = (drive - tuning.virtual_damping * v_c) / tuning.virtual_mass;
  v_c = std::clamp(v_c + dt * accel, -tuning.v_max, tuning.v_max);
  return v_c / r_w;
}

// ============================================================================
// Shared-control governor
// ============================================================================

enum class GovernorMode {
  kPassthrough,  ///< rider's candidate passes unchanged
  kIdleKeeping,  ///< station keeping: command pinned to zero
  kSpeedLimit,   ///< candidate clamped to +-v_limit
};

struct SharedControlMode {
  GovernorMode mode = GovernorMode::kPassthrough;
  double v_limit = 0.5;  ///< [m/s], used by kSpeedLimit
};

inline void validate(const SharedControlMode& m) {
  if (m.mode == GovernorMode::kSpeedLimit && !(m.v_limit > 0.0)) {
    throw std::invalid_argument("SharedControlMode: v_limit must be positive");
  }
}

/// Applies the governor to a wheel-speed candidate [rad/s].  Idempotent:
/// governing an already-governed command changes nothing.
[[nodiscard]] inline double shared_governor(double phi_dot_candidate,
                                            const SharedControlMode& mode,
                                            double r_w) {
  switch (mode.mode) {
    case GovernorMode::kPassthrough:
      return phi_dot_candidate;
    case GovernorMode::kIdleKeeping:
      return 0.0;
    case GovernorMode::kSpeedLimit: {
      const double lim = mode.v_limit / r_w;
      return std::clamp(phi_dot_candidate, -lim, lim);
    }
  }
  return phi_dot_candidate;
}

// ============================================================================
// Balancing laws
// ============================================================================

/// Upright-reference state feedback: tau_ref = k (s_c - s) with
/// s_c = (0, 0, 0, phi_dot_cmd).  Balances about zero tilt regardless of the
/// rider's wrench.
[[nodiscard]] inline double hacs_law(const State& s, double phi_dot_cmd,
                                     const GainVector& gains) {
  const Eigen::Vector4d err =
      Eigen::Vector4d{0.0, 0.0, 0.0, phi_dot_cmd} - s.vector();
  return gains.k.dot(err);
}

struct IhacsCommand {
  double tau_ref = 0.0;   ///< [N m]
  double theta_eq = 0.0;  ///< [rad]
  double tau_eq = 0.0;    ///< [N m]
  EquilibriumStatus status = EquilibriumStatus::kConverged;
};

/// Interaction-aware law: re-centres the regulator on the wrench-consistent
/// equilibrium and feeds its torque forward,
///   tau_ref = k ((theta_eq, 0, 0, phi_dot_cmd) - s) + tau_eq.
/// The solver carries the previous equilibrium as a warm start; on failure
/// it reports the status and the law falls back to the last solution held
/// inside the solver's guess (theta_eq = tau_eq = 0 before any success).
[[nodiscard]] inline IhacsCommand ihacs_law(const State& s,
                                            double phi_dot_cmd,
                                            const Wrench& sensed,
                                            const GainVector& gains,
                                            EquilibriumSolver& solver) {
  const EquilibriumSolution sol = solver.solve(sensed, phi_dot_cmd);
  IhacsCommand cmd;
  cmd.theta_eq = sol.theta_eq;
  cmd.tau_eq = sol.tau_eq;
  cmd.status = sol.status;
  const Eigen::Vector4d err =
      Eigen::Vector4d{cmd.theta_eq, 0.0, 0.0, phi_dot_cmd} - s.vector();
  cmd.tau_ref = gains.k.dot(err) + cmd.tau_eq;
  return cmd;
}

// ============================================================================
// Torque loop
// ============================================================================

enum class TorqueMode {
  kIdeal,  ///< actuator delivers the clamped reference instantly
  kLag,    ///< first-order actuator closed by a PI loop
};

struct TorqueLoopConfig {
  TorqueMode mode = TorqueMode::kIdeal;
  double limit = 100.0;         ///< symmetric torque limit [N m]
  double time_constant = 0.02;  ///< actuator lag [s]
  double kp = 4.0;              ///< PI proportional gain [-]
  double ki = 250.0;            ///< PI integral gain [1/s]
};

inline void validate(const TorqueLoopConfig& c) {
  if (!(c.limit > 0.0)) {
    throw std::invalid_argument("TorqueLoopConfig: limit must be positive");
  }
  if (c.mode == TorqueMode::kLag &&
      (!(c.time_constant > 0.0) || !(c.kp >= 0.0) || !(c.ki >= 0.0))) {
    throw std::invalid_argument("TorqueLoopConfig: non-physical lag loop");
  }
}

/// Inner torque loop between the balance law and the plant.  Ideal mode is a
/// clamp; lag mode drives a first-order actuator with a PI compensator plus
/// reference feedforward, integrating the actuator state exactly over dt and
/// holding the integrator when the drive saturates against the error.
class TorqueLoop {
 public:
  struct Output {
    double tau = 0.0;      ///< torque delivered to the plant [N m]
    bool clipped = false;  ///< the limit constrained this step
  };

  TorqueLoop() = default;
  explicit TorqueLoop(const TorqueLoopConfig& config) : config_(config) {
    validate(config);
  }

  [[nodiscard]] const TorqueLoopConfig& config() const { return config_; }

  Output step(double tau_ref, double dt) {
    Output out;
    if (config_.mode == TorqueMode::kIdeal) {
      out.tau = std::clamp(tau_ref, -config_.limit, config_.limit);
      out.clipped = out.tau != tau_ref;
      return out;
    }
    const double err = tau_ref - actuator_;
    const double drive_raw =
        tau_ref + config_.kp * err + config_.ki * integrator_;
    const double drive = std::clamp(drive_raw, -config_.limit, config_.limit);
    out.clipped = drive != drive_raw;
    // Conditional integration: freeze when pushing further into the limit.
    if (!out.clipped || err * drive_raw < 0.0) {
      integrator_ += err * dt;
    }
    // Exact zero-order-hold response of tau_a' = (drive - tau_a) / T.
    actuator_ = drive + (actuator_ - drive) * std::exp(-dt / config_.time_constant);
    out.tau = actuator_;
    return out;
  }

  void reset() {
    actuator_ = 0.0;
    integrator_ = 0.0;
  }

 private:
  TorqueLoopConfig config_;
  double actuator_ = 0.0;    ///< delivered torque state [N m]
  double integrator_ = 0.0;  ///< PI integral of the torque error [N m s]
};

// ============================================================================
// Wrench sensing filter
// ============================================================================

/// First-order low-pass on each wrench channel.  A non-positive cutoff
/// disables the filter.  The first sample initialises the state so there is
/// no startup transient.
class WrenchLowPass {
 public:
  WrenchLowPass() = default;
  explicit WrenchLowPass(double cutoff_hz) : cutoff_hz_(cutoff_hz) {}

  [[nodiscard]] Wrench step(const Wrench& raw, double dt) {
    if (cutoff_hz_ <= 0.0) {
      return raw;
    }
    if (!primed_) {
      state_ = raw;
      primed_ = true;
      return state_;
    }
    const double alpha = 1.0 - std::exp(-2.0 * M_PI * cutoff_hz_ * dt);
    state_.f_px += alpha * (raw.f_px - state_.f_px);
    state_.f_pz += alpha * (raw.f_pz - state_.f_pz);
    state_.tau_p += alpha * (raw.tau_p - state_.tau_p);
    return state_;
  }

  void reset() { primed_ = false; state_ = Wrench{}; }

 private:
  double cutoff_hz_ = 0.0;
  Wrench state_{};
  bool primed_ = false;
};

// ============================================================================
// Controller configuration
// ============================================================================

enum class ControlScheme {
  kHacs,   ///< upright-reference regulator
  kIhacs,  ///< equilibrium-tracking regulator with torque feedforward
};

struct ControllerConfig {
  ControlScheme scheme = ControlScheme::kIhacs;
  GainVector gains{};  ///< from synthesize_gains / personalize_gains
  AdmittanceTuning admittance{};
  SharedControlMode shared{};
  TorqueLoopConfig torque{};
  EquilibriumOptions equilibrium{};
  double wrench_filter_cutoff = 0.0;  ///< [Hz], <= 0 disables
  int command_delay_ticks = 0;        ///< extra control periods on tau_ref
};

inline void validate(const ControllerConfig& c) {
  validate(c.admittance);
  validate(c.shared);
  validate(c.torque);
  if (c.command_delay_ticks < 0 || c.command_delay_ticks > 1) {
    throw std::invalid_argument(
        "ControllerConfig: command_delay_ticks must be 0 or 1");
  }
}

}  // namespace ballbot

#endif  // BALLBOT_CONTROLLERS_HPP
