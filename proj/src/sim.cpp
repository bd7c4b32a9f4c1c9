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

#include "ballbot/sim.hpp"

#include <algorithm>
#include <cmath>

#include "ballbot/dynamics.hpp"

namespace ballbot {
namespace {

constexpr double kForceClamp = 2000.0;   // [N]
constexpr double kTorqueClamp = 500.0;   // [N m]

/// Clamps the wrench seen by logging and the sensor path; reports whether
/// any channel was constrained.
Wrench clamp_wrench(const Wrench& w, bool& clamped) {
  Wrench out;
  out.f_px = std::clamp(w.f_px, -kForceClamp, kForceClamp);
  out.f_pz = std::clamp(w.f_pz, -kForceClamp, kForceClamp);
  out.tau_p = std::clamp(w.tau_p, -kTorqueClamp, kTorqueClamp);
  clamped = out.f_px != w.f_px || out.f_pz != w.f_pz || out.tau_p != w.tau_p;
  return out;
}

bool state_finite(const State& s) {
  return std::isfinite(s.theta) && std::isfinite(s.phi) &&
         std::isfinite(s.theta_dot) && std::isfinite(s.phi_dot);
}

/// One RK4 step of the chassis coupled to the prescribed torso, with the
/// lean motion sampled at the stage times.
State rk4_coupled(const State& s, double t, double tau,
                  const LeanProfile& profile, const TorsoParams& torso,
                  const PlantParams& plant, double h) {
  const auto deriv = [&](const State& x, double tx) {
    const auto [qdd, w] =
        coupled_torso_accel(x, tau, profile.at(tx), torso, plant);
    (void)w;
    return Eigen::Vector4d{x.theta_dot, x.phi_dot, qdd[0], qdd[1]};
  };
  const Eigen::Vector4d x0 = s.vector();
  const Eigen::Vector4d k1 = deriv(s, t);
  const Eigen::Vector4d k2 =
      deriv(State::from_vector(x0 + 0.5 * h * k1), t + 0.5 * h);
  const Eigen::Vector4d k3 =
      deriv(State::from_vector(x0 + 0.5 * h * k2), t + 0.5 * h);
  const Eigen::Vector4d k4 = deriv(State::from_vector(x0 + h * k3), t + h);
  return State::from_vector(x0 +
                            (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
}

}  // namespace

SimResult run_scenario(const PlantParams& plant, const RiderSetup& rider,
                       const ControllerConfig& controller,
                       const SimConfig& config) {
  validate(plant);
  validate(rider.params);
  validate(controller);
  validate(config);

  const TorsoParams torso = torso_from_rider(rider.params, plant);
  const double dt_c = 1.0 / config.control_rate;
  const double dt_p = dt_c / config.physics_substeps;
  const int n_ticks =
      std::max(1, static_cast<int>(std::lround(config.duration / dt_c)));

  SimResult result;
  result.log.control_dt = dt_c;
  result.log.seed = config.seed;
  result.log.records.reserve(static_cast<size_t>(n_ticks) + 1);

  GaussianNoise noise(config.seed);
  EquilibriumSolver eq_solver(plant, controller.equilibrium);
  TorqueLoop torque_loop(controller.torque);
  WrenchLowPass wrench_filter(controller.wrench_filter_cutoff);
  double v_virtual = 0.0;       // admittance state [m/s]
  double pending_tau_ref = 0.0; // one-tick command delay buffer [N m]
  double tau_applied = 0.0;     // torque held over the current tick [N m]

  const double fall_limit = config.fall_over_fraction * M_PI / 2.0;
  State state = config.initial_state;

  const auto true_wrench_at = [&](const State& s, double t,
                                  double tau_prev) -> Wrench {
    const LeanSample lean = rider.profile.at(t);
    if (config.wrench_mode == WrenchMode::kQuasiStatic) {
      return torso_wrench(lean, s, Eigen::Vector2d::Zero(), torso, plant,
                          WrenchMode::kQuasiStatic);
    }
    return coupled_torso_accel(s, tau_prev, lean, torso, plant).second;
  };

  // The terminal record samples the final state; command fields carry the
  // values still in force under the zero-order hold of the last tick.
  const auto finish = [&](StopReason reason, const State& terminal,
                          double t_terminal) {
    TickRecord rec;
    if (!result.log.records.empty()) {
      rec = result.log.records.back();
      rec.flags &= ~kFlagWrenchClamped;
    }
    rec.t = t_terminal;
    rec.theta = terminal.theta;
    rec.phi = terminal.phi;
    rec.theta_dot = terminal.theta_dot;
    rec.phi_dot = terminal.phi_dot;
    rec.v = plant.r_w * terminal.phi_dot;
    rec.zeta = rider.profile.at(t_terminal).zeta;
    if (state_finite(terminal) && std::abs(terminal.theta) < M_PI / 2.0) {
      bool clamped = false;
      const Wrench w = clamp_wrench(
          true_wrench_at(terminal, t_terminal, tau_applied), clamped);
      rec.f_px = w.f_px;
      rec.f_pz = w.f_pz;
      rec.tau_p = w.tau_p;
      rec.f_px_sensed = w.f_px;
      rec.f_pz_sensed = w.f_pz;
      rec.tau_p_sensed = w.tau_p;
      if (clamped) {
        rec.flags |= kFlagWrenchClamped;
      }
    }
    result.log.records.push_back(rec);
    result.log.stop_reason = reason;
  };

  for (int tick = 0; tick < n_ticks; ++tick) {
    const double t = tick * dt_c;

    // --- sense ---------------------------------------------------------
    bool clamped = false;
    const Wrench w_true =
        clamp_wrench(true_wrench_at(state, t, tau_applied), clamped);
    Wrench w_sensed = w_true;
    // The draw count per tick is fixed so trials with different noise
    // levels share the same random stream.
    const double n_fx = noise.next();
    const double n_fz = noise.next();
    const double n_tp = noise.next();
    w_sensed.f_px += config.sensor_noise_std * n_fx;
    w_sensed.f_pz += config.sensor_noise_std * n_fz;
    w_sensed.tau_p += config.sensor_noise_std * n_tp;
    const Wrench w_ctrl = wrench_filter.step(w_sensed, dt_c);

    // --- decide --------------------------------------------------------
    const double phi_dot_cmd_raw = admittance_step(
        w_ctrl.tau_p, controller.admittance, dt_c, plant.r_w, v_virtual);
    const double phi_dot_cmd =
        shared_governor(phi_dot_cmd_raw, controller.shared, plant.r_w);

    std::uint32_t flags = clamped ? kFlagWrenchClamped : 0u;
    double tau_ref = 0.0;
    double theta_eq = 0.0;
    double tau_eq = 0.0;
    if (controller.scheme == ControlScheme::kHacs) {
      tau_ref = hacs_law(state, phi_dot_cmd, controller.gains);
    } else {
      const IhacsCommand cmd =
          ihacs_law(state, phi_dot_cmd, w_ctrl, controller.gains, eq_solver);
      tau_ref = cmd.tau_ref;
      theta_eq = cmd.theta_eq;
      tau_eq = cmd.tau_eq;
      switch (cmd.status) {
        case EquilibriumStatus::kConverged:
          break;
        case EquilibriumStatus::kSaturated:
          flags |= kFlagEqSaturated;
          break;
        case EquilibriumStatus::kNoConvergence:
          flags |= kFlagEqNoConvergence;
          break;
        case EquilibriumStatus::kJacobianSingular:
          flags |= kFlagEqJacobianSingular;
          break;
      }
    }

    double tau_ref_effective = tau_ref;
    if (controller.command_delay_ticks == 1) {
      std::swap(tau_ref_effective, pending_tau_ref);
    }
    const TorqueLoop::Output drive = torque_loop.step(tau_ref_effective, dt_c);
    if (drive.clipped) {
      flags |= kFlagTorqueClipped;
    }
    tau_applied = drive.tau;
    if (!std::isfinite(tau_applied)) {
      finish(StopReason::kNonFinite, state, t);
      return result;
    }

    // --- record the tick ------------------------------------------------
    {
      TickRecord rec;
      rec.t = t;
      rec.theta = state.theta;
      rec.phi = state.phi;
      rec.theta_dot = state.theta_dot;
      rec.phi_dot = state.phi_dot;
      rec.v = plant.r_w * state.phi_dot;
      rec.zeta = rider.profile.at(t).zeta;
      rec.f_px = w_true.f_px;
      rec.f_pz = w_true.f_pz;
      rec.tau_p = w_true.tau_p;
      rec.f_px_sensed = w_sensed.f_px;
      rec.f_pz_sensed = w_sensed.f_pz;
      rec.tau_p_sensed = w_sensed.tau_p;
      rec.phi_dot_cmd_raw = phi_dot_cmd_raw;
      rec.phi_dot_cmd = phi_dot_cmd;
      rec.theta_eq = theta_eq;
      rec.tau_eq = tau_eq;
      rec.tau_ref = tau_ref_effective;
      rec.tau = tau_applied;
      rec.flags = flags;
      result.log.records.push_back(rec);
    }

    // --- integrate the tick ----------------------------------------------
    // Quasi-static wrench is held across the tick like the torque.
    Wrench w_held = w_true;
    for (int sub = 0; sub < config.physics_substeps; ++sub) {
      const double t_sub = t + sub * dt_p;
      State next;
      try {
        if (config.wrench_mode == WrenchMode::kQuasiStatic) {
          next = rk4_step(state, PlantInput{tau_applied, w_held}, plant, dt_p);
        } else {
          next = rk4_coupled(state, t_sub, tau_applied, rider.profile, torso,
                             plant, dt_p);
        }
      } catch (const std::domain_error&) {
        // The model left its tilt domain inside a stage: the chassis fell
        // faster than the fall guard sampled it.
        finish(StopReason::kFallOver, state, t_sub);
        return result;
      }
      state = next;
      const double t_next = t + (sub + 1) * dt_p;
      if (config.record_substeps) {
        result.substeps.push_back({t_next, state, tau_applied});
      }
      if (!state_finite(state)) {
        finish(StopReason::kNonFinite, state, t_next);
        return result;
      }
      if (std::abs(state.theta) >= fall_limit) {
        finish(StopReason::kFallOver, state, t_next);
        return result;
      }
      if (std::abs(plant.r_w * state.phi) > config.position_limit) {
        finish(StopReason::kPositionLimit, state, t_next);
        return result;
      }
    }
  }

  finish(StopReason::kFinished, state, n_ticks * dt_c);
  return result;
}

std::vector<SimResult> run_trial_set(const PlantParams& plant,
                                     const RiderSetup& rider,
                                     const ControllerConfig& controller,
                                     const SimConfig& config,
                                     const std::vector<std::uint64_t>& seeds) {
  std::vector<SimResult> results;
  results.reserve(seeds.size());
  for (const std::uint64_t seed : seeds) {
    SimConfig c = config;
    c.seed = seed;
    results.push_back(run_scenario(plant, rider, controller, c));
  }
  return results;
}

}  // namespace ballbot
