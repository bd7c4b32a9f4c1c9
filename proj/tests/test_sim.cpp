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

#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>

#include "ballbot/dynamics.hpp"
#include "ballbot/gains.hpp"
#include "ballbot/sim.hpp"
#include "ballbot/trajectory_io.hpp"

namespace {

using namespace ballbot;

RiderSetup still_rider() {
  RiderSetup r;
  r.params = RiderParams{};  // 1.70 m / 70 kg
  r.profile = LeanProfile{}; // zero lean forever
  return r;
}

RiderSetup leaning_rider(double target, double hold_start = 0.5) {
  RiderSetup r;
  r.params = RiderParams{};
  r.profile = LeanProfile(RampHoldProfile{hold_start, 0.35, target},
                          r.params.max_lean);
  return r;
}

ControllerConfig tuned_controller(ControlScheme scheme,
                                  const RiderParams& rider,
                                  const PlantParams& plant) {
  ControllerConfig c;
  c.scheme = scheme;
  c.gains = personalize_gains(rider, plant);
  return c;
}

std::string csv_bytes(const TrajectoryLog& log) {
  std::ostringstream out;
  write_csv(log, out);
  return out.str();
}

TEST_CASE("a still rider on a balanced chassis stays exactly at the origin") {
  const PlantParams plant{};
  const RiderSetup rider = still_rider();
  ControllerConfig ctrl =
      tuned_controller(ControlScheme::kIhacs, rider.params, plant);
  ctrl.shared.mode = GovernorMode::kIdleKeeping;
  SimConfig sim;
  sim.duration = 8.0;

  const SimResult res = run_scenario(plant, rider, ctrl, sim);
  CHECK(res.log.stop_reason == StopReason::kFinished);
  REQUIRE(res.log.records.size() == 3201);  // 8 s at 400 Hz plus terminal
  for (const TickRecord& r : res.log.records) {
    CHECK(r.theta == 0.0);
    CHECK(r.phi == 0.0);
    CHECK(r.theta_dot == 0.0);
    CHECK(r.phi_dot == 0.0);
    CHECK(r.tau == 0.0);
    CHECK(r.theta_eq == 0.0);
    CHECK(r.flags == 0);
  }
  // The rider's weight still rests on the chassis the whole time.
  CHECK(res.log.records[100].f_pz < -300.0);
}

TEST_CASE("recorded substeps replay bit-for-bit through the plant step") {
  // With the torque and the quasi-static wrench both held over the tick,
  // re-integrating each tick from its record must reproduce the trace
  // exactly -- same function, same inputs.
  const PlantParams plant{};
  const RiderSetup rider = leaning_rider(0.2, 0.1);
  const ControllerConfig ctrl =
      tuned_controller(ControlScheme::kHacs, rider.params, plant);
  SimConfig sim;
  sim.duration = 0.5;
  sim.record_substeps = true;

  const SimResult res = run_scenario(plant, rider, ctrl, sim);
  REQUIRE(res.log.stop_reason == StopReason::kFinished);
  const int n_ticks = 200;
  const int sub = sim.physics_substeps;
  REQUIRE(res.substeps.size() == static_cast<size_t>(n_ticks * sub));
  const double dt_p = res.log.control_dt / sub;

  for (int k = 0; k < n_ticks; ++k) {
    const TickRecord& rec = res.log.records[k];
    State s{rec.theta, rec.phi, rec.theta_dot, rec.phi_dot};
    const PlantInput u{rec.tau, {rec.f_px, rec.f_pz, rec.tau_p}};
    for (int j = 0; j < sub; ++j) {
      const SubstepSample& sample = res.substeps[k * sub + j];
      CHECK(sample.tau == rec.tau);  // zero-order hold inside the tick
      s = rk4_step(s, u, plant, dt_p);
      CHECK(s.theta == sample.state.theta);
      CHECK(s.phi == sample.state.phi);
      CHECK(s.theta_dot == sample.state.theta_dot);
      CHECK(s.phi_dot == sample.state.phi_dot);
    }
    // The next record opens from where the substeps ended.
    const TickRecord& next = res.log.records[k + 1];
    CHECK(next.theta == s.theta);
    CHECK(next.phi == s.phi);
  }
  // Substep timestamps advance strictly.
  for (size_t i = 1; i < res.substeps.size(); ++i) {
    CHECK(res.substeps[i].t > res.substeps[i - 1].t);
  }
}

TEST_CASE("identical seeds replay identical trials, different seeds do not") {
  const PlantParams plant{};
  const RiderSetup rider = leaning_rider(0.25);
  ControllerConfig ctrl =
      tuned_controller(ControlScheme::kIhacs, rider.params, plant);
  ctrl.shared.mode = GovernorMode::kSpeedLimit;
  SimConfig sim;
  sim.duration = 2.0;
  sim.sensor_noise_std = 3.0;
  sim.seed = 17;

  const std::string a = csv_bytes(run_scenario(plant, rider, ctrl, sim).log);
  const std::string b = csv_bytes(run_scenario(plant, rider, ctrl, sim).log);
  CHECK(a == b);

  sim.seed = 18;
  const std::string c = csv_bytes(run_scenario(plant, rider, ctrl, sim).log);
  CHECK(a != c);
}

TEST_CASE("trial sets pair results to seeds independent of order") {
  const PlantParams plant{};
  const RiderSetup rider = leaning_rider(0.2);
  const ControllerConfig ctrl =
      tuned_controller(ControlScheme::kHacs, rider.params, plant);
  SimConfig sim;
  sim.duration = 1.0;
  sim.sensor_noise_std = 2.0;

  const auto fwd = run_trial_set(plant, rider, ctrl, sim, {1, 2, 3});
  const auto rev = run_trial_set(plant, rider, ctrl, sim, {3, 2, 1});
  REQUIRE(fwd.size() == 3);
  REQUIRE(rev.size() == 3);
  for (int i = 0; i < 3; ++i) {
    CHECK(fwd[i].log.seed == static_cast<std::uint64_t>(i + 1));
    CHECK(csv_bytes(fwd[i].log) == csv_bytes(rev[2 - i].log));
  }
}

TEST_CASE("the terminal record extends the last tick's hold") {
  const PlantParams plant{};
  const RiderSetup rider = leaning_rider(0.2, 0.02);
  const ControllerConfig ctrl =
      tuned_controller(ControlScheme::kIhacs, rider.params, plant);
  SimConfig sim;
  sim.duration = 0.1;

  const TrajectoryLog log = run_scenario(plant, rider, ctrl, sim).log;
  REQUIRE(log.records.size() == 41);
  const TickRecord& last_tick = log.records[39];
  const TickRecord& terminal = log.records[40];
  CHECK(terminal.t == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(terminal.tau == last_tick.tau);
  CHECK(terminal.tau_ref == last_tick.tau_ref);
  CHECK(terminal.phi_dot_cmd == last_tick.phi_dot_cmd);
  CHECK(terminal.theta_eq == last_tick.theta_eq);
  CHECK(log.control_dt == doctest::Approx(1.0 / 400.0).epsilon(1e-15));
}

TEST_CASE("each personalized controller rights a tilted chassis quickly") {
  const PlantParams plant{};
  const double tilt0 = 3.0 * M_PI / 180.0;
  const struct { double height, weight; } riders[] = {
      {1.64, 50.0}, {1.76, 73.0}, {1.60, 79.0}, {1.67, 52.0}};
  for (const auto& anthro : riders) {
    CAPTURE(anthro.weight);
    RiderSetup rider = still_rider();
    rider.params.height = anthro.height;
    rider.params.weight = anthro.weight;
    ControllerConfig ctrl =
        tuned_controller(ControlScheme::kIhacs, rider.params, plant);
    ctrl.shared.mode = GovernorMode::kIdleKeeping;
    SimConfig sim;
    sim.duration = 4.0;
    sim.initial_state.theta = tilt0;

    const TrajectoryLog log = run_scenario(plant, rider, ctrl, sim).log;
    REQUIRE(log.stop_reason == StopReason::kFinished);
    double worst_late = 0.0;
    for (const TickRecord& r : log.records) {
      if (r.t >= 3.0) {
        worst_late = std::max(worst_late, std::abs(r.theta));
      }
    }
    CHECK(worst_late < 0.1 * M_PI / 180.0);
  }
}

TEST_CASE("abort guards classify their failure modes") {
  const PlantParams plant{};

  SUBCASE("ball travel limit") {
    const RiderSetup rider = leaning_rider(0.3, 0.1);
    ControllerConfig ctrl =
        tuned_controller(ControlScheme::kIhacs, rider.params, plant);
    SimConfig sim;
    sim.duration = 8.0;
    sim.position_limit = 0.5;  // [m]
    const TrajectoryLog log = run_scenario(plant, rider, ctrl, sim).log;
    CHECK(log.stop_reason == StopReason::kPositionLimit);
    CHECK(std::abs(plant.r_w * log.records.back().phi) >= 0.5);
    CHECK(log.records.back().t < 8.0);
  }

  SUBCASE("fall-over guard") {
    const RiderSetup rider = still_rider();
    ControllerConfig ctrl;  // zero gains: nobody balances
    ctrl.scheme = ControlScheme::kHacs;
    SimConfig sim;
    sim.duration = 8.0;
    sim.initial_state.theta = 0.5;
    const TrajectoryLog log = run_scenario(plant, rider, ctrl, sim).log;
    CHECK(log.stop_reason == StopReason::kFallOver);
    CHECK(std::abs(log.records.back().theta) >=
          0.9 * M_PI / 2.0 * (1.0 - 1e-12));
  }

  SUBCASE("non-finite state") {
    const RiderSetup rider = still_rider();
    const ControllerConfig ctrl =
        tuned_controller(ControlScheme::kIhacs, rider.params, plant);
    SimConfig sim;
    sim.duration = 1.0;
    sim.initial_state.theta = std::numeric_limits<double>::quiet_NaN();
    const TrajectoryLog log = run_scenario(plant, rider, ctrl, sim).log;
    CHECK(log.stop_reason == StopReason::kNonFinite);
    CHECK(log.records.size() == 1);
  }
}

TEST_CASE("dynamic-mode sensing reports the coupled wrench of the last hold") {
  const PlantParams plant{};
  const RiderSetup rider = leaning_rider(0.25, 0.1);
  ControllerConfig ctrl =
      tuned_controller(ControlScheme::kHacs, rider.params, plant);
  SimConfig sim;
  sim.duration = 1.0;
  sim.wrench_mode = WrenchMode::kDynamic;

  const TrajectoryLog log = run_scenario(plant, rider, ctrl, sim).log;
  REQUIRE(log.stop_reason == StopReason::kFinished);
  const TorsoParams torso = torso_from_rider(rider.params, plant);
  for (size_t k : {size_t{0}, size_t{7}, size_t{150}, size_t{399}}) {
    const TickRecord& rec = log.records[k];
    const double tau_prev = (k == 0) ? 0.0 : log.records[k - 1].tau;
    const State s{rec.theta, rec.phi, rec.theta_dot, rec.phi_dot};
    const Wrench w =
        coupled_torso_accel(s, tau_prev, rider.profile.at(rec.t), torso, plant)
            .second;
    CHECK(rec.f_px == doctest::Approx(w.f_px).epsilon(1e-12));
    CHECK(rec.f_pz == doctest::Approx(w.f_pz).epsilon(1e-12));
    CHECK(rec.tau_p == doctest::Approx(w.tau_p).epsilon(1e-12));
    // Noise-free sensing passes the same wrench to the controller.
    CHECK(rec.f_px_sensed == rec.f_px);
  }
}

TEST_CASE("noise draws are decoupled from the noise amplitude") {
  // The same seed must produce proportionally scaled perturbations on the
  // first tick regardless of amplitude, which pins the draw schedule.
  const PlantParams plant{};
  const RiderSetup rider = still_rider();
  const ControllerConfig ctrl =
      tuned_controller(ControlScheme::kIhacs, rider.params, plant);
  SimConfig sim;
  sim.duration = 0.01;
  sim.seed = 99;

  sim.sensor_noise_std = 1.0;
  const TickRecord a = run_scenario(plant, rider, ctrl, sim).log.records[0];
  sim.sensor_noise_std = 2.0;
  const TickRecord b = run_scenario(plant, rider, ctrl, sim).log.records[0];
  const double da = a.tau_p_sensed - a.tau_p;
  const double db = b.tau_p_sensed - b.tau_p;
  CHECK(da != 0.0);
  CHECK(db == doctest::Approx(2.0 * da).epsilon(1e-12));
}

}  // namespace
