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

#include <doctest.h>

#include "ballbot/dynamics.hpp"
#include "ballbot/equilibrium.hpp"

namespace {

using namespace ballbot;

// Verifies the defining property independently of the solver: at the
// solution, a plant pinned at (theta_eq, phi_dot_cmd) with the constant
// wrench and torque must have zero generalized accelerations.
double equilibrium_defect(const EquilibriumSolution& sol, const Wrench& w,
                          double phi_dot_cmd, const PlantParams& p) {
  const State s{sol.theta_eq, 0.0, 0.0, phi_dot_cmd};
  return accel(s, PlantInput{sol.tau_eq, w}, p).cwiseAbs().maxCoeff();
}

TEST_CASE("unloaded equilibrium is upright with zero torque") {
  const PlantParams p{};
  const auto sol = solve_equilibrium(Wrench{}, 0.0, p);
  CHECK(sol.status == EquilibriumStatus::kConverged);
  CHECK(std::abs(sol.theta_eq) < 1e-12);
  CHECK(std::abs(sol.tau_eq) < 1e-12);
}

TEST_CASE("pure pitch-torque load matches the frozen solution") {
  // Solved independently from the closed-form balance
  //   sin(th) (m_b g l_b + r_w f_pz) + cos(th) r_w f_px
  //     = b_phi pdc - h_p f_px - tau_p
  // with the torque recovered from the tilt row.
  const PlantParams p{};
  const auto sol = solve_equilibrium(Wrench{0.0, -500.0, 15.0}, 0.0, p);
  CHECK(sol.status == EquilibriumStatus::kConverged);
  CHECK(sol.theta_eq == doctest::Approx(-0.1317581659607672).epsilon(1e-9));
  CHECK(sol.tau_eq == doctest::Approx(-7.554193124589446).epsilon(1e-9));
  CHECK(equilibrium_defect(sol, Wrench{0.0, -500.0, 15.0}, 0.0, p) < 1e-8);
}

TEST_CASE("rolling friction sets the cruise torque exactly") {
  // With no rider wrench, cruising at phi_dot_cmd needs tau = b_phi * pdc.
  const PlantParams p{};
  const double pdc = 5.0;
  const auto sol = solve_equilibrium(Wrench{}, pdc, p);
  CHECK(sol.status == EquilibriumStatus::kConverged);
  CHECK(sol.tau_eq == doctest::Approx(p.b_phi * pdc).epsilon(1e-10));
  CHECK(sol.theta_eq == doctest::Approx(0.029128918877315183).epsilon(1e-9));
}

TEST_CASE("combined load and cruise command matches the frozen solution") {
  const PlantParams p{};
  const Wrench w{-12.0, -480.0, 10.0};
  const double pdc = 0.5 / 0.115;
  const auto sol = solve_equilibrium(w, pdc, p);
  CHECK(sol.status == EquilibriumStatus::kConverged);
  CHECK(sol.theta_eq == doctest::Approx(0.019984592912420643).epsilon(1e-9));
  CHECK(sol.tau_eq == doctest::Approx(6.830626621395102).epsilon(1e-9));
  CHECK(equilibrium_defect(sol, w, pdc, p) < 1e-8);
}

TEST_CASE("converged solutions zero the accelerations over a load grid") {
  const PlantParams p{};
  for (double tau_p = -30.0; tau_p <= 30.0; tau_p += 6.0) {
    for (double f_pz = -800.0; f_pz <= -200.0; f_pz += 120.0) {
      for (double pdc : {0.0, 0.5 / p.r_w}) {
        const Wrench w{0.0, f_pz, tau_p};
        const auto sol = solve_equilibrium(w, pdc, p);
        REQUIRE(sol.status == EquilibriumStatus::kConverged);
        CHECK(equilibrium_defect(sol, w, pdc, p) < 1e-8);
      }
    }
  }
}

TEST_CASE("equilibrium mirrors with the load") {
  const PlantParams p{};
  const Wrench w{-20.0, -550.0, 12.0};
  const Wrench mw{20.0, -550.0, -12.0};
  const auto a = solve_equilibrium(w, 1.5, p);
  const auto b = solve_equilibrium(mw, -1.5, p);
  CHECK(a.status == EquilibriumStatus::kConverged);
  CHECK(b.status == EquilibriumStatus::kConverged);
  CHECK(a.theta_eq == doctest::Approx(-b.theta_eq).epsilon(1e-10));
  CHECK(a.tau_eq == doctest::Approx(-b.tau_eq).epsilon(1e-10));
}

TEST_CASE("steep converged equilibria are reported saturated and clamped") {
  // tau_p = 60 N m forces a counter-tilt beyond the policy limit: the solve
  // converges past it, so the result is clamped to +-theta_max with the
  // torque refit from the tilt row, and flagged.
  const PlantParams p{};
  EquilibriumOptions opts{};
  const Wrench w{0.0, -600.0, 60.0};
  const auto sol = solve_equilibrium(w, 0.0, p, opts);
  CHECK(sol.status == EquilibriumStatus::kSaturated);
  CHECK(std::abs(sol.theta_eq) == doctest::Approx(opts.theta_max).epsilon(1e-12));
  CHECK(sol.theta_eq < 0.0);  // counter-tilt opposes the positive pitch load
  // The clamped tilt admits no exact equilibrium; the reported torque must
  // be the best fit: perturbing it can only grow the acceleration residual.
  auto defect2 = [&](double tau) {
    const State s{sol.theta_eq, 0.0, 0.0, 0.0};
    return accel(s, PlantInput{tau, w}, p).squaredNorm();
  };
  const double best = defect2(sol.tau_eq);
  CHECK(best <= defect2(sol.tau_eq + 0.01) + 1e-12);
  CHECK(best <= defect2(sol.tau_eq - 0.01) + 1e-12);
  CHECK(sol.residual_norm > 1e-3);  // and it is honestly not an equilibrium
}

TEST_CASE("impossible loads still return a usable clamped reference") {
  // A pitch torque beyond what gravity can balance has no equilibrium:
  // whatever the reported status, the reference handed to the regulator
  // stays inside the tilt policy and finite.
  const PlantParams p{};
  EquilibriumOptions opts{};
  const auto sol = solve_equilibrium(Wrench{0.0, -600.0, 120.0}, 0.0, p, opts);
  CHECK(sol.status != EquilibriumStatus::kConverged);
  CHECK(std::abs(sol.theta_eq) <= opts.theta_max + 1e-12);
  CHECK(std::isfinite(sol.tau_eq));
}

TEST_CASE("warm starts reproduce cold solves along a load sweep") {
  const PlantParams p{};
  EquilibriumSolver solver(p);
  double prev_theta = 1.0;
  for (double tau_p = -40.0; tau_p <= 40.0; tau_p += 1.0) {
    const Wrench w{5.0, -650.0, tau_p};
    const auto warm = solver.solve(w, 0.5);
    const auto cold = solve_equilibrium(w, 0.5, p);
    REQUIRE(warm.status == EquilibriumStatus::kConverged);
    CHECK(warm.theta_eq == doctest::Approx(cold.theta_eq).epsilon(1e-10));
    CHECK(warm.tau_eq == doctest::Approx(cold.tau_eq).epsilon(1e-10));
    // The equilibrium tilt decreases monotonically with the pitch load.
    CHECK(warm.theta_eq < prev_theta);
    prev_theta = warm.theta_eq;
  }
}

TEST_CASE("holding the equilibrium torque keeps the plant put briefly") {
  // The loaded equilibrium is an unstable fixed point; with the exact
  // constant torque and wrench, drift from roundoff stays negligible over
  // a short horizon.
  const PlantParams p{};
  const Wrench w{0.0, -500.0, 15.0};
  const auto sol = solve_equilibrium(w, 0.0, p);
  REQUIRE(sol.status == EquilibriumStatus::kConverged);
  State s{sol.theta_eq, 0.0, 0.0, 0.0};
  const PlantInput u{sol.tau_eq, w};
  const double dt = 2.5e-4;
  for (double t = 0.0; t < 0.8; t += dt) {
    s = rk4_step(s, u, p, dt);
  }
  CHECK(std::abs(s.theta - sol.theta_eq) < 1e-4);
  CHECK(std::abs(s.phi_dot) < 1e-3);
}

}  // namespace
