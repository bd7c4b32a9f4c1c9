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
#include <complex>
#include <random>

#include <Eigen/Dense>
#include <doctest.h>

#include "ballbot/dynamics.hpp"

namespace {

using namespace ballbot;

// Shared fixture: a generic loaded operating point.  Every expected number
// below was produced by an independent symbolic derivation of the same
// model (Lagrangian of the wheel + chassis with the pointwise rider load)
// and is frozen here to pin the implementation.
const State kState{0.1, 0.4, 0.3, -0.7};
const PlantInput kInput{2.5, Wrench{-12.0, -480.0, 10.0}};

constexpr double kTol = 1e-12;

double rel_err(double got, double want) {
  return std::abs(got - want) / std::max(1.0, std::abs(want));
}

TEST_CASE("dynamics terms match the frozen fixture") {
  const PlantParams p{};
  const auto terms = compute_terms(kState, kInput, p);

  CHECK(rel_err(terms.mass(0, 0), 8.125) < kTol);
  CHECK(rel_err(terms.mass(0, 1), 2.0024458826220269) < kTol);
  CHECK(rel_err(terms.mass(1, 0), 2.0024458826220269) < kTol);
  CHECK(rel_err(terms.mass(1, 1), 0.74941666666666667) < kTol);

  CHECK(rel_err(terms.bias(0), 0.03) < kTol);
  CHECK(rel_err(terms.bias(1), -0.71808232759015675) < kTol);

  CHECK(rel_err(terms.gravity(0), -17.138901802844223) < kTol);
  CHECK(terms.gravity(1) == 0.0);

  CHECK(rel_err(terms.force(0), 0.9) < kTol);
  CHECK(rel_err(terms.force(1), -4.3839103469885896) < kTol);
}

TEST_CASE("acceleration solves the mass-matrix balance") {
  const PlantParams p{};
  const Eigen::Vector2d qdd = accel(kState, kInput, p);
  CHECK(rel_err(qdd(0), 10.021442812935286) < kTol);
  CHECK(rel_err(qdd(1), -31.668931281787344) < kTol);

  // The residual of M qdd + C + G = Q must vanish identically.
  const auto terms = compute_terms(kState, kInput, p);
  const Eigen::Vector2d residual =
      terms.mass * qdd + terms.bias + terms.gravity - terms.force;
  CHECK(residual.cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("mechanical energy matches the frozen fixture") {
  const PlantParams p{};
  CHECK(rel_err(mechanical_energy(kState, p), 170.94605852208778) < kTol);
}

TEST_CASE("upright rest with no input stays at rest") {
  const PlantParams p{};
  const State rest{0.0, 1.23, 0.0, 0.0};  // wheel angle is a cyclic variable
  const Eigen::Vector4d xd = state_derivative(rest, PlantInput{}, p);
  CHECK(xd.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("gravity tips the chassis away from upright") {
  const PlantParams p{};
  const State leaning{0.05, 0.0, 0.0, 0.0};
  const Eigen::Vector2d qdd = accel(leaning, PlantInput{}, p);
  CHECK(qdd(0) > 0.0);  // tilt grows: the upright plant is unstable
}

TEST_CASE("mass matrix is positive definite across the tilt range") {
  const PlantParams p{};
  for (double theta = -1.5; theta <= 1.5; theta += 0.05) {
    const State s{theta, 0.0, 0.0, 0.0};
    const auto terms = compute_terms(s, PlantInput{}, p);
    const Eigen::LLT<Eigen::Matrix2d> llt(terms.mass);
    CHECK(llt.info() == Eigen::Success);
    CHECK(terms.mass.determinant() > 0.0);
  }
}

TEST_CASE("tilt domain guard rejects horizontal chassis") {
  const PlantParams p{};
  const State flat{M_PI / 2.0, 0.0, 0.0, 0.0};
  CHECK_THROWS_AS((void)compute_terms(flat, PlantInput{}, p),
                  std::domain_error);
}

TEST_CASE("sagittal mirror symmetry of the equations of motion") {
  // Flipping the sagittal plane negates tilt, wheel angle, their rates,
  // the drive torque and the odd wrench channels (f_px, tau_p); the
  // vertical force f_pz is even.  Accelerations must negate exactly.
  const PlantParams p{};
  std::mt19937 rng(42);
  std::uniform_real_distribution<double> angle(-1.2, 1.2);
  std::uniform_real_distribution<double> rate(-4.0, 4.0);
  std::uniform_real_distribution<double> force(-300.0, 300.0);
  for (int i = 0; i < 1000; ++i) {
    const State s{angle(rng), angle(rng), rate(rng), rate(rng)};
    const PlantInput u{force(rng) / 10.0,
                       Wrench{force(rng), -400.0 + force(rng), force(rng) / 5.0}};
    const State ms{-s.theta, -s.phi, -s.theta_dot, -s.phi_dot};
    const PlantInput mu{-u.tau,
                        Wrench{-u.wrench.f_px, u.wrench.f_pz, -u.wrench.tau_p}};
    const Eigen::Vector2d a = accel(s, u, p);
    const Eigen::Vector2d ma = accel(ms, mu, p);
    CHECK((a + ma).cwiseAbs().maxCoeff() <
          1e-10 * std::max(1.0, a.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("frictionless unforced motion conserves energy") {
  PlantParams p{};
  p.b_theta = 0.0;
  p.b_phi = 0.0;
  State s{0.2, 0.0, 0.0, 0.0};
  const double e0 = mechanical_energy(s, p);
  const double dt = 2.5e-4;
  double t = 0.0;
  double max_drift = 0.0;
  // The chassis swings down; stop well before the model's tilt domain ends.
  while (std::abs(s.theta) < 1.4 && t < 2.0) {
    s = rk4_step(s, PlantInput{}, p, dt);
    t += dt;
    max_drift = std::max(max_drift, std::abs(mechanical_energy(s, p) - e0));
  }
  CHECK(t > 0.1);  // the window actually covered a swing
  CHECK(max_drift / t < 1e-6);
}

TEST_CASE("rk4 step converges to a fine-step reference at fifth order") {
  const PlantParams p{};
  const double dt = 2.5e-3;
  // Reference trajectories from 100x finer steps (their own error is
  // ~1e-8 of the one-step error and does not disturb the ratio).
  const auto reference = [&](double span, int n) {
    State s = kState;
    for (int i = 0; i < n; ++i) {
      s = rk4_step(s, kInput, p, span / n);
    }
    return s;
  };
  const double e_full =
      (rk4_step(kState, kInput, p, dt).vector() -
       reference(dt, 100).vector()).cwiseAbs().maxCoeff();
  const double e_half =
      (rk4_step(kState, kInput, p, dt / 2.0).vector() -
       reference(dt / 2.0, 50).vector()).cwiseAbs().maxCoeff();
  CHECK(e_full < 1e-8);
  // One-step (local) error scales as dt^5: halving dt divides it by ~32.
  CHECK(e_full / e_half > 24.0);
  CHECK(e_full / e_half < 40.0);
}

TEST_CASE("linearization matches complex-step derivatives") {
  const PlantParams p{};
  const LinearModel lin = linearize(kState, kInput, p);
  const double h = 1e-100;
  using CState = StateT<std::complex<double>>;
  using CInput = PlantInputT<std::complex<double>>;

  auto complex_state = [&](int j) {
    CState cs{kState.theta, kState.phi, kState.theta_dot, kState.phi_dot};
    Eigen::Vector4<std::complex<double>> v = cs.vector();
    v(j) += std::complex<double>(0.0, h);
    return CState::from_vector(v);
  };
  auto base_input = [&]() {
    return CInput{kInput.tau,
                  WrenchT<std::complex<double>>{kInput.wrench.f_px,
                                                kInput.wrench.f_pz,
                                                kInput.wrench.tau_p}};
  };

  for (int j = 0; j < 4; ++j) {
    const auto xd = state_derivative(complex_state(j), base_input(), p);
    for (int i = 0; i < 4; ++i) {
      CHECK(rel_err(lin.a(i, j), xd(i).imag() / h) < 1e-6);
    }
  }
  {
    CInput u = base_input();
    u.tau += std::complex<double>(0.0, h);
    const auto xd = state_derivative(
        CState{kState.theta, kState.phi, kState.theta_dot, kState.phi_dot}, u,
        p);
    for (int i = 0; i < 4; ++i) {
      CHECK(rel_err(lin.b_tau(i), xd(i).imag() / h) < 1e-6);
    }
  }
  for (int c = 0; c < 3; ++c) {
    CInput u = base_input();
    if (c == 0) u.wrench.f_px += std::complex<double>(0.0, h);
    if (c == 1) u.wrench.f_pz += std::complex<double>(0.0, h);
    if (c == 2) u.wrench.tau_p += std::complex<double>(0.0, h);
    const auto xd = state_derivative(
        CState{kState.theta, kState.phi, kState.theta_dot, kState.phi_dot}, u,
        p);
    for (int i = 0; i < 4; ++i) {
      CHECK(rel_err(lin.b_wrench(i, c), xd(i).imag() / h) < 1e-6);
    }
  }
}

TEST_CASE("wheel angle does not enter the dynamics") {
  const PlantParams p{};
  const LinearModel lin = linearize(kState, kInput, p);
  CHECK(lin.a.col(1).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("upright linearization has an unstable mode") {
  const PlantParams p{};
  const LinearModel lin = linearize(State{}, PlantInput{}, p);
  const Eigen::EigenSolver<Eigen::Matrix4d> eig(lin.a);
  double max_real = -1e9;
  for (int i = 0; i < 4; ++i) {
    max_real = std::max(max_real, eig.eigenvalues()(i).real());
  }
  CHECK(max_real > 1.0);  // an inverted-pendulum divergence rate
}

}  // namespace
