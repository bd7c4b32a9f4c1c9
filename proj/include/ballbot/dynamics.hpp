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

#ifndef BALLBOT_DYNAMICS_HPP
#define BALLBOT_DYNAMICS_HPP

#include <cmath>
#include <stdexcept>

#include <Eigen/Core>

#include "ballbot/types.hpp"

namespace ballbot {

// ============================================================================
// Equations of motion
// ============================================================================
//
// Generalized coordinates q = [theta, phi].  Kinematics:
//
//   wheel centre   (r_w phi, r_w)
//   chassis COM    (r_w phi + l_b sin th, r_w + l_b cos th)
//   point P        (r_w phi + h_p sin th, r_w + h_p cos th)
//
// Euler-Lagrange on T - V with T the wheel + chassis kinetic energy and
// V = m_b g l_b cos th gives the manipulator form
//
//   M(q) qdd + C(q, qd) + G(q) = Q(q, u)
//
//   M = [ m_b l_b^2 + i_b            m_b r_w l_b cos th          ]
//       [ m_b r_w l_b cos th         (m_w + m_b) r_w^2 + i_w     ]
//   C = [ b_theta thd                                            ]
//       [ -m_b r_w l_b sin th thd^2 + b_phi phd                  ]
//   G = [ -m_b g l_b sin th, 0 ]
//
// Generalized forces by virtual work; the wheel torque reacts on the chassis
// and the wrench enters through the Jacobian of P:
//
//   Q = [ -tau + h_p f_px + tau_p                                ]
//       [  tau + r_w (f_px cos th + f_pz sin th)                 ]

/// Manipulator-form terms of the equations of motion.
template <typename Scalar>
struct DynamicsTermsT {
  Eigen::Matrix2<Scalar> mass;     ///< M(q), symmetric positive definite
  Eigen::Vector2<Scalar> bias;     ///< C(q, qd), Coriolis + viscous friction
  Eigen::Vector2<Scalar> gravity;  ///< G(q)
  Eigen::Vector2<Scalar> force;    ///< generalized force of (tau, wrench)
};
using DynamicsTerms = DynamicsTermsT<double>;

/// Evaluates M, C, G and the generalized force at one configuration.
///
/// Throws std::domain_error once the tilt leaves (-pi/2, pi/2): the chassis
/// would intersect the ground and the model stops being meaningful.
template <typename Scalar>
[[nodiscard]] DynamicsTermsT<Scalar> compute_terms(
    const StateT<Scalar>& s, const PlantInputT<Scalar>& u,
    const PlantParams& p) {
  if (std::abs(detail::real_part(s.theta)) >= M_PI / 2.0) {
    throw std::domain_error("compute_terms: |theta| >= pi/2");
  }
  using std::cos;
  using std::sin;
  const Scalar c = cos(s.theta);
  const Scalar sn = sin(s.theta);

  DynamicsTermsT<Scalar> out;
  const double ml = p.m_b * p.l_b;
  out.mass(0, 0) = Scalar(p.m_b * p.l_b * p.l_b + p.i_b);
  out.mass(0, 1) = Scalar(ml * p.r_w) * c;
  out.mass(1, 0) = out.mass(0, 1);
  out.mass(1, 1) = Scalar((p.m_w + p.m_b) * p.r_w * p.r_w + p.i_w);

  out.bias[0] = Scalar(p.b_theta) * s.theta_dot;
  out.bias[1] = Scalar(-ml * p.r_w) * sn * s.theta_dot * s.theta_dot +
                Scalar(p.b_phi) * s.phi_dot;

  out.gravity[0] = Scalar(-ml * p.gravity) * sn;
  out.gravity[1] = Scalar(0);

  out.force[0] = -u.tau + Scalar(p.h_p) * u.wrench.f_px + u.wrench.tau_p;
  out.force[1] =
      u.tau + Scalar(p.r_w) * (u.wrench.f_px * c + u.wrench.f_pz * sn);
  return out;
}

/// Generalized accelerations [theta_dd, phi_dd] = M^-1 (Q - C - G).
///
/// The 2x2 solve is written out so the function stays valid for complex
/// scalars (complex-step derivative checks) and cheap in the inner loops.
template <typename Scalar>
[[nodiscard]] Eigen::Vector2<Scalar> accel(const StateT<Scalar>& s,
                                           const PlantInputT<Scalar>& u,
                                           const PlantParams& p) {
  const DynamicsTermsT<Scalar> t = compute_terms(s, u, p);
  const Eigen::Vector2<Scalar> rhs = t.force - t.bias - t.gravity;
  const Scalar det =
      t.mass(0, 0) * t.mass(1, 1) - t.mass(0, 1) * t.mass(0, 1);
  return {(t.mass(1, 1) * rhs[0] - t.mass(0, 1) * rhs[1]) / det,
          (t.mass(0, 0) * rhs[1] - t.mass(0, 1) * rhs[0]) / det};
}

/// Full state derivative [thd, phd, thdd, phdd] for integrators.
template <typename Scalar>
[[nodiscard]] Eigen::Vector4<Scalar> state_derivative(
    const StateT<Scalar>& s, const PlantInputT<Scalar>& u,
    const PlantParams& p) {
  const Eigen::Vector2<Scalar> qdd = accel(s, u, p);
  return {s.theta_dot, s.phi_dot, qdd[0], qdd[1]};
}

/// Total mechanical energy T + V with the potential referenced to the wheel
/// centre plane.  Conserved by the passive frictionless plant.
template <typename Scalar>
[[nodiscard]] Scalar mechanical_energy(const StateT<Scalar>& s,
                                       const PlantParams& p) {
  using std::cos;
  const Scalar c = cos(s.theta);
  const Scalar m11 = Scalar(p.m_b * p.l_b * p.l_b + p.i_b);
  const Scalar m12 = Scalar(p.m_b * p.l_b * p.r_w) * c;
  const Scalar m22 = Scalar((p.m_w + p.m_b) * p.r_w * p.r_w + p.i_w);
  const Scalar kinetic =
      Scalar(0.5) * (m11 * s.theta_dot * s.theta_dot +
                     Scalar(2) * m12 * s.theta_dot * s.phi_dot +
                     m22 * s.phi_dot * s.phi_dot);
  return kinetic + Scalar(p.m_b * p.gravity * p.l_b) * c;
}

/// One classical Runge-Kutta step with the input held constant.
template <typename Scalar>
[[nodiscard]] StateT<Scalar> rk4_step(const StateT<Scalar>& s,
                                      const PlantInputT<Scalar>& u,
                                      const PlantParams& p, double dt) {
  using V4 = Eigen::Vector4<Scalar>;
  const V4 x = s.vector();
  const V4 k1 = state_derivative(s, u, p);
  const V4 k2 =
      state_derivative(StateT<Scalar>::from_vector(x + Scalar(dt / 2) * k1), u, p);
  const V4 k3 =
      state_derivative(StateT<Scalar>::from_vector(x + Scalar(dt / 2) * k2), u, p);
  const V4 k4 =
      state_derivative(StateT<Scalar>::from_vector(x + Scalar(dt) * k3), u, p);
  return StateT<Scalar>::from_vector(
      x + Scalar(dt / 6) * (k1 + Scalar(2) * k2 + Scalar(2) * k3 + k4));
}

/// Continuous-time linearization xd = A x + B_tau tau + B_wrench w about an
/// operating point, state order [theta, phi, theta_dot, phi_dot].
struct LinearModel {
  Eigen::Matrix4d a;
  Eigen::Vector4d b_tau;
  Eigen::Matrix<double, 4, 3> b_wrench;  ///< columns f_px, f_pz, tau_p
};

/// Central-difference linearization; step max(1e-6, 1e-6 |x_i|) per channel.
/// The kinematic rows (theta_dot, phi_dot) are exact by construction.
[[nodiscard]] inline LinearModel linearize(const State& s, const PlantInput& u,
                                           const PlantParams& p) {
  const auto qdd_of = [&p](const Eigen::Vector4d& x, const PlantInput& in) {
    return accel(State::from_vector(x), in, p);
  };
  LinearModel lin;
  lin.a.setZero();
  lin.a(0, 2) = 1.0;
  lin.a(1, 3) = 1.0;

  const Eigen::Vector4d x0 = s.vector();
  for (int i = 0; i < 4; ++i) {
    const double h = std::max(1e-6, 1e-6 * std::abs(x0[i]));
    Eigen::Vector4d xp = x0, xm = x0;
    xp[i] += h;
    xm[i] -= h;
    lin.a.block<2, 1>(2, i) = (qdd_of(xp, u) - qdd_of(xm, u)) / (2.0 * h);
  }

  const auto input_column = [&](auto set) {
    const double h = 1e-6;
    PlantInput up = u, um = u;
    set(up, h);
    set(um, -h);
    Eigen::Vector4d col = Eigen::Vector4d::Zero();
    col.tail<2>() = (qdd_of(x0, up) - qdd_of(x0, um)) / (2.0 * h);
    return col;
  };
  lin.b_tau = input_column([](PlantInput& in, double d) { in.tau += d; });
  lin.b_wrench.col(0) =
      input_column([](PlantInput& in, double d) { in.wrench.f_px += d; });
  lin.b_wrench.col(1) =
      input_column([](PlantInput& in, double d) { in.wrench.f_pz += d; });
  lin.b_wrench.col(2) =
      input_column([](PlantInput& in, double d) { in.wrench.tau_p += d; });
  return lin;
}

}  // namespace ballbot

#endif  // BALLBOT_DYNAMICS_HPP
