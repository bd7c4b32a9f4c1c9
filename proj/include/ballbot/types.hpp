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

#ifndef BALLBOT_TYPES_HPP
#define BALLBOT_TYPES_HPP

#include <Eigen/Core>
#include <cmath>
#include <complex>
#include <stdexcept>

namespace ballbot {

/// Physical parameters of the planar (sagittal-plane) ballbot.
///
/// The model is a spherical wheel rolling without slipping along the world
/// x axis plus a rigid chassis pivoting on the wheel centre.  The rider
/// interacts through a wrench applied at a point P on the chassis axis.
///
/// World frame: x forward, z up.  The chassis tilt theta is measured from
/// vertical toward +x, so a positive tilt leans the chassis forward.
struct PlantParams {
  double m_w = 4.0;     ///< wheel (ball) mass [kg]
  double r_w = 0.115;   ///< wheel radius [m]
  double m_b = 50.0;    ///< chassis mass [kg]
  double l_b = 0.35;    ///< chassis COM height above wheel centre [m]
  double h_p = 0.55;    ///< interaction point P height above wheel centre [m]
  double i_w = 2.0 / 3.0 * 4.0 * 0.115 * 0.115;  ///< wheel inertia [kg m^2]
  double i_b = 2.0;     ///< chassis pitch inertia about its COM [kg m^2]
  double b_theta = 0.1; ///< viscous friction at the chassis pivot [N m s/rad]
  double b_phi = 1.0;   ///< viscous rolling friction at the wheel [N m s/rad]
  double gravity = 9.81;  ///< gravitational acceleration [m/s^2]
};

/// Inertia of a thin spherical shell, the default wheel model.
[[nodiscard]] inline double shell_inertia(double mass, double radius) {
  return 2.0 / 3.0 * mass * radius * radius;
}

/// Throws std::invalid_argument when a parameter is outside its physical
/// domain (non-positive masses, lengths, inertias, negative friction).
inline void validate(const PlantParams& p) {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument(std::string("PlantParams: ") + name +
                                  " must be positive and finite");
    }
  };
  positive(p.m_w, "m_w");
  positive(p.r_w, "r_w");
  positive(p.m_b, "m_b");
  positive(p.l_b, "l_b");
  positive(p.h_p, "h_p");
  positive(p.i_w, "i_w");
  positive(p.i_b, "i_b");
  positive(p.gravity, "gravity");
  if (p.b_theta < 0.0 || p.b_phi < 0.0 || !std::isfinite(p.b_theta) ||
      !std::isfinite(p.b_phi)) {
    throw std::invalid_argument(
        "PlantParams: friction coefficients must be non-negative");
  }
}

/// Plant state [theta, phi, theta_dot, phi_dot].
///
/// Templated on the scalar so derivative oracles can instantiate the same
/// dynamics with std::complex<double> (complex-step differentiation).
template <typename Scalar>
struct StateT {
  Scalar theta{};      ///< chassis tilt from vertical [rad]
  Scalar phi{};        ///< wheel rotation [rad]; centre position x = r_w*phi
  Scalar theta_dot{};  ///< [rad/s]
  Scalar phi_dot{};    ///< [rad/s]

  [[nodiscard]] Eigen::Vector4<Scalar> vector() const {
    return {theta, phi, theta_dot, phi_dot};
  }
  [[nodiscard]] static StateT from_vector(const Eigen::Vector4<Scalar>& v) {
    return {v[0], v[1], v[2], v[3]};
  }
};
using State = StateT<double>;

/// Rider interaction wrench at P, expressed in the chassis frame.
///
/// f_px acts along the chassis forward axis, f_pz along the chassis axis
/// toward P, tau_p is a pure pitch torque (positive tips the chassis
/// forward, same sense as theta).
template <typename Scalar>
struct WrenchT {
  Scalar f_px{};   ///< [N]
  Scalar f_pz{};   ///< [N]
  Scalar tau_p{};  ///< [N m]
};
using Wrench = WrenchT<double>;

/// Full plant input: wheel torque plus the interaction wrench.  The wheel
/// torque acts between chassis and wheel, so it reacts on the chassis.
template <typename Scalar>
struct PlantInputT {
  Scalar tau{};  ///< wheel torque [N m]
  WrenchT<Scalar> wrench{};
};
using PlantInput = PlantInputT<double>;

namespace detail {
inline double real_part(double x) { return x; }
inline double real_part(const std::complex<double>& x) { return x.real(); }
}  // namespace detail

}  // namespace ballbot

#endif  // BALLBOT_TYPES_HPP
