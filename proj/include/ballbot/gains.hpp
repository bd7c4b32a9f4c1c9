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

#ifndef BALLBOT_GAINS_HPP
#define BALLBOT_GAINS_HPP

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "ballbot/dynamics.hpp"
#include "ballbot/types.hpp"

namespace ballbot {

// ============================================================================
// Rider anthropometrics and model lumping
// ============================================================================

/// Anthropometric description of a seated rider.  The torso fractions follow
/// standard segment tables; the COM fraction is scaled by a calibration
/// constant chosen so a 1.80 m rider carries the torso COM 0.35 m above the
/// seat.
struct RiderParams {
  double height = 1.70;   ///< standing height [m]
  double weight = 70.0;   ///< body mass [kg]
  double torso_mass_fraction = 0.578;
  double torso_com_fraction = 0.19;       ///< of height, above the seat
  double torso_gyration_fraction = 0.25;  ///< of height, about the torso COM
  double seat_height = 0.55;  ///< seat above the wheel centre [m]
  double max_lean = 0.52;     ///< lean the rider can script [rad]
};

/// Calibration for the torso COM height above the seat; see RiderParams.
inline constexpr double kTorsoComCalibration = 0.35 / (0.19 * 1.8);

inline void validate(const RiderParams& r) {
  if (!(r.height > 0.5 && r.height < 2.5)) {
    throw std::invalid_argument("RiderParams: height out of range");
  }
  if (!(r.weight > 10.0 && r.weight < 300.0)) {
    throw std::invalid_argument("RiderParams: weight out of range");
  }
  if (!(r.torso_mass_fraction > 0.0 && r.torso_mass_fraction < 1.0) ||
      !(r.torso_com_fraction > 0.0) || !(r.torso_gyration_fraction > 0.0)) {
    throw std::invalid_argument("RiderParams: fractions out of range");
  }
  if (!(r.seat_height > 0.0) || !(r.max_lean > 0.0)) {
    throw std::invalid_argument("RiderParams: seat_height/max_lean invalid");
  }
}

/// Torso mass of a rider [kg].
[[nodiscard]] inline double torso_mass(const RiderParams& r) {
  return r.torso_mass_fraction * r.weight;
}

/// Torso COM height above the seat [m].
[[nodiscard]] inline double torso_com_above_seat(const RiderParams& r) {
  return kTorsoComCalibration * r.torso_com_fraction * r.height;
}

/// Folds a rigidly seated rider torso into the chassis body: combined mass,
/// combined COM height, and parallel-axis inertia about the combined COM.
/// Wheel-side parameters are untouched.
[[nodiscard]] inline PlantParams lump_rider(const RiderParams& rider,
                                            const PlantParams& base) {
  validate(base);
  validate(rider);
  const double m_t = torso_mass(rider);
  const double h_t = rider.seat_height + torso_com_above_seat(rider);
  const double i_t =
      m_t * std::pow(rider.torso_gyration_fraction * rider.height, 2);

  PlantParams lumped = base;
  lumped.m_b = base.m_b + m_t;
  lumped.l_b = (base.m_b * base.l_b + m_t * h_t) / lumped.m_b;
  lumped.i_b = base.i_b + base.m_b * std::pow(base.l_b - lumped.l_b, 2) +
               i_t + m_t * std::pow(h_t - lumped.l_b, 2);
  return lumped;
}

// ============================================================================
// Continuous algebraic Riccati equation
// ============================================================================

struct CareOptions {
  int max_iterations = 100;
  /// Newton increment convergence threshold, relative to ||P||.
  double step_tolerance = 1e-13;
  /// Acceptance bound on ||A'P + PA - PBR^-1B'P + Q||_F / (1 + ||P||_F).
  double residual_bound = 1e-8;
};

struct CareSolution {
  Eigen::MatrixXd p;  ///< stabilizing solution, symmetric PSD
  int iterations = 0;
  double residual = 0.0;  ///< Frobenius norm of the Riccati residual
};

namespace detail {

/// Solves A X + X A' = S by the Kronecker-product linear system; intended
/// for the n <= 4 systems handled here.
[[nodiscard]] inline Eigen::MatrixXd lyapunov_solve(const Eigen::MatrixXd& a,
                                                    const Eigen::MatrixXd& s) {
  const auto n = a.rows();
  Eigen::MatrixXd big = Eigen::MatrixXd::Zero(n * n, n * n);
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      // vec(A X) = (I (x) A) vec(X); vec(X A') = (A (x) I) vec(X).
      big.block(i * n, j * n, n, n) += eye(i, j) * a;
      big.block(i * n, j * n, n, n) += a(i, j) * eye;
    }
  }
  const Eigen::VectorXd rhs =
      Eigen::Map<const Eigen::VectorXd>(s.data(), n * n);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(big);
  if (!lu.isInvertible()) {
    throw std::runtime_error("lyapunov_solve: singular operator");
  }
  const Eigen::VectorXd vx = lu.solve(rhs);
  Eigen::MatrixXd x = Eigen::Map<const Eigen::MatrixXd>(vx.data(), n, n);
  return 0.5 * (x + x.transpose());
}

/// Bass stabilization: with beta exceeding the spectral abscissa of A, solve
/// (A + beta I) W + W (A + beta I)' = 2 B B' and take K0 = B' W^-1.  Then
/// (A - B K0) W + W (A - B K0)' = -2 beta W with W > 0 certifies Hurwitz.
[[nodiscard]] inline Eigen::MatrixXd initial_stabilizing_gain(
    const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const double beta = 1.0 + a.norm();
  const auto n = a.rows();
  const Eigen::MatrixXd shifted =
      a + beta * Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd w =
      lyapunov_solve(shifted, 2.0 * b * b.transpose());
  Eigen::FullPivLU<Eigen::MatrixXd> lu(w);
  if (!lu.isInvertible()) {
    throw std::runtime_error(
        "solve_care: (A, B) not stabilizable (Bass seed is singular)");
  }
  return b.transpose() * lu.inverse();
}

[[nodiscard]] inline bool is_hurwitz(const Eigen::MatrixXd& m,
                                     double margin = 0.0) {
  const Eigen::EigenSolver<Eigen::MatrixXd> es(m);
  return (es.eigenvalues().real().array() < -margin).all();
}

}  // namespace detail

/// Solves the continuous algebraic Riccati equation
///
///   A'P + PA - P B R^-1 B' P + Q = 0
///
/// for the stabilizing P by Newton-Kleinman iteration seeded with a Bass
/// initial gain; each Newton step is one Lyapunov solve.  Throws
/// std::invalid_argument on shape/symmetry violations and
/// std::runtime_error when the pair is not stabilizable or the iteration
/// fails the residual acceptance bound.
[[nodiscard]] inline CareSolution solve_care(const Eigen::MatrixXd& a,
                                             const Eigen::MatrixXd& b,
                                             const Eigen::MatrixXd& q,
                                             const Eigen::MatrixXd& r,
                                             const CareOptions& opts = {}) {
  const auto n = a.rows();
  const auto m = b.cols();
  if (a.cols() != n || b.rows() != n || q.rows() != n || q.cols() != n ||
      r.rows() != m || r.cols() != m) {
    throw std::invalid_argument("solve_care: inconsistent dimensions");
  }
  if (!q.isApprox(q.transpose(), 1e-12)) {
    throw std::invalid_argument("solve_care: Q must be symmetric");
  }
  if (!r.isApprox(r.transpose(), 1e-12)) {
    throw std::invalid_argument("solve_care: R must be symmetric");
  }
  {
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> rq(q);
    if (rq.eigenvalues().minCoeff() < -1e-12 * (1.0 + q.norm())) {
      throw std::invalid_argument("solve_care: Q must be PSD");
    }
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> rr(r);
    if (rr.eigenvalues().minCoeff() <= 0.0) {
      throw std::invalid_argument("solve_care: R must be PD");
    }
  }

  const Eigen::MatrixXd r_inv_bt = r.ldlt().solve(b.transpose());
  Eigen::MatrixXd k = detail::initial_stabilizing_gain(a, b);
  if (!detail::is_hurwitz(a - b * k)) {
    throw std::runtime_error("solve_care: (A, B) not stabilizable");
  }

  CareSolution sol;
  Eigen::MatrixXd p_prev;
  for (int it = 1; it <= opts.max_iterations; ++it) {
    // Kleinman step: A_cl' P + P A_cl = -(Q + K'RK) with A_cl = A - BK.
    const Eigen::MatrixXd a_lyap = (a - b * k).transpose();
    const Eigen::MatrixXd rhs = -(q + k.transpose() * r * k);
    sol.p = detail::lyapunov_solve(a_lyap, rhs);
    sol.iterations = it;
    k = r_inv_bt * sol.p;
    if (it > 1) {
      const double step = (sol.p - p_prev).norm();
      if (step <= opts.step_tolerance * (1.0 + sol.p.norm())) {
        break;
      }
    }
    p_prev = sol.p;
  }

  const Eigen::MatrixXd residual = a.transpose() * sol.p + sol.p * a -
                                   sol.p * b * r_inv_bt * sol.p + q;
  sol.residual = residual.norm();
  if (!(sol.residual <= opts.residual_bound * (1.0 + sol.p.norm()))) {
    throw std::runtime_error("solve_care: residual bound not met after " +
                             std::to_string(sol.iterations) + " iterations");
  }
  return sol;
}

// ============================================================================
// Personalized balancing gains
// ============================================================================

/// State-feedback weights for the balancing regulator.  The wheel angle is
/// uncontrolled (free position), so its row and column of Q must stay zero.
struct LqrWeights {
  Eigen::Matrix4d q =
      Eigen::Vector4d(100.0, 0.0, 1.0, 10.0).asDiagonal();
  double r = 1.0;
};

inline void validate(const LqrWeights& w) {
  if (!(w.r > 0.0)) {
    throw std::invalid_argument("LqrWeights: r must be positive");
  }
  if (!w.q.isApprox(w.q.transpose(), 1e-12)) {
    throw std::invalid_argument("LqrWeights: Q must be symmetric");
  }
  if (w.q.row(1).cwiseAbs().maxCoeff() > 0.0 ||
      w.q.col(1).cwiseAbs().maxCoeff() > 0.0) {
    throw std::invalid_argument(
        "LqrWeights: wheel-angle row/column of Q must be zero");
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(w.q);
  if (es.eigenvalues().minCoeff() < -1e-12 * (1.0 + w.q.norm())) {
    throw std::invalid_argument("LqrWeights: Q must be PSD");
  }
}

/// Full-state feedback row vector for tau = k (s_cmd - s), state order
/// [theta, phi, theta_dot, phi_dot].  The phi entry is identically zero.
struct GainVector {
  Eigen::RowVector4d k = Eigen::RowVector4d::Zero();

  [[nodiscard]] double k_theta() const { return k[0]; }
  [[nodiscard]] double k_phi() const { return k[1]; }
  [[nodiscard]] double k_theta_dot() const { return k[2]; }
  [[nodiscard]] double k_phi_dot() const { return k[3]; }
};

/// Synthesizes balancing gains for one plant: linearize at upright zero
/// input, drop the uncontrolled wheel angle, solve the reduced Riccati
/// equation, and re-embed with a zero wheel-angle gain.
[[nodiscard]] inline GainVector synthesize_gains(
    const PlantParams& plant, const LqrWeights& weights = {}) {
  validate(plant);
  validate(weights);
  const LinearModel lin = linearize(State{}, PlantInput{}, plant);

  // Reduced state [theta, theta_dot, phi_dot]: indices {0, 2, 3}.
  constexpr int idx[3] = {0, 2, 3};
  Eigen::Matrix3d a;
  Eigen::Vector3d b;
  Eigen::Matrix3d q;
  for (int i = 0; i < 3; ++i) {
    b[i] = lin.b_tau[idx[i]];
    for (int j = 0; j < 3; ++j) {
      a(i, j) = lin.a(idx[i], idx[j]);
      q(i, j) = weights.q(idx[i], idx[j]);
    }
  }
  Eigen::MatrixXd r(1, 1);
  r(0, 0) = weights.r;

  const CareSolution care = solve_care(a, b, q, r);
  const Eigen::RowVector3d k_red =
      (b.transpose() * care.p) / weights.r;

  GainVector gains;
  gains.k << k_red[0], 0.0, k_red[1], k_red[2];

  // The full closed loop keeps the neutral integrator of the wheel angle;
  // the contract is on the reduced dynamics.
  const Eigen::Matrix4d a_cl = lin.a - lin.b_tau * gains.k;
  Eigen::Matrix3d reduced_cl;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      reduced_cl(i, j) = a_cl(idx[i], idx[j]);
    }
  }
  if (!detail::is_hurwitz(reduced_cl, 1e-9)) {
    throw std::runtime_error("synthesize_gains: closed loop not Hurwitz");
  }
  return gains;
}

/// Rider-personalized gains: lump the torso into the chassis, then
/// synthesize on the lumped model.
[[nodiscard]] inline GainVector personalize_gains(
    const RiderParams& rider, const PlantParams& base,
    const LqrWeights& weights = {}) {
  return synthesize_gains(lump_rider(rider, base), weights);
}

}  // namespace ballbot

#endif  // BALLBOT_GAINS_HPP
