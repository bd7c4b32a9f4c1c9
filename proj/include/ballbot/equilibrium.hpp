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

#ifndef BALLBOT_EQUILIBRIUM_HPP
#define BALLBOT_EQUILIBRIUM_HPP

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Core>

#include "ballbot/dynamics.hpp"
#include "ballbot/types.hpp"

namespace ballbot {

// ============================================================================
// Loaded equilibrium
// ============================================================================
//
// Given a constant interaction wrench and a commanded wheel rate phi_dot_c,
// find the tilt and wheel torque (theta_eq, tau_eq) at which the plant is in
// steady state:
//
//   accel([theta_eq, 0, 0, phi_dot_c], [tau_eq, wrench]) = 0
//
// Solved online by a damped 2x2 Newton iteration on that residual with a
// finite-difference Jacobian.  The solver is meant to run once per control
// tick, warm-started from the previous solution.

enum class EquilibriumStatus {
  kConverged,         ///< residual below tolerance, tilt within bounds
  kSaturated,         ///< tilt clamped to theta_max, torque refit
  kNoConvergence,     ///< iteration budget exhausted, best iterate returned
  kJacobianSingular,  ///< Newton step undefined, best iterate returned
};

struct EquilibriumOptions {
  double tolerance = 1e-9;   ///< on the residual infinity norm [rad/s^2]
  int max_iterations = 50;
  double theta_max = 0.52;   ///< tilt saturation [rad]
  double fd_step = 1e-7;     ///< Jacobian central-difference step
};

struct EquilibriumSolution {
  double theta_eq = 0.0;  ///< [rad]
  double tau_eq = 0.0;    ///< [N m]
  EquilibriumStatus status = EquilibriumStatus::kNoConvergence;
  int iterations = 0;
  double residual_norm = 0.0;  ///< infinity norm of (theta_dd, phi_dd)
};

namespace detail {

inline Eigen::Vector2d equilibrium_residual(const Eigen::Vector2d& x,
                                            const Wrench& w, double phi_dot_c,
                                            const PlantParams& p) {
  State s;
  s.theta = x[0];
  s.phi_dot = phi_dot_c;
  return accel(s, PlantInput{x[1], w}, p);
}

// tau enters the residual affinely, so after clamping the tilt the torque
// that minimizes the remaining residual has a closed least-squares form.
inline double refit_torque(double theta_fixed, const Wrench& w,
                           double phi_dot_c, const PlantParams& p) {
  const Eigen::Vector2d r0 =
      equilibrium_residual({theta_fixed, 0.0}, w, phi_dot_c, p);
  const Eigen::Vector2d r1 =
      equilibrium_residual({theta_fixed, 1.0}, w, phi_dot_c, p);
  const Eigen::Vector2d d = r1 - r0;
  return -d.dot(r0) / d.dot(d);
}

}  // namespace detail

/// Solves for the loaded equilibrium from an explicit initial guess
/// (theta, tau).  Pass the previous solution to warm-start.
[[nodiscard]] inline EquilibriumSolution solve_equilibrium(
    const Wrench& wrench, double phi_dot_cmd, const PlantParams& params,
    const EquilibriumOptions& opts = {},
    const Eigen::Vector2d& guess = Eigen::Vector2d::Zero()) {
  // Keep iterates strictly inside the model's tilt domain.
  const double theta_box = M_PI / 2.0 - 1e-3;
  const double max_theta_step = 0.3;

  Eigen::Vector2d x = guess;
  x[0] = std::clamp(x[0], -theta_box, theta_box);

  // Every exit honors the tilt policy: downstream consumers receive a
  // reference no steeper than theta_max with the best-fit torque for it,
  // whatever the solve status.
  const auto apply_tilt_policy = [&](EquilibriumSolution sol) {
    if (std::abs(sol.theta_eq) > opts.theta_max) {
      sol.theta_eq = std::copysign(opts.theta_max, sol.theta_eq);
      sol.tau_eq =
          detail::refit_torque(sol.theta_eq, wrench, phi_dot_cmd, params);
      sol.residual_norm =
          detail::equilibrium_residual({sol.theta_eq, sol.tau_eq}, wrench,
                                       phi_dot_cmd, params)
              .lpNorm<Eigen::Infinity>();
      if (sol.status == EquilibriumStatus::kConverged) {
        sol.status = EquilibriumStatus::kSaturated;
      }
    }
    return sol;
  };

  EquilibriumSolution best;
  best.theta_eq = x[0];
  best.tau_eq = x[1];
  best.residual_norm =
      detail::equilibrium_residual(x, wrench, phi_dot_cmd, params)
          .lpNorm<Eigen::Infinity>();
  best.status = EquilibriumStatus::kNoConvergence;

  for (int it = 1; it <= opts.max_iterations; ++it) {
    const Eigen::Vector2d r =
        detail::equilibrium_residual(x, wrench, phi_dot_cmd, params);
    const double rnorm = r.lpNorm<Eigen::Infinity>();
    if (rnorm <= best.residual_norm) {
      best.theta_eq = x[0];
      best.tau_eq = x[1];
      best.residual_norm = rnorm;
      best.iterations = it - 1;
    }
    if (rnorm < opts.tolerance) {
      best.status = EquilibriumStatus::kConverged;
      break;
    }

    Eigen::Matrix2d jac;
    for (int i = 0; i < 2; ++i) {
      Eigen::Vector2d xp = x, xm = x;
      xp[i] += opts.fd_step;
      xm[i] -= opts.fd_step;
      xp[0] = std::clamp(xp[0], -theta_box, theta_box);
      xm[0] = std::clamp(xm[0], -theta_box, theta_box);
      jac.col(i) =
          (detail::equilibrium_residual(xp, wrench, phi_dot_cmd, params) -
           detail::equilibrium_residual(xm, wrench, phi_dot_cmd, params)) /
          (xp[i] - xm[i]);
    }
    const double det = jac(0, 0) * jac(1, 1) - jac(0, 1) * jac(1, 0);
    if (std::abs(det) < 1e-12 * jac.cwiseAbs().maxCoeff() *
                            jac.cwiseAbs().maxCoeff() ||
        det == 0.0) {
      best.status = EquilibriumStatus::kJacobianSingular;
      return apply_tilt_policy(best);
    }
    Eigen::Vector2d step{(-jac(1, 1) * r[0] + jac(0, 1) * r[1]) / det,
                         (jac(1, 0) * r[0] - jac(0, 0) * r[1]) / det};
    if (std::abs(step[0]) > max_theta_step) {
      step *= max_theta_step / std::abs(step[0]);
    }
    x += step;
    x[0] = std::clamp(x[0], -theta_box, theta_box);
  }

  return apply_tilt_policy(best);
}

/// Online equilibrium solver that warm-starts each call from the previous
/// solution.  One instance per controller; stateless across trials only if
/// re-constructed.
class EquilibriumSolver {
 public:
  explicit EquilibriumSolver(const PlantParams& params,
                             const EquilibriumOptions& opts = {})
      : params_(params), opts_(opts) {
    validate(params);
  }

  EquilibriumSolution solve(const Wrench& wrench, double phi_dot_cmd) {
    const EquilibriumSolution sol =
        solve_equilibrium(wrench, phi_dot_cmd, params_, opts_, guess_);
    if (sol.status == EquilibriumStatus::kConverged ||
        sol.status == EquilibriumStatus::kSaturated) {
      guess_ = {sol.theta_eq, sol.tau_eq};
    }
    return sol;
  }

  void reset(const Eigen::Vector2d& guess = Eigen::Vector2d::Zero()) {
    guess_ = guess;
  }

  [[nodiscard]] const EquilibriumOptions& options() const { return opts_; }

 private:
  PlantParams params_;
  EquilibriumOptions opts_;
  Eigen::Vector2d guess_ = Eigen::Vector2d::Zero();
};

/// Sweeps the equilibrium map over a wrench grid, warm-starting along the
/// sequence.  Returns one solution per input wrench, in order.
[[nodiscard]] inline std::vector<EquilibriumSolution> equilibrium_sweep(
    const std::vector<Wrench>& wrenches, double phi_dot_cmd,
    const PlantParams& params, const EquilibriumOptions& opts = {}) {
  std::vector<EquilibriumSolution> out;
  out.reserve(wrenches.size());
  EquilibriumSolver solver(params, opts);
  for (const Wrench& w : wrenches) {
    out.push_back(solver.solve(w, phi_dot_cmd));
  }
  return out;
}

}  // namespace ballbot

#endif  // BALLBOT_EQUILIBRIUM_HPP
