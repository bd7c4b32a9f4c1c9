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

#ifndef BALLBOT_RIDER_HPP
#define BALLBOT_RIDER_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "ballbot/dynamics.hpp"
#include "ballbot/gains.hpp"
#include "ballbot/types.hpp"

namespace ballbot {

// ============================================================================
// Scripted rider: lean profiles
// ============================================================================
//
// The rider torso is a pendulum pivoted at P whose world-frame lean angle
// zeta(t) is prescribed by a profile.  Zero lean is gravity-aligned; positive
// lean tips the torso forward, same sense as the chassis tilt.  Profiles are
// C^1: ramps are blended over 0.1 s so the lean rate is continuous.

/// Lean angle and its first two time derivatives.
struct LeanSample {
  double zeta = 0.0;       ///< [rad]
  double zeta_dot = 0.0;   ///< [rad/s]
  double zeta_ddot = 0.0;  ///< [rad/s^2]
};

namespace detail {

/// C^1 ramp from 0 to |amplitude| with smoothstep-blended rate.  Evaluated
/// on local time u in [0, duration]; callers handle offsets and sign.
class SmoothRamp {
 public:
  static constexpr double kBlend = 0.1;  ///< [s]

  SmoothRamp() = default;
  SmoothRamp(double amplitude, double rate)
      : amp_(std::abs(amplitude)), rate_(rate) {
    const double cruise = amp_ / rate_ - kBlend;
    if (cruise >= 0.0) {
      cruise_ = cruise;
      short_form_ = false;
    } else {
      // Target closer than one blend pair: single smoothstep, peak rate
      // no larger than the requested one.
      short_duration_ = std::max(2.0 * amp_ / rate_, 2.0 * kBlend);
      short_form_ = true;
    }
  }

  [[nodiscard]] double duration() const {
    return short_form_ ? short_duration_ : 2.0 * kBlend + cruise_;
  }

  [[nodiscard]] LeanSample at(double u) const {
    LeanSample out;
    if (u <= 0.0) {
      return out;
    }
    if (u >= duration()) {
      out.zeta = amp_;
      return out;
    }
    if (short_form_) {
      const double x = u / short_duration_;
      out.zeta = amp_ * smooth(x);
      out.zeta_dot = amp_ * dsmooth(x) / short_duration_;
      out.zeta_ddot =
          amp_ * ddsmooth(x) / (short_duration_ * short_duration_);
      return out;
    }
    if (u < kBlend) {
      const double x = u / kBlend;
      out.zeta = rate_ * kBlend * blend_pos(x);
      out.zeta_dot = rate_ * smooth(x);
      out.zeta_ddot = rate_ * dsmooth(x) / kBlend;
    } else if (u < kBlend + cruise_) {
      out.zeta = rate_ * kBlend / 2.0 + rate_ * (u - kBlend);
      out.zeta_dot = rate_;
    } else {
      const double y = (duration() - u) / kBlend;
      out.zeta = amp_ - rate_ * kBlend * blend_pos(y);
      out.zeta_dot = rate_ * smooth(y);
      out.zeta_ddot = -rate_ * dsmooth(y) / kBlend;
    }
    return out;
  }

 private:
  static double smooth(double x) { return x * x * (3.0 - 2.0 * x); }
  static double dsmooth(double x) { return 6.0 * x * (1.0 - x); }
  static double ddsmooth(double x) { return 6.0 - 12.0 * x; }
  /// Integral of smooth: position fraction of one blend, in [0, 1/2].
  static double blend_pos(double x) {
    return x * x * x - x * x * x * x / 2.0;
  }

  double amp_ = 0.0;
  double rate_ = 1.0;
  double cruise_ = 0.0;
  double short_duration_ = 0.0;
  bool short_form_ = false;
};

}  // namespace detail

/// Unipolar profile: ramp to the target, stay for `hold` seconds, ramp back
/// to zero.  An infinite hold keeps the target to the end of the trial.
struct RampHoldProfile {
  double start = 0.0;   ///< [s]
  double rate = 0.35;   ///< peak lean rate [rad/s]
  double target = 0.35; ///< [rad]
  double hold = std::numeric_limits<double>::infinity();  ///< [s]
};

/// Bipolar profile: ramp to +target, hold, ramp through zero to -target,
/// hold, ramp back to zero.  Models lean-forward-then-backward tasks.
struct TrapezoidProfile {
  double start = 0.0;
  double rate = 0.35;
  double target = 0.35;
  double hold = 2.0;
};

/// Sinusoidal lean with a smoothstep onset envelope (keeps C^1 at start).
struct SinusoidProfile {
  double start = 0.0;
  double amplitude = 0.2;  ///< [rad]
  double frequency = 0.5;  ///< [Hz]
};

/// Sampled lean replayed through a monotone (overshoot-free) C^1 cubic
/// interpolant; constant beyond the endpoints.
struct ScriptProfile {
  std::vector<double> time;   ///< strictly increasing [s]
  std::vector<double> value;  ///< [rad]
};

/// Prescribed rider lean zeta(t).  The profile is clamped to the rider's
/// maximum lean at construction (targets, amplitudes and samples are capped,
/// which preserves smoothness).
class LeanProfile {
 public:
  using Shape = std::variant<RampHoldProfile, TrapezoidProfile,
                             SinusoidProfile, ScriptProfile>;

  LeanProfile() : LeanProfile(RampHoldProfile{0.0, 0.35, 0.0}, 0.52) {}

  LeanProfile(Shape shape, double max_lean)
      : shape_(std::move(shape)), max_lean_(max_lean) {
    if (!(max_lean_ > 0.0)) {
      throw std::invalid_argument("LeanProfile: max_lean must be positive");
    }
    std::visit([this](auto& s) { prepare(s); }, shape_);
  }

  [[nodiscard]] LeanSample at(double t) const {
    return std::visit([&](const auto& s) { return eval(s, t); }, shape_);
  }

  [[nodiscard]] double max_lean() const { return max_lean_; }

 private:
  void prepare(RampHoldProfile& s) {
    check_rate(s.rate);
    s.target = std::clamp(s.target, -max_lean_, max_lean_);
    ramp_ = detail::SmoothRamp(s.target, s.rate);
    if (!(s.hold >= 0.0)) {
      throw std::invalid_argument("LeanProfile: hold must be >= 0");
    }
  }
  void prepare(TrapezoidProfile& s) {
    check_rate(s.rate);
    s.target = std::clamp(s.target, -max_lean_, max_lean_);
    ramp_ = detail::SmoothRamp(s.target, s.rate);
    // Crossing from +target to -target covers twice the amplitude.
    cross_ = detail::SmoothRamp(2.0 * s.target, s.rate);
    if (!(s.hold >= 0.0)) {
      throw std::invalid_argument("LeanProfile: hold must be >= 0");
    }
  }
  void prepare(SinusoidProfile& s) {
    if (!(s.frequency > 0.0)) {
      throw std::invalid_argument("LeanProfile: frequency must be positive");
    }
    s.amplitude = std::clamp(s.amplitude, -max_lean_, max_lean_);
  }
  void prepare(ScriptProfile& s) {
    if (s.time.size() < 2 || s.time.size() != s.value.size()) {
      throw std::invalid_argument(
          "LeanProfile: script needs >= 2 samples with matching sizes");
    }
    for (size_t i = 1; i < s.time.size(); ++i) {
      if (!(s.time[i] > s.time[i - 1])) {
        throw std::invalid_argument(
            "LeanProfile: script times must strictly increase");
      }
    }
    for (double& v : s.value) {
      v = std::clamp(v, -max_lean_, max_lean_);
    }
    script_slopes_ = monotone_slopes(s.time, s.value);
  }

  static void check_rate(double rate) {
    if (!(rate > 0.0)) {
      throw std::invalid_argument("LeanProfile: rate must be positive");
    }
  }

  [[nodiscard]] LeanSample eval(const RampHoldProfile& s, double t) const {
    const double sign = s.target < 0.0 ? -1.0 : 1.0;
    const double up_end = ramp_.duration();
    double u = t - s.start;
    LeanSample out;
    if (u <= 0.0) {
      return out;
    }
    if (u <= up_end) {
      out = ramp_.at(u);
    } else if (u <= up_end + s.hold) {
      out = ramp_.at(up_end);
    } else {
      const LeanSample down = ramp_.at(u - up_end - s.hold);
      out.zeta = std::abs(s.target) - down.zeta;
      out.zeta_dot = -down.zeta_dot;
      out.zeta_ddot = -down.zeta_ddot;
    }
    out.zeta *= sign;
    out.zeta_dot *= sign;
    out.zeta_ddot *= sign;
    return out;
  }

  [[nodiscard]] LeanSample eval(const TrapezoidProfile& s, double t) const {
    const double sign = s.target < 0.0 ? -1.0 : 1.0;
    const double a = std::abs(s.target);
    const double up = ramp_.duration();
    const double cross = cross_.duration();
    double u = t - s.start;
    LeanSample out;
    if (u <= 0.0) {
      return out;
    }
    if (u <= up) {
      out = ramp_.at(u);
    } else if (u <= up + s.hold) {
      out.zeta = a;
    } else if (u <= up + s.hold + cross) {
      const LeanSample c = cross_.at(u - up - s.hold);
      out.zeta = a - c.zeta;
      out.zeta_dot = -c.zeta_dot;
      out.zeta_ddot = -c.zeta_ddot;
    } else if (u <= up + 2.0 * s.hold + cross) {
      out.zeta = -a;
    } else {
      const LeanSample r = ramp_.at(u - up - 2.0 * s.hold - cross);
      out.zeta = -a + r.zeta;
      out.zeta_dot = r.zeta_dot;
      out.zeta_ddot = r.zeta_ddot;
    }
    out.zeta *= sign;
    out.zeta_dot *= sign;
    out.zeta_ddot *= sign;
    return out;
  }

  [[nodiscard]] LeanSample eval(const SinusoidProfile& s, double t) const {
    LeanSample out;
    const double u = t - s.start;
    if (u <= 0.0) {
      return out;
    }
    const double w = 2.0 * M_PI * s.frequency;
    const double sn = std::sin(w * u);
    const double cs = std::cos(w * u);
    constexpr double tb = detail::SmoothRamp::kBlend;
    double e = 1.0, de = 0.0, dde = 0.0;
    if (u < tb) {
      const double x = u / tb;
      e = x * x * (3.0 - 2.0 * x);
      de = 6.0 * x * (1.0 - x) / tb;
      dde = (6.0 - 12.0 * x) / (tb * tb);
    }
    out.zeta = s.amplitude * e * sn;
    out.zeta_dot = s.amplitude * (de * sn + e * w * cs);
    out.zeta_ddot =
        s.amplitude * (dde * sn + 2.0 * de * w * cs - e * w * w * sn);
    return out;
  }

  [[nodiscard]] LeanSample eval(const ScriptProfile& s, double t) const {
    LeanSample out;
    if (t <= s.time.front()) {
      out.zeta = s.value.front();
      return out;
    }
    if (t >= s.time.back()) {
      out.zeta = s.value.back();
      return out;
    }
    const auto it =
        std::upper_bound(s.time.begin(), s.time.end(), t) - 1;
    const size_t i = static_cast<size_t>(it - s.time.begin());
    const double h = s.time[i + 1] - s.time[i];
    const double x = (t - s.time[i]) / h;
    const double y0 = s.value[i], y1 = s.value[i + 1];
    const double m0 = script_slopes_[i] * h, m1 = script_slopes_[i + 1] * h;
    // Cubic Hermite basis.
    const double x2 = x * x, x3 = x2 * x;
    out.zeta = (2 * x3 - 3 * x2 + 1) * y0 + (x3 - 2 * x2 + x) * m0 +
               (-2 * x3 + 3 * x2) * y1 + (x3 - x2) * m1;
    out.zeta_dot = ((6 * x2 - 6 * x) * y0 + (3 * x2 - 4 * x + 1) * m0 +
                    (-6 * x2 + 6 * x) * y1 + (3 * x2 - 2 * x) * m1) /
                   h;
    out.zeta_ddot = ((12 * x - 6) * y0 + (6 * x - 4) * m0 +
                     (-12 * x + 6) * y1 + (6 * x - 2) * m1) /
                    (h * h);
    return out;
  }

  /// Fritsch-Carlson monotone-limited slopes: the interpolant never
  /// overshoots the sample range, so the max-lean clamp stays honored.
  [[nodiscard]] static std::vector<double> monotone_slopes(
      const std::vector<double>& t, const std::vector<double>& v) {
    const size_t n = t.size();
    std::vector<double> delta(n - 1), m(n, 0.0);
    for (size_t i = 0; i + 1 < n; ++i) {
      delta[i] = (v[i + 1] - v[i]) / (t[i + 1] - t[i]);
    }
    // Endpoint tangents zero: C^1 with the constant extension outside.
    for (size_t i = 1; i + 1 < n; ++i) {
      if (delta[i - 1] * delta[i] > 0.0) {
        m[i] = 2.0 / (1.0 / delta[i - 1] + 1.0 / delta[i]);  // harmonic mean
      }
    }
    for (size_t i = 0; i + 1 < n; ++i) {
      if (delta[i] == 0.0) {
        m[i] = 0.0;
        m[i + 1] = 0.0;
      } else {
        const double a = m[i] / delta[i], b = m[i + 1] / delta[i];
        const double s = a * a + b * b;
        if (s > 9.0) {
          const double f = 3.0 / std::sqrt(s);
          m[i] *= f;
          m[i + 1] *= f;
        }
      }
    }
    return m;
  }

  Shape shape_;
  double max_lean_;
  detail::SmoothRamp ramp_;
  detail::SmoothRamp cross_;
  std::vector<double> script_slopes_;
};

// ============================================================================
// Torso wrench
// ============================================================================

/// Rigid-torso pendulum pivoted at P.
struct TorsoParams {
  double mass = 40.46;        ///< [kg]
  double com_offset = 0.3306; ///< COM distance from the pivot [m]
  double inertia_com = 7.31;  ///< pitch inertia about the torso COM [kg m^2]
};

inline void validate(const TorsoParams& t) {
  if (!(t.mass > 0.0) || !(t.com_offset > 0.0) || !(t.inertia_com >= 0.0)) {
    throw std::invalid_argument("TorsoParams: non-physical values");
  }
}

/// Builds TorsoParams from the same anthropometrics the gain lumping uses.
/// The COM offset is measured from P, so the seat must not sit below P by
/// more than the torso COM height.
[[nodiscard]] inline TorsoParams torso_from_rider(const RiderParams& rider,
                                                  const PlantParams& plant) {
  validate(rider);
  validate(plant);
  TorsoParams t;
  t.mass = torso_mass(rider);
  t.com_offset =
      rider.seat_height + torso_com_above_seat(rider) - plant.h_p;
  t.inertia_com =
      t.mass * std::pow(rider.torso_gyration_fraction * rider.height, 2);
  if (!(t.com_offset > 0.0)) {
    throw std::invalid_argument(
        "torso_from_rider: torso COM does not clear the interaction point");
  }
  return t;
}

enum class WrenchMode {
  kQuasiStatic,  ///< gravity reaction of a statically held torso
  kDynamic,      ///< Newton-Euler reaction incl. base and lean accelerations
};

/// Wrench the torso applies to the chassis at P, in the chassis frame.
///
/// QuasiStatic ignores all rates: the force is the torso weight rotated into
/// the chassis frame and the torque is the gravity moment m g l sin(zeta)
/// about the pivot.  Dynamic adds the inertial terms from the prescribed
/// lean motion and the chassis accelerations `qdd` = (theta_dd, phi_dd).
[[nodiscard]] inline Wrench torso_wrench(const LeanSample& lean,
                                         const State& chassis,
                                         const Eigen::Vector2d& qdd,
                                         const TorsoParams& torso,
                                         const PlantParams& plant,
                                         WrenchMode mode) {
  const double st = std::sin(chassis.theta);
  const double ct = std::cos(chassis.theta);
  const double sz = std::sin(lean.zeta);
  const double cz = std::cos(lean.zeta);
  const double m = torso.mass;
  const double l = torso.com_offset;
  const double g = plant.gravity;

  Wrench w;
  if (mode == WrenchMode::kQuasiStatic) {
    w.f_px = m * g * st;
    w.f_pz = -m * g * ct;
    w.tau_p = m * g * l * sz;
    return w;
  }

  // World acceleration of the pivot P carried by the chassis.
  const double td = chassis.theta_dot;
  const Eigen::Vector2d a_p{
      plant.r_w * qdd[1] + plant.h_p * (ct * qdd[0] - st * td * td),
      plant.h_p * (-st * qdd[0] - ct * td * td)};
  // World acceleration of the torso COM at the prescribed lean motion.
  const double zd = lean.zeta_dot, zdd = lean.zeta_ddot;
  const Eigen::Vector2d a_com =
      a_p + l * Eigen::Vector2d{cz * zdd - sz * zd * zd,
                                -sz * zdd - cz * zd * zd};

  // Pivot force on the torso (world frame), then the pivot moment from the
  // torso's rotational balance about its COM.  Moments are taken positive
  // in the forward-pitch sense: mom(r, F) = r_z F_x - r_x F_z.
  const Eigen::Vector2d f_pivot{m * a_com[0], m * a_com[1] + m * g};
  const Eigen::Vector2d r{l * sz, l * cz};
  const double mom = r[1] * f_pivot[0] - r[0] * f_pivot[1];
  const double m_pivot = torso.inertia_com * zdd + mom;

  // Reaction on the chassis, rotated into the chassis frame.
  const Eigen::Vector2d f_world = -f_pivot;
  w.f_px = f_world[0] * ct - f_world[1] * st;
  w.f_pz = f_world[0] * st + f_world[1] * ct;
  w.tau_p = -m_pivot;
  return w;
}

/// Accelerations of the chassis coupled to the prescribed torso, plus the
/// consistent interaction wrench.  The torso wrench is affine in the chassis
/// accelerations, so the implicit coupling reduces to a 2x2 linear solve.
[[nodiscard]] inline std::pair<Eigen::Vector2d, Wrench> coupled_torso_accel(
    const State& s, double tau, const LeanSample& lean,
    const TorsoParams& torso, const PlantParams& plant) {
  const auto wrench_at = [&](const Eigen::Vector2d& qdd) {
    return torso_wrench(lean, s, qdd, torso, plant, WrenchMode::kDynamic);
  };
  const Wrench w0 = wrench_at({0.0, 0.0});
  const Wrench wa = wrench_at({1.0, 0.0});
  const Wrench wb = wrench_at({0.0, 1.0});
  Eigen::Matrix<double, 3, 2> dw;
  dw << wa.f_px - w0.f_px, wb.f_px - w0.f_px,
        wa.f_pz - w0.f_pz, wb.f_pz - w0.f_pz,
        wa.tau_p - w0.tau_p, wb.tau_p - w0.tau_p;

  // Generalized-force map of a chassis-frame wrench at P.
  const double st = std::sin(s.theta);
  const double ct = std::cos(s.theta);
  Eigen::Matrix<double, 2, 3> sw;
  sw << plant.h_p, 0.0, 1.0,
        plant.r_w * ct, plant.r_w * st, 0.0;

  const DynamicsTerms terms = compute_terms(s, PlantInput{tau, w0}, plant);
  const Eigen::Matrix2d lhs = terms.mass - sw * dw;
  const Eigen::Vector2d rhs = terms.force - terms.bias - terms.gravity;
  const double det = lhs(0, 0) * lhs(1, 1) - lhs(0, 1) * lhs(1, 0);
  if (std::abs(det) < 1e-12) {
    throw std::runtime_error("coupled_torso_accel: singular coupled inertia");
  }
  const Eigen::Vector2d qdd{
      (lhs(1, 1) * rhs[0] - lhs(0, 1) * rhs[1]) / det,
      (lhs(0, 0) * rhs[1] - lhs(1, 0) * rhs[0]) / det};
  return {qdd, wrench_at(qdd)};
}

}  // namespace ballbot

#endif  // BALLBOT_RIDER_HPP
