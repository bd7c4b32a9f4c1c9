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

#ifndef BALLBOT_METRICS_HPP
#define BALLBOT_METRICS_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "ballbot/trajectory.hpp"

namespace ballbot {

// ============================================================================
// Trial metrics
// ============================================================================

struct EmptyLogError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct WindowOutOfRangeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Tracking and excursion metrics over one trial window.  The tracking
/// error is phi_dot - phi_dot_cmd against the governed command, so a rider
/// fighting the governor shows up as chassis motion, not as error.
struct TrialMetrics {
  /// sqrt of the mean squared speed error [rad/s].
  double rmse_speed = 0.0;
  /// sqrt of the summed squared error divided by the window length
  /// [rad/(s sqrt(s)) aggregate]; sample-rate dependent, kept for
  /// cross-trial comparisons at a fixed control rate.
  double rmse_speed_timenorm = 0.0;
  double max_abs_tilt_deg = 0.0;   ///< peak |theta| [deg]
  double max_abs_lean_deg = 0.0;   ///< peak |zeta| [deg]
  double max_abs_speed = 0.0;      ///< peak |r_w phi_dot| [m/s]
  int samples = 0;                 ///< records inside the window
  double t_first = 0.0;            ///< [s]
  double t_last = 0.0;             ///< [s]
};

/// Computes metrics over records with t in [t_start, t_end].  Throws
/// EmptyLogError on an empty log and WindowOutOfRangeError when the window
/// is degenerate or selects fewer than two records.
[[nodiscard]] inline TrialMetrics trial_metrics(
    const TrajectoryLog& log, double t_start = 0.0,
    double t_end = std::numeric_limits<double>::infinity()) {
  if (log.records.empty()) {
    throw EmptyLogError("trial_metrics: log has no records");
  }
  if (!(t_end > t_start)) {
    throw WindowOutOfRangeError("trial_metrics: window end must exceed start");
  }

  TrialMetrics m;
  double sum_sq = 0.0;
  bool first = true;
  for (const TickRecord& rec : log.records) {
    if (rec.t < t_start || rec.t > t_end) {
      continue;
    }
    if (first) {
      m.t_first = rec.t;
      first = false;
    }
    m.t_last = rec.t;
    ++m.samples;
    const double err = rec.phi_dot - rec.phi_dot_cmd;
    sum_sq += err * err;
    m.max_abs_tilt_deg =
        std::max(m.max_abs_tilt_deg, std::abs(rec.theta) * 180.0 / M_PI);
    m.max_abs_lean_deg =
        std::max(m.max_abs_lean_deg, std::abs(rec.zeta) * 180.0 / M_PI);
    m.max_abs_speed = std::max(m.max_abs_speed, std::abs(rec.v));
  }
  if (m.samples < 2) {
    throw WindowOutOfRangeError(
        "trial_metrics: window selects fewer than two records");
  }
  m.rmse_speed = std::sqrt(sum_sq / static_cast<double>(m.samples));
  m.rmse_speed_timenorm = std::sqrt(sum_sq) / (m.t_last - m.t_first);
  return m;
}

// ============================================================================
// Across-trial summaries
// ============================================================================

/// Mean and sample standard deviation (n - 1 denominator; zero for n = 1).
struct SummaryStats {
  double mean = 0.0;
  double stddev = 0.0;
  int count = 0;
};

[[nodiscard]] inline SummaryStats summarize(const std::vector<double>& xs) {
  if (xs.empty()) {
    throw std::invalid_argument("summarize: no values");
  }
  SummaryStats s;
  s.count = static_cast<int>(xs.size());
  double sum = 0.0;
  for (double x : xs) {
    sum += x;
  }
  s.mean = sum / static_cast<double>(s.count);
  if (s.count > 1) {
    double ss = 0.0;
    for (double x : xs) {
      ss += (x - s.mean) * (x - s.mean);
    }
    s.stddev = std::sqrt(ss / static_cast<double>(s.count - 1));
  }
  return s;
}

}  // namespace ballbot

#endif  // BALLBOT_METRICS_HPP
