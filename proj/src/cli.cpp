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

#include "ballbot/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

#include "ballbot/metrics.hpp"
#include "ballbot/scenario.hpp"
#include "ballbot/sim.hpp"
#include "ballbot/trajectory_io.hpp"

#ifndef BALLBOT_SCENARIO_DEFAULT_DIR
#define BALLBOT_SCENARIO_DEFAULT_DIR ""
#endif

namespace ballbot {
namespace {

namespace fs = std::filesystem;

std::string fmt_g(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_f(double v, int precision = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  return buf;
}

// ============================================================================
// Per-trial metric rows shared by run, compare and sweep
// ============================================================================

struct TrialRow {
  int trial = 0;
  std::uint64_t seed = 0;
  std::string stop_reason;
  std::size_t samples = 0;
  TrialMetrics metrics{};
  bool metrics_valid = false;
};

constexpr const char* kMetricNames[] = {
    "rmse_speed", "rmse_speed_timenorm", "max_abs_tilt_deg",
    "max_abs_lean_deg", "max_abs_speed"};
constexpr const char* kMetricLabels[] = {
    "rmse_speed [rad/s]", "rmse_speed_timenorm [rad s^-1.5]",
    "max_abs_tilt [deg]", "max_abs_lean [deg]", "max_abs_speed [m/s]"};
constexpr int kMetricCount = 5;

double metric_value(const TrialMetrics& m, int i) {
  switch (i) {
    case 0: return m.rmse_speed;
    case 1: return m.rmse_speed_timenorm;
    case 2: return m.max_abs_tilt_deg;
    case 3: return m.max_abs_lean_deg;
    default: return m.max_abs_speed;
  }
}

TrialRow make_row(int trial, std::uint64_t seed, const TrajectoryLog& log) {
  TrialRow row;
  row.trial = trial;
  row.seed = seed;
  row.stop_reason = to_string(log.stop_reason);
  row.samples = log.records.size();
  try {
    row.metrics = trial_metrics(log);
    row.metrics_valid = true;
  } catch (const std::exception&) {
    row.metrics_valid = false;  // too short to score; row keeps NaN metrics
  }
  return row;
}

void write_metrics_csv(const std::vector<TrialRow>& rows, std::ostream& out) {
  out << "trial,seed,stop_reason,samples";
  for (const char* name : kMetricNames) out << ',' << name;
  out << '\n';
  for (const TrialRow& r : rows) {
    out << r.trial << ',' << r.seed << ',' << r.stop_reason << ','
        << r.samples;
    for (int i = 0; i < kMetricCount; ++i) {
      const double v = r.metrics_valid
                           ? metric_value(r.metrics, i)
                           : std::numeric_limits<double>::quiet_NaN();
      out << ',' << fmt_g(v);
    }
    out << '\n';
  }
}

std::vector<double> metric_column(const std::vector<TrialRow>& rows, int i) {
  std::vector<double> v;
  for (const TrialRow& r : rows) {
    if (r.metrics_valid) v.push_back(metric_value(r.metrics, i));
  }
  return v;
}

void write_summary(const std::string& label, const ResolvedScenario& r,
                   const std::vector<TrialRow>& rows, std::ostream& out) {
  out << "run: " << label << "\n";
  out << "scheme: "
      << (r.controller.scheme == ControlScheme::kIhacs ? "ihacs" : "hacs");
  out << ", governor: ";
  switch (r.controller.shared.mode) {
    case GovernorMode::kPassthrough: out << "passthrough"; break;
    case GovernorMode::kIdleKeeping: out << "idle"; break;
    case GovernorMode::kSpeedLimit:
      out << "speed_limit (" << fmt_f(r.controller.shared.v_limit, 2)
          << " m/s)";
      break;
  }
  out << "\nrider: " << fmt_f(r.rider.params.height, 2) << " m, "
      << fmt_f(r.rider.params.weight, 1) << " kg";
  out << "\ngains: k_theta = " << fmt_f(r.controller.gains.k_theta(), 3)
      << ", k_theta_dot = " << fmt_f(r.controller.gains.k_theta_dot(), 3)
      << ", k_phi_dot = " << fmt_f(r.controller.gains.k_phi_dot(), 3) << "\n";
  out << "trials: " << rows.size() << ", base seed: "
      << (rows.empty() ? 0 : rows.front().seed) << "\n\n";

  std::map<std::string, int> stops;
  for (const TrialRow& r2 : rows) ++stops[r2.stop_reason];
  out << "stop reasons:";
  for (const auto& [reason, count] : stops) {
    out << " " << reason << " x" << count;
  }
  out << "\n\n";

  out << "metric                            mean (sd over trials)\n";
  for (int i = 0; i < kMetricCount; ++i) {
    const std::vector<double> col = metric_column(rows, i);
    std::string line(kMetricLabels[i]);
    line.resize(34, ' ');
    if (col.empty()) {
      out << line << "n/a\n";
      continue;
    }
    const SummaryStats s = summarize(col);
    out << line << fmt_f(s.mean) << " (" << fmt_f(s.stddev) << ")\n";
  }
}

// ============================================================================
// Shared run helper: executes all trials of a resolved scenario and writes
// one run directory.  Returns the trial rows for the caller's reporting.
// ============================================================================

std::vector<TrialRow> run_to_directory(const Scenario& scenario,
                                       const ResolvedScenario& resolved,
                                       const std::string& label,
                                       const fs::path& dir) {
  std::vector<std::uint64_t> seeds(static_cast<std::size_t>(resolved.trials));
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    seeds[i] = resolved.seed + static_cast<std::uint64_t>(i);
  }
  const std::vector<SimResult> results = run_trial_set(
      resolved.plant, resolved.rider, resolved.controller, resolved.sim,
      seeds);

  fs::create_directories(dir);
  std::vector<TrialRow> rows;
  rows.reserve(results.size());
  for (std::size_t i = 0; i < results.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "trial_%03zu.csv", i);
    write_csv(results[i].log, (dir / name).string());
    rows.push_back(make_row(static_cast<int>(i), seeds[i], results[i].log));
  }
  {
    std::ofstream m(dir / "manifest.ini", std::ios::binary);
    write_manifest(scenario, resolved.controller.gains, m);
  }
  {
    std::ofstream m(dir / "metrics.csv", std::ios::binary);
    write_metrics_csv(rows, m);
  }
  {
    std::ofstream s(dir / "summary.txt", std::ios::binary);
    write_summary(label, resolved, rows, s);
  }
  return rows;
}

bool all_aborted(const std::vector<TrialRow>& rows) {
  return std::none_of(rows.begin(), rows.end(), [](const TrialRow& r) {
    return r.stop_reason == "finished";
  });
}

void apply_cli_overrides(Scenario& s, int trials, std::int64_t seed) {
  if (trials >= 0) s.trials = trials;
  if (seed >= 0) s.seed = static_cast<std::uint64_t>(seed);
}

std::string scenario_stem(const std::string& path) {
  return fs::path(path).stem().string();
}

// ============================================================================
// compare input: metrics.csv reader
// ============================================================================

struct MetricsTable {
  std::string label;
  // column name -> per-trial values (numeric columns only)
  std::map<std::string, std::vector<double>> columns;
};

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string item;
  std::stringstream ss(line);
  while (std::getline(ss, item, ',')) out.push_back(item);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

MetricsTable read_metrics_csv(const fs::path& dir) {
  const fs::path path = dir / "metrics.csv";
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw MissingLogsError("missing metrics table: " + path.string());
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw MissingLogsError("empty metrics table: " + path.string());
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = split_csv_line(line);
  MetricsTable table;
  table.label = fs::path(dir).filename().string();
  if (table.label.empty()) {
    table.label = fs::path(dir).parent_path().filename().string();
  }
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> cells = split_csv_line(line);
    for (std::size_t i = 0; i < cells.size() && i < header.size(); ++i) {
      char* end = nullptr;
      const double v = std::strtod(cells[i].c_str(), &end);
      if (end != cells[i].c_str() && *end == '\0') {
        table.columns[header[i]].push_back(v);
      }
    }
    ++rows;
  }
  if (rows == 0) {
    throw MissingLogsError("no trial rows in metrics table: " + path.string());
  }
  return table;
}

// ============================================================================
// sweep value lists
// ============================================================================

std::vector<std::string> parse_sweep_values(const std::string& text) {
  // first:last:count builds an evenly spaced numeric list
  if (std::count(text.begin(), text.end(), ':') == 2) {
    std::stringstream ss(text);
    std::string a, b, n;
    std::getline(ss, a, ':');
    std::getline(ss, b, ':');
    std::getline(ss, n, ':');
    char* e1 = nullptr;
    char* e2 = nullptr;
    char* e3 = nullptr;
    const double first = std::strtod(a.c_str(), &e1);
    const double last = std::strtod(b.c_str(), &e2);
    const long count = std::strtol(n.c_str(), &e3, 10);
    if (e1 != a.c_str() && *e1 == '\0' && e2 != b.c_str() && *e2 == '\0' &&
        e3 != n.c_str() && *e3 == '\0') {
      if (count < 1) {
        throw ConfigParseError("sweep range '" + text +
                               "' needs a positive count");
      }
      std::vector<std::string> out;
      for (long i = 0; i < count; ++i) {
        const double t =
            count == 1 ? 0.0
                       : static_cast<double>(i) / static_cast<double>(count - 1);
        out.push_back(fmt_g(first + (last - first) * t));
      }
      return out;
    }
  }
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const std::string t = item;
    if (!t.empty()) out.push_back(t);
  }
  if (out.empty()) {
    throw ConfigParseError("sweep values '" + text + "' are empty");
  }
  return out;
}

}  // namespace

// ============================================================================
// Scenario lookup
// ============================================================================

std::string find_scenario(const std::string& name_or_path) {
  std::vector<std::string> tried;
  auto probe = [&tried](const fs::path& p) -> bool {
    tried.push_back(p.string());
    std::error_code ec;
    return fs::is_regular_file(p, ec);
  };
  const fs::path direct(name_or_path);
  if (probe(direct)) return direct.string();
  const bool has_ext = direct.extension() == ".ini";
  if (!has_ext) {
    const fs::path with_ext = fs::path(name_or_path + ".ini");
    if (probe(with_ext)) return with_ext.string();
  }
  std::vector<fs::path> dirs;
  if (const char* env = std::getenv("BALLBOT_SCENARIO_DIR")) {
    if (*env != '\0') dirs.emplace_back(env);
  }
  if (BALLBOT_SCENARIO_DEFAULT_DIR[0] != '\0') {
    dirs.emplace_back(BALLBOT_SCENARIO_DEFAULT_DIR);
  }
  for (const fs::path& dir : dirs) {
    const fs::path base = dir / direct;
    if (probe(base)) return base.string();
    if (!has_ext) {
      const fs::path with_ext = dir / fs::path(name_or_path + ".ini");
      if (probe(with_ext)) return with_ext.string();
    }
  }
  std::string msg = "scenario '" + name_or_path + "' not found; tried:";
  for (const std::string& t : tried) msg += "\n  " + t;
  throw ConfigParseError(msg);
}

// ============================================================================
// run
// ============================================================================

int cmd_run(const RunOptions& options, std::ostream& out, std::ostream& err) {
  Scenario scenario;
  ResolvedScenario resolved;
  std::string path;
  try {
    path = find_scenario(options.scenario);
    scenario = parse_scenario_file(path);
    apply_cli_overrides(scenario, options.trials, options.seed);
    resolved = resolve(scenario);
  } catch (const std::exception& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  }
  const std::string label = scenario_stem(path);
  const fs::path dir = fs::path(options.out_dir) / label;
  std::vector<TrialRow> rows;
  try {
    rows = run_to_directory(scenario, resolved, label, dir);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  if (!options.quiet) {
    write_summary(label, resolved, rows, out);
    out << "\nwrote " << dir.string() << " (" << rows.size() << " trials)\n";
  } else {
    out << dir.string() << "\n";
  }
  if (all_aborted(rows)) {
    err << "error: every trial aborted before finishing (last reason: "
        << (rows.empty() ? std::string("none") : rows.back().stop_reason)
        << ")\n";
    return 1;
  }
  return 0;
}

// ============================================================================
// validate
// ============================================================================

int cmd_validate(const std::string& scenario, std::ostream& out,
                 std::ostream& err) {
  try {
    const std::string path = find_scenario(scenario);
    const Scenario s = parse_scenario_file(path);
    const ResolvedScenario r = resolve(s);
    out << "OK: " << path << "\n";
    out << "  scheme "
        << (r.controller.scheme == ControlScheme::kIhacs ? "ihacs" : "hacs")
        << ", trials " << r.trials << ", duration "
        << fmt_f(r.sim.duration, 2) << " s\n";
    out << "  rider " << fmt_f(r.rider.params.height, 2) << " m / "
        << fmt_f(r.rider.params.weight, 1) << " kg, gains k_theta = "
        << fmt_f(r.controller.gains.k_theta(), 3) << ", k_theta_dot = "
        << fmt_f(r.controller.gains.k_theta_dot(), 3) << ", k_phi_dot = "
        << fmt_f(r.controller.gains.k_phi_dot(), 3) << "\n";
    return 0;
  } catch (const std::exception& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  }
}

// ============================================================================
// compare
// ============================================================================

int cmd_compare(const std::vector<std::string>& run_dirs, std::ostream& out,
                std::ostream& err) {
  if (run_dirs.size() < 2) {
    err << "config error: compare needs at least two run directories\n";
    return 2;
  }
  std::vector<MetricsTable> tables;
  try {
    for (const std::string& dir : run_dirs) {
      tables.push_back(read_metrics_csv(dir));
    }
  } catch (const MissingLogsError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }

  constexpr int kLabelWidth = 32;
  constexpr int kColWidth = 20;
  auto pad = [](std::string s, int width) {
    if (static_cast<int>(s.size()) < width) s.resize(width, ' ');
    return s;
  };

  out << pad("metric", kLabelWidth);
  for (const MetricsTable& t : tables) out << pad(t.label, kColWidth);
  out << "\n";
  for (int i = 0; i < kMetricCount; ++i) {
    out << pad(kMetricLabels[i], kLabelWidth);
    std::vector<double> means(tables.size(),
                              std::numeric_limits<double>::quiet_NaN());
    for (std::size_t j = 0; j < tables.size(); ++j) {
      const auto it = tables[j].columns.find(kMetricNames[i]);
      std::vector<double> col;
      if (it != tables[j].columns.end()) {
        for (double v : it->second) {
          if (std::isfinite(v)) col.push_back(v);
        }
      }
      if (col.empty()) {
        out << pad("n/a", kColWidth);
        continue;
      }
      const SummaryStats s = summarize(col);
      means[j] = s.mean;
      out << pad(fmt_f(s.mean) + " (" + fmt_f(s.stddev) + ")", kColWidth);
    }
    out << "\n";
    // ratio-of-means rows against the first run
    out << pad("  ratio vs " + tables.front().label, kLabelWidth);
    for (std::size_t j = 0; j < tables.size(); ++j) {
      if (j == 0) {
        out << pad("1.000", kColWidth);
      } else if (!std::isfinite(means[0]) || means[0] == 0.0 ||
                 !std::isfinite(means[j])) {
        out << pad("n/a", kColWidth);
      } else {
        out << pad(fmt_f(means[j] / means[0], 3), kColWidth);
      }
    }
    out << "\n";
  }
  return 0;
}

// ============================================================================
// sweep
// ============================================================================

int cmd_sweep(const SweepOptions& options, std::ostream& out,
              std::ostream& err) {
  Scenario base;
  std::string path;
  std::vector<std::string> values;
  try {
    path = find_scenario(options.scenario);
    base = parse_scenario_file(path);
    apply_cli_overrides(base, options.trials, options.seed);
    values = parse_sweep_values(options.values);
    // Check the override path and each value up-front so usage errors are
    // reported as such instead of per-point failures.
    for (const std::string& v : values) {
      Scenario probe = base;
      apply_override(probe, options.param, v);
    }
  } catch (const std::exception& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  }

  std::string key_slug = options.param;
  std::replace(key_slug.begin(), key_slug.end(), '.', '_');
  const fs::path sweep_dir = fs::path(options.out_dir) /
                             (scenario_stem(path) + "_sweep_" + key_slug);

  struct Point {
    std::string value;
    std::string status = "ok";
    GainVector gains{};
    std::vector<TrialRow> rows;
  };
  std::vector<Point> points(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    points[i].value = values[i];
  }

  auto run_point = [&](std::size_t i) {
    Point& p = points[i];
    try {
      Scenario s = base;
      apply_override(s, options.param, p.value);
      const ResolvedScenario r = resolve(s);
      p.gains = r.controller.gains;
      char name[32];
      std::snprintf(name, sizeof name, "point_%03zu", i);
      p.rows = run_to_directory(
          s, r, scenario_stem(path) + " [" + options.param + " = " + p.value + "]",
          sweep_dir / name);
      if (all_aborted(p.rows)) p.status = "aborted";
    } catch (const std::exception& e) {
      p.status = std::string("error: ") + e.what();
    }
  };

  unsigned jobs = options.jobs > 0
                      ? static_cast<unsigned>(options.jobs)
                      : std::max(1u, std::thread::hardware_concurrency());
  jobs = std::min<unsigned>(jobs, static_cast<unsigned>(points.size()));
  if (jobs <= 1) {
    for (std::size_t i = 0; i < points.size(); ++i) run_point(i);
  } else {
    std::vector<std::thread> workers;
    std::atomic<std::size_t> next{0};
    for (unsigned w = 0; w < jobs; ++w) {
      workers.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < points.size();
             i = next.fetch_add(1)) {
          run_point(i);
        }
      });
    }
    for (std::thread& t : workers) t.join();
  }

  fs::create_directories(sweep_dir);
  std::ofstream csv(sweep_dir / "sweep.csv", std::ios::binary);
  csv << "point," << options.param
      << ",status,k_theta,k_theta_dot,k_phi_dot";
  for (const char* name : kMetricNames) {
    csv << ",mean_" << name << ",sd_" << name;
  }
  csv << '\n';
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Point& p = points[i];
    const bool ran = p.status == "ok" || p.status == "aborted";
    std::string status = p.status;
    std::replace(status.begin(), status.end(), ',', ';');
    csv << i << ',' << p.value << ',' << status;
    if (ran) {
      csv << ',' << fmt_g(p.gains.k_theta()) << ','
          << fmt_g(p.gains.k_theta_dot()) << ',' << fmt_g(p.gains.k_phi_dot());
    } else {
      csv << ",nan,nan,nan";
    }
    for (int m = 0; m < kMetricCount; ++m) {
      const std::vector<double> col =
          ran ? metric_column(p.rows, m) : std::vector<double>{};
      if (col.empty()) {
        csv << ",nan,nan";
      } else {
        const SummaryStats s = summarize(col);
        csv << ',' << fmt_g(s.mean) << ',' << fmt_g(s.stddev);
      }
    }
    csv << '\n';
  }
  csv.close();

  int failures = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Point& p = points[i];
    if (p.status != "ok") ++failures;
    if (!options.quiet) {
      out << "point " << i << ": " << options.param << " = " << p.value
          << " -> " << p.status << "\n";
    }
  }
  out << "wrote " << (sweep_dir / "sweep.csv").string() << " ("
      << points.size() << " points, " << failures << " failed)\n";
  return failures == static_cast<int>(points.size()) && !points.empty() ? 1
                                                                        : 0;
}

}  // namespace ballbot
