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

#include "ballbot/trajectory_io.hpp"

#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace ballbot {
namespace {

constexpr const char* kHeader =
    "t,theta,phi,theta_dot,phi_dot,v,zeta,f_px,f_pz,tau_p,"
    "f_px_sensed,f_pz_sensed,tau_p_sensed,phi_dot_cmd_raw,phi_dot_cmd,"
    "theta_eq,tau_eq,tau_ref,tau,flags";

constexpr int kDoubleColumns = 19;

std::array<double, kDoubleColumns> numeric_fields(const TickRecord& r) {
  return {r.t,            r.theta,        r.phi,
          r.theta_dot,    r.phi_dot,      r.v,
          r.zeta,         r.f_px,         r.f_pz,
          r.tau_p,        r.f_px_sensed,  r.f_pz_sensed,
          r.tau_p_sensed, r.phi_dot_cmd_raw, r.phi_dot_cmd,
          r.theta_eq,     r.tau_eq,       r.tau_ref,
          r.tau};
}

void assign_fields(TickRecord& r, const std::array<double, kDoubleColumns>& f) {
  r.t = f[0];
  r.theta = f[1];
  r.phi = f[2];
  r.theta_dot = f[3];
  r.phi_dot = f[4];
  r.v = f[5];
  r.zeta = f[6];
  r.f_px = f[7];
  r.f_pz = f[8];
  r.tau_p = f[9];
  r.f_px_sensed = f[10];
  r.f_pz_sensed = f[11];
  r.tau_p_sensed = f[12];
  r.phi_dot_cmd_raw = f[13];
  r.phi_dot_cmd = f[14];
  r.theta_eq = f[15];
  r.tau_eq = f[16];
  r.tau_ref = f[17];
  r.tau = f[18];
}

}  // namespace

const char* trajectory_csv_header() { return kHeader; }

void write_csv(const TrajectoryLog& log, std::ostream& out) {
  out << kHeader << '\n';
  char buf[32];
  std::string line;
  for (const TickRecord& rec : log.records) {
    line.clear();
    for (const double x : numeric_fields(rec)) {
      std::snprintf(buf, sizeof buf, "%.17g", x);
      line += buf;
      line += ',';
    }
    std::snprintf(buf, sizeof buf, "%u", rec.flags);
    line += buf;
    line += '\n';
    out << line;
  }
  if (!out) {
    throw std::runtime_error("write_csv: stream write failed");
  }
}

void write_csv(const TrajectoryLog& log, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("write_csv: cannot open " + path);
  }
  write_csv(log, out);
}

TrajectoryLog read_csv(std::istream& in, const std::string& origin) {
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("read_csv: " + origin + " is empty");
  }
  if (!line.empty() && line.back() == '\r') {
    line.pop_back();
  }
  if (line != kHeader) {
    throw std::runtime_error("read_csv: " + origin +
                             " header does not match the trajectory schema");
  }

  TrajectoryLog log;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.empty()) {
      continue;
    }
    std::array<double, kDoubleColumns> fields{};
    const char* p = line.c_str();
    char* end = nullptr;
    for (int i = 0; i < kDoubleColumns; ++i) {
      fields[i] = std::strtod(p, &end);
      if (end == p || *end != ',') {
        throw std::runtime_error("read_csv: " + origin + ":" +
                                 std::to_string(line_no) +
                                 ": malformed numeric field " +
                                 std::to_string(i + 1));
      }
      p = end + 1;
    }
    const unsigned long flags = std::strtoul(p, &end, 10);
    if (end == p || *end != '\0') {
      throw std::runtime_error("read_csv: " + origin + ":" +
                               std::to_string(line_no) +
                               ": malformed flags field");
    }
    TickRecord rec;
    assign_fields(rec, fields);
    rec.flags = static_cast<std::uint32_t>(flags);
    log.records.push_back(rec);
  }
  if (log.records.size() >= 2) {
    log.control_dt = log.records[1].t - log.records[0].t;
  }
  return log;
}

TrajectoryLog read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("read_csv: cannot open " + path);
  }
  return read_csv(in, path);
}

}  // namespace ballbot
