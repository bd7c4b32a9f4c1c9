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

#ifndef BALLBOT_TRAJECTORY_IO_HPP
#define BALLBOT_TRAJECTORY_IO_HPP

#include <iosfwd>
#include <string>

#include "ballbot/trajectory.hpp"

namespace ballbot {

/// Column order of the trajectory CSV schema.  Stable: external tooling may
/// rely on it.
[[nodiscard]] const char* trajectory_csv_header();

/// Writes the log as CSV: one header row, one row per record, decimal
/// floats at full round-trip precision (%.17g), flags as an unsigned
/// integer.  Identical logs produce byte-identical files.
void write_csv(const TrajectoryLog& log, std::ostream& out);
void write_csv(const TrajectoryLog& log, const std::string& path);

/// Reads a CSV produced by write_csv.  The header must match the schema
/// exactly.  Stop reason and seed are not stored in the CSV; the returned
/// log carries defaults for them and control_dt inferred from the first
/// two rows.  Throws std::runtime_error with line context on malformed
/// input.
[[nodiscard]] TrajectoryLog read_csv(std::istream& in,
                                     const std::string& origin = "<stream>");
[[nodiscard]] TrajectoryLog read_csv(const std::string& path);

}  // namespace ballbot

#endif  // BALLBOT_TRAJECTORY_IO_HPP
