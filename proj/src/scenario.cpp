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

#include "ballbot/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <climits>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <initializer_list>
#include <functional>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <utility>

namespace ballbot {
namespace {

// ============================================================================
// Value formatting and parsing
// ============================================================================

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_list(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i != 0) out += ", ";
    out += fmt_double(v[i]);
  }
  return out;
}

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

[[noreturn]] void fail(const std::string& ctx, const std::string& message) {
  throw ConfigParseError(ctx + ": " + message);
}

double parse_double(const std::string& v, const std::string& ctx) {
  const std::string t = trim(v);
  if (t.empty()) fail(ctx, "expected a number, got an empty value");
  const char* p = t.c_str();
  char* end = nullptr;
  const double x = std::strtod(p, &end);
  if (end == p || *end != '\0') {
    fail(ctx, "expected a number, got '" + t + "'");
  }
  return x;
}

int parse_int(const std::string& v, const std::string& ctx) {
  const std::string t = trim(v);
  if (t.empty()) fail(ctx, "expected an integer, got an empty value");
  const char* p = t.c_str();
  char* end = nullptr;
  const long x = std::strtol(p, &end, 10);
  if (end == p || *end != '\0' || x < INT_MIN || x > INT_MAX) {
    fail(ctx, "expected an integer, got '" + t + "'");
  }
  return static_cast<int>(x);
}

std::uint64_t parse_u64(const std::string& v, const std::string& ctx) {
  const std::string t = trim(v);
  if (t.empty() || t[0] == '-') {
    fail(ctx, "expected a non-negative integer, got '" + t + "'");
  }
  const char* p = t.c_str();
  char* end = nullptr;
  const unsigned long long x = std::strtoull(p, &end, 10);
  if (end == p || *end != '\0') {
    fail(ctx, "expected a non-negative integer, got '" + t + "'");
  }
  return static_cast<std::uint64_t>(x);
}

std::vector<double> parse_list(const std::string& v, const std::string& ctx) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    out.push_back(parse_double(item, ctx));
  }
  if (out.empty()) fail(ctx, "expected a comma-separated list of numbers");
  return out;
}

// ============================================================================
// Field registry: the single source of truth for scenario keys.  The parser,
// the manifest writer and sweep overrides all walk this table, so they can
// never disagree about the schema.
// ============================================================================

struct Field {
  const char* section;
  const char* key;
  std::function<void(Scenario&, const std::string&, const std::string&)> set;
  std::function<std::string(const Scenario&)> get;
  /// When set, the manifest includes the key only if this returns true
  /// (used to print just the lean-profile keys relevant to its kind).
  std::function<bool(const Scenario&)> emit;
};

using Ref = std::function<double&(Scenario&)>;

Field dfield(const char* sec, const char* key, Ref ref) {
  return Field{
      sec, key,
      [ref](Scenario& s, const std::string& v, const std::string& ctx) {
        ref(s) = parse_double(v, ctx);
      },
      [ref](const Scenario& s) {
        return fmt_double(ref(const_cast<Scenario&>(s)));
      },
      {}};
}

template <class E>
Field efield(const char* sec, const char* key,
             std::function<E&(Scenario&)> ref,
             std::vector<std::pair<std::string, E>> tokens) {
  return Field{
      sec, key,
      [ref, tokens](Scenario& s, const std::string& v, const std::string& ctx) {
        const std::string t = trim(v);
        for (const auto& [token, value] : tokens) {
          if (t == token) {
            ref(s) = value;
            return;
          }
        }
        std::string expect;
        for (const auto& [token, value] : tokens) {
          if (!expect.empty()) expect += " | ";
          expect += token;
        }
        fail(ctx, "unknown value '" + t + "' (expected " + expect + ")");
      },
      [ref, tokens](const Scenario& s) {
        const E v = ref(const_cast<Scenario&>(s));
        for (const auto& [token, value] : tokens) {
          if (value == v) return token;
        }
        return std::string("?");
      },
      {}};
}

std::vector<Field> build_fields() {
  using PK = ProfileConfig::Kind;
  std::vector<Field> f;

  // --- [plant] -------------------------------------------------------------
  f.push_back(dfield("plant", "m_w", [](Scenario& s) -> double& { return s.plant.m_w; }));
  f.push_back(dfield("plant", "r_w", [](Scenario& s) -> double& { return s.plant.r_w; }));
  f.push_back(dfield("plant", "m_b", [](Scenario& s) -> double& { return s.plant.m_b; }));
  f.push_back(dfield("plant", "l_b", [](Scenario& s) -> double& { return s.plant.l_b; }));
  f.push_back(dfield("plant", "h_p", [](Scenario& s) -> double& { return s.plant.h_p; }));
  {
    Field iw = dfield("plant", "i_w", [](Scenario& s) -> double& { return s.plant.i_w; });
    auto base = iw.set;
    iw.set = [base](Scenario& s, const std::string& v, const std::string& ctx) {
      base(s, v, ctx);
      s.wheel_inertia_explicit = true;
    };
    f.push_back(std::move(iw));
  }
  f.push_back(dfield("plant", "i_b", [](Scenario& s) -> double& { return s.plant.i_b; }));
  f.push_back(dfield("plant", "b_theta", [](Scenario& s) -> double& { return s.plant.b_theta; }));
  f.push_back(dfield("plant", "b_phi", [](Scenario& s) -> double& { return s.plant.b_phi; }));
  f.push_back(dfield("plant", "gravity", [](Scenario& s) -> double& { return s.plant.gravity; }));

  // --- [rider] ---------------------------------------------------------------
  f.push_back(dfield("rider", "height", [](Scenario& s) -> double& { return s.rider.height; }));
  f.push_back(dfield("rider", "weight", [](Scenario& s) -> double& { return s.rider.weight; }));
  f.push_back(dfield("rider", "torso_mass_fraction",
                     [](Scenario& s) -> double& { return s.rider.torso_mass_fraction; }));
  f.push_back(dfield("rider", "torso_com_fraction",
                     [](Scenario& s) -> double& { return s.rider.torso_com_fraction; }));
  f.push_back(dfield("rider", "torso_gyration_fraction",
                     [](Scenario& s) -> double& { return s.rider.torso_gyration_fraction; }));
  f.push_back(dfield("rider", "seat_height",
                     [](Scenario& s) -> double& { return s.rider.seat_height; }));
  f.push_back(dfield("rider", "max_lean",
                     [](Scenario& s) -> double& { return s.rider.max_lean; }));

  // --- [controller] ----------------------------------------------------------
  f.push_back(efield<ControlScheme>(
      "controller", "scheme",
      [](Scenario& s) -> ControlScheme& { return s.controller.scheme; },
      {{"hacs", ControlScheme::kHacs}, {"ihacs", ControlScheme::kIhacs}}));
  f.push_back(dfield("controller", "virtual_mass",
                     [](Scenario& s) -> double& { return s.controller.admittance.virtual_mass; }));
  f.push_back(dfield("controller", "virtual_damping",
                     [](Scenario& s) -> double& { return s.controller.admittance.virtual_damping; }));
  f.push_back(dfield("controller", "sensitivity",
                     [](Scenario& s) -> double& { return s.controller.admittance.sensitivity; }));
  f.push_back(dfield("controller", "deadband",
                     [](Scenario& s) -> double& { return s.controller.admittance.deadband; }));
  f.push_back(dfield("controller", "v_max",
                     [](Scenario& s) -> double& { return s.controller.admittance.v_max; }));
  f.push_back(efield<TorqueMode>(
      "controller", "torque_mode",
      [](Scenario& s) -> TorqueMode& { return s.controller.torque.mode; },
      {{"ideal", TorqueMode::kIdeal}, {"lag", TorqueMode::kLag}}));
  f.push_back(dfield("controller", "torque_limit",
                     [](Scenario& s) -> double& { return s.controller.torque.limit; }));
  f.push_back(dfield("controller", "torque_time_constant",
                     [](Scenario& s) -> double& { return s.controller.torque.time_constant; }));
  f.push_back(dfield("controller", "torque_kp",
                     [](Scenario& s) -> double& { return s.controller.torque.kp; }));
  f.push_back(dfield("controller", "torque_ki",
                     [](Scenario& s) -> double& { return s.controller.torque.ki; }));
  f.push_back(dfield("controller", "eq_tolerance",
                     [](Scenario& s) -> double& { return s.controller.equilibrium.tolerance; }));
  {
    Field it{"controller", "eq_max_iterations",
             [](Scenario& s, const std::string& v, const std::string& ctx) {
               s.controller.equilibrium.max_iterations = parse_int(v, ctx);
             },
             [](const Scenario& s) {
               return std::to_string(s.controller.equilibrium.max_iterations);
             },
             {}};
    f.push_back(std::move(it));
  }
  f.push_back(dfield("controller", "eq_theta_max",
                     [](Scenario& s) -> double& { return s.controller.equilibrium.theta_max; }));
  f.push_back(dfield("controller", "eq_fd_step",
                     [](Scenario& s) -> double& { return s.controller.equilibrium.fd_step; }));
  f.push_back(dfield("controller", "wrench_filter_cutoff",
                     [](Scenario& s) -> double& { return s.controller.wrench_filter_cutoff; }));
  f.push_back(Field{"controller", "command_delay_ticks",
                    [](Scenario& s, const std::string& v, const std::string& ctx) {
                      s.controller.command_delay_ticks = parse_int(v, ctx);
                    },
                    [](const Scenario& s) {
                      return std::to_string(s.controller.command_delay_ticks);
                    },
                    {}});

  // --- [shared_control] ------------------------------------------------------
  f.push_back(efield<GovernorMode>(
      "shared_control", "mode",
      [](Scenario& s) -> GovernorMode& { return s.controller.shared.mode; },
      {{"passthrough", GovernorMode::kPassthrough},
       {"idle", GovernorMode::kIdleKeeping},
       {"speed_limit", GovernorMode::kSpeedLimit}}));
  f.push_back(dfield("shared_control", "v_limit",
                     [](Scenario& s) -> double& { return s.controller.shared.v_limit; }));

  // --- [profile] ---------------------------------------------------------------
  f.push_back(efield<PK>(
      "profile", "kind",
      [](Scenario& s) -> PK& { return s.profile.kind; },
      {{"ramp_hold", PK::kRampHold},
       {"trapezoid", PK::kTrapezoid},
       {"sinusoid", PK::kSinusoid},
       {"script", PK::kScript}}));
  auto kind_in = [](std::initializer_list<PK> kinds) {
    std::vector<PK> ks(kinds);
    return [ks](const Scenario& s) {
      return std::find(ks.begin(), ks.end(), s.profile.kind) != ks.end();
    };
  };
  {
    Field g = dfield("profile", "start", [](Scenario& s) -> double& { return s.profile.start; });
    g.emit = kind_in({PK::kRampHold, PK::kTrapezoid, PK::kSinusoid});
    f.push_back(std::move(g));
    g = dfield("profile", "rate", [](Scenario& s) -> double& { return s.profile.rate; });
    g.emit = kind_in({PK::kRampHold, PK::kTrapezoid});
    f.push_back(std::move(g));
    g = dfield("profile", "target", [](Scenario& s) -> double& { return s.profile.target; });
    g.emit = kind_in({PK::kRampHold, PK::kTrapezoid});
    f.push_back(std::move(g));
    g = dfield("profile", "hold", [](Scenario& s) -> double& { return s.profile.hold; });
    g.emit = kind_in({PK::kRampHold, PK::kTrapezoid});
    f.push_back(std::move(g));
    g = dfield("profile", "amplitude", [](Scenario& s) -> double& { return s.profile.amplitude; });
    g.emit = kind_in({PK::kSinusoid});
    f.push_back(std::move(g));
    g = dfield("profile", "frequency", [](Scenario& s) -> double& { return s.profile.frequency; });
    g.emit = kind_in({PK::kSinusoid});
    f.push_back(std::move(g));
  }
  f.push_back(Field{"profile", "times",
                    [](Scenario& s, const std::string& v, const std::string& ctx) {
                      s.profile.times = parse_list(v, ctx);
                    },
                    [](const Scenario& s) { return fmt_list(s.profile.times); },
                    kind_in({PK::kScript})});
  f.push_back(Field{"profile", "values",
                    [](Scenario& s, const std::string& v, const std::string& ctx) {
                      s.profile.values = parse_list(v, ctx);
                    },
                    [](const Scenario& s) { return fmt_list(s.profile.values); },
                    kind_in({PK::kScript})});

  // --- [sim] -------------------------------------------------------------------
  f.push_back(dfield("sim", "duration", [](Scenario& s) -> double& { return s.sim.duration; }));
  f.push_back(dfield("sim", "control_rate",
                     [](Scenario& s) -> double& { return s.sim.control_rate; }));
  f.push_back(Field{"sim", "physics_substeps",
                    [](Scenario& s, const std::string& v, const std::string& ctx) {
                      s.sim.physics_substeps = parse_int(v, ctx);
                    },
                    [](const Scenario& s) { return std::to_string(s.sim.physics_substeps); },
                    {}});
  f.push_back(efield<WrenchMode>(
      "sim", "wrench_mode",
      [](Scenario& s) -> WrenchMode& { return s.sim.wrench_mode; },
      {{"quasi_static", WrenchMode::kQuasiStatic},
       {"dynamic", WrenchMode::kDynamic}}));
  f.push_back(dfield("sim", "sensor_noise_std",
                     [](Scenario& s) -> double& { return s.sim.sensor_noise_std; }));
  f.push_back(dfield("sim", "fall_over_fraction",
                     [](Scenario& s) -> double& { return s.sim.fall_over_fraction; }));
  f.push_back(dfield("sim", "position_limit",
                     [](Scenario& s) -> double& { return s.sim.position_limit; }));

  // --- [output] ------------------------------------------------------------------
  f.push_back(Field{"output", "trials",
                    [](Scenario& s, const std::string& v, const std::string& ctx) {
                      s.trials = parse_int(v, ctx);
                    },
                    [](const Scenario& s) { return std::to_string(s.trials); },
                    {}});
  f.push_back(Field{"output", "seed",
                    [](Scenario& s, const std::string& v, const std::string& ctx) {
                      s.seed = parse_u64(v, ctx);
                    },
                    [](const Scenario& s) { return std::to_string(s.seed); },
                    {}});

  return f;
}

const std::vector<Field>& fields() {
  static const std::vector<Field> f = build_fields();
  return f;
}

const Field* find_field(const std::string& section, const std::string& key) {
  for (const Field& f : fields()) {
    if (section == f.section && key == f.key) return &f;
  }
  return nullptr;
}

bool known_section(const std::string& section) {
  for (const Field& f : fields()) {
    if (section == f.section) return true;
  }
  return false;
}

std::string known_sections() {
  std::string out;
  std::string last;
  for (const Field& f : fields()) {
    if (f.section != last) {
      if (!out.empty()) out += " ";
      out += "[" + std::string(f.section) + "]";
      last = f.section;
    }
  }
  return out;
}

}  // namespace

// ============================================================================
// Parsing
// ============================================================================

Scenario parse_scenario(std::istream& in, const std::string& origin) {
  Scenario s;
  std::string line;
  std::string section;
  std::set<std::string> seen;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string ctx = origin + ":" + std::to_string(lineno);
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']') fail(ctx, "unterminated section header '" + t + "'");
      section = trim(t.substr(1, t.size() - 2));
      if (!known_section(section)) {
        fail(ctx, "unknown section [" + section + "] (expected one of " +
                      known_sections() + ")");
      }
      continue;
    }
    const std::size_t eq = t.find('=');
    if (eq == std::string::npos) {
      fail(ctx, "expected 'key = value', got '" + t + "'");
    }
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty()) fail(ctx, "missing key before '='");
    if (section.empty()) {
      fail(ctx, "key '" + key + "' appears before any [section] header");
    }
    const Field* field = find_field(section, key);
    if (field == nullptr) {
      fail(ctx, "unknown key '" + key + "' in section [" + section + "]");
    }
    const std::string path = section + "." + key;
    if (!seen.insert(path).second) {
      fail(ctx, "duplicate key '" + path + "'");
    }
    field->set(s, value, ctx);
  }
  if (in.bad()) {
    throw ConfigParseError(origin + ": read error");
  }
  return s;
}

Scenario parse_scenario_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ConfigParseError("cannot open scenario file '" + path + "'");
  }
  return parse_scenario(in, path);
}

void apply_override(Scenario& s, const std::string& path,
                    const std::string& value) {
  const std::size_t dot = path.find('.');
  if (dot == std::string::npos || dot == 0 || dot + 1 >= path.size()) {
    throw ConfigParseError("override '" + path +
                           "' must look like section.key");
  }
  const std::string section = path.substr(0, dot);
  const std::string key = path.substr(dot + 1);
  const Field* field = find_field(section, key);
  if (field == nullptr) {
    throw ConfigParseError("unknown override path '" + path + "'");
  }
  field->set(s, value, "override " + path);
}

// ============================================================================
// Resolution
// ============================================================================

ResolvedScenario resolve(const Scenario& s) {
  ResolvedScenario r;
  r.plant = s.plant;
  if (!s.wheel_inertia_explicit) {
    r.plant.i_w = shell_inertia(r.plant.m_w, r.plant.r_w);
  }
  validate(r.plant);
  validate(s.rider);

  LeanProfile::Shape shape;
  switch (s.profile.kind) {
    case ProfileConfig::Kind::kRampHold:
      shape = RampHoldProfile{s.profile.start, s.profile.rate,
                              s.profile.target, s.profile.hold};
      break;
    case ProfileConfig::Kind::kTrapezoid:
      shape = TrapezoidProfile{s.profile.start, s.profile.rate,
                               s.profile.target, s.profile.hold};
      break;
    case ProfileConfig::Kind::kSinusoid:
      shape = SinusoidProfile{s.profile.start, s.profile.amplitude,
                              s.profile.frequency};
      break;
    case ProfileConfig::Kind::kScript:
      shape = ScriptProfile{s.profile.times, s.profile.values};
      break;
  }
  r.rider.params = s.rider;
  r.rider.profile = LeanProfile(std::move(shape), s.rider.max_lean);

  r.controller = s.controller;
  r.controller.gains = personalize_gains(s.rider, r.plant);
  validate(r.controller);

  r.sim = s.sim;
  validate(r.sim);

  if (s.trials < 1) {
    throw ConfigParseError("output.trials must be at least 1, got " +
                           std::to_string(s.trials));
  }
  r.trials = s.trials;
  r.seed = s.seed;
  return r;
}

// ============================================================================
// Manifest
// ============================================================================

const char* version_string() { return "1.0.0"; }

void write_manifest(const Scenario& s, const GainVector& gains,
                    std::ostream& out) {
  Scenario r = s;
  if (!r.wheel_inertia_explicit) {
    r.plant.i_w = shell_inertia(r.plant.m_w, r.plant.r_w);
    r.wheel_inertia_explicit = true;
  }
  out << "# ballbot-sim scenario manifest (all values resolved)\n";
  out << "# version: " << version_string() << "\n";
  out << "# gains: k_theta = " << fmt_double(gains.k_theta())
      << ", k_phi = " << fmt_double(gains.k_phi())
      << ", k_theta_dot = " << fmt_double(gains.k_theta_dot())
      << ", k_phi_dot = " << fmt_double(gains.k_phi_dot()) << "\n";
  std::string section;
  for (const Field& f : fields()) {
    if (f.emit && !f.emit(r)) continue;
    if (f.section != section) {
      section = f.section;
      out << "\n[" << section << "]\n";
    }
    out << f.key << " = " << f.get(r) << "\n";
  }
}

}  // namespace ballbot
