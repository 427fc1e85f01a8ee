#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "shapephase/dynamics.hpp"
#include "shapephase/types.hpp"

namespace shapephase {

// A complete run definition in natural units (G = 1). The text form is
// line-oriented `key = value(s)` with `#` comments; see serialize_scenario
// for the canonical field order.
struct Scenario {
  Masses masses;
  State state;
  PotentialSpec potential;
  IntegratorConfig integrator;
  double duration = 1.0;
  double return_tolerance = 1e-6;
  double phase_tolerance = 1e-5;
  std::uint64_t seed = 0;
  std::optional<Vec3> normal;  // initial plane normal; principal normal if absent

  std::string method_name() const;
};

// Parses the text form. Raises ConfigError naming the offending field on
// unknown keys, malformed values, missing required fields, or physical
// precondition violations. The center of mass (positions and velocities) must
// vanish to 1e-6 relative; it is then re-centered exactly.
Scenario parse_scenario(const std::string& text);

// Reads and parses a scenario file (IoError on unreadable paths).
Scenario load_scenario(const std::string& path);

// Canonical lossless text form (fixed key order, 17 significant digits).
std::string serialize_scenario(const Scenario& s);

// FNV-1a hash of the canonical form, as a 16-digit hex string.
std::string scenario_hash(const Scenario& s);

}  // namespace shapephase
