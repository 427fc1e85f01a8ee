#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "shapephase/dynamics.hpp"

namespace shapephase {

struct PropertyResult {
  std::string name;
  int trials = 0;
  int failures = 0;
  double worst = 0.0;  // largest residual observed across trials
  double tolerance = 0.0;

  bool passed() const { return failures == 0; }
};

// Randomized self-check suite covering the algebraic identities, invariances
// and phase-balance checks the toolkit is built on. `count` scales the number
// of trials per property; zero yields an empty table.
std::vector<PropertyResult> run_validation_suite(std::uint64_t seed, int count);

bool all_passed(const std::vector<PropertyResult>& results);

std::string render_property_table(const std::vector<PropertyResult>& results);

// --- synthetic momentum-conserving motions (used by the suite and by tests) ---

// Closed analytic loop on the shape sphere carried by a planar motion whose
// angular momentum is exactly (0, 0, J0) at every sample and whose polar
// moment is exactly 1:
//   z1(t)     = z1_center + z1_amplitude * sin(2 pi t/T + phase1)
//   theta1(t) = theta1_start + 2 pi winding t/T + theta1_wobble * sin(2 pi t/T + phase2)
struct PlanarLoopSpec {
  double z1_center = 0.25;
  double z1_amplitude = 0.35;
  double theta1_start = 0.4;
  double theta1_wobble = 0.3;
  int winding = 1;
  double phase1 = 0.7;
  double phase2 = 0.2;
  double J0 = 1.5;
  double duration = 1.0;
  int samples = 2401;
};

OrientedTrajectory synthetic_planar_loop(const PlanarLoopSpec& spec, const Masses& m);

// The same shape loop carried by a rotating spatial motion: the planar
// reference configuration p(t) is transported by R(t) chosen so the total
// angular momentum equals the fixed (generally tilted) vector J0 exactly at
// every sample. Keep the loop's z1 range well inside (0, 1): the reference
// inertia tensor must stay invertible and the body rates moderate.
struct SpatialLoopSpec {
  PlanarLoopSpec base;  // base.J0 is ignored; base supplies the shape loop
  Vec3 J0 = Vec3(0.3, 0.0, 1.8);
};

OrientedTrajectory synthetic_spatial_loop(const SpatialLoopSpec& spec, const Masses& m);

}  // namespace shapephase
