#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "shapephase/dynamics.hpp"
#include "shapephase/types.hpp"

namespace shapephase {

// Header metadata of a trajectory archive. Archives are columnar text:
// `# key = value` metadata lines, one header line naming every column, then
// one row per sample with 17-significant-digit numbers (lossless for
// doubles). A zero-duration run produces a header-only archive.
struct ArchiveMeta {
  int version = 1;
  std::string scenario_hash;
  Masses masses;
  PotentialSpec potential;
  Vec3 J0 = Vec3::Zero();
  Vec3 normal0 = Vec3::UnitZ();
  double return_tolerance = 1e-6;
  double phase_tolerance = 1e-5;
  bool momentum_degenerate = false;  // |J| ~ 0: fiber columns written as 0
  bool fiber_angle_valid = true;     // false: eigenframe degenerate, theta2 = 0
};

struct Archive {
  ArchiveMeta meta;
  std::vector<TrajectorySample> samples;
  std::vector<Vec3> normals;
  // Reduced coordinates as written (theta1/theta2 unwrapped along the run).
  std::vector<Vec3> w;
  std::vector<double> z1, theta1, z2, theta2;
};

// Space-separated column names, in order.
std::string archive_column_header();

void write_archive(std::ostream& out, const OrientedTrajectory& otr,
                   const ArchiveMeta& meta);
void write_archive_file(const std::string& path, const OrientedTrajectory& otr,
                        const ArchiveMeta& meta);
// Header-only archive for zero-duration runs.
void write_archive_header(std::ostream& out, const ArchiveMeta& meta);

Archive read_archive(std::istream& in);
Archive read_archive_file(const std::string& path);

// Rebuilds the dynamical trajectory from archived samples (conservation
// diagnostics recomputed) and re-derives the orientation from meta.normal0,
// exactly as the direct pipeline would.
OrientedTrajectory archive_trajectory(const Archive& a,
                                      const IntegratorConfig& cfg = {});

}  // namespace shapephase
