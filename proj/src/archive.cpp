#include "shapephase/archive.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "shapephase/connection.hpp"
#include "shapephase/error.hpp"
#include "shapephase/numeric.hpp"

namespace shapephase {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt(const Vec3& v) {
  return fmt(v.x()) + " " + fmt(v.y()) + " " + fmt(v.z());
}

void write_meta(std::ostream& out, const ArchiveMeta& meta) {
  out << "# three-body trajectory archive v" << meta.version << "\n";
  out << "# scenario_hash = " << meta.scenario_hash << "\n";
  out << "# masses = " << fmt(meta.masses.m1) << " " << fmt(meta.masses.m2) << " "
      << fmt(meta.masses.m3) << "\n";
  if (meta.potential.kind == PotentialSpec::Kind::Newtonian) {
    out << "# potential = newtonian\n";
  } else {
    out << "# potential = powerlaw " << fmt(meta.potential.exponent) << "\n";
  }
  out << "# softening = " << fmt(meta.potential.softening) << "\n";
  out << "# J0 = " << fmt(meta.J0) << "\n";
  out << "# normal0 = " << fmt(meta.normal0) << "\n";
  out << "# return_tolerance = " << fmt(meta.return_tolerance) << "\n";
  out << "# phase_tolerance = " << fmt(meta.phase_tolerance) << "\n";
  out << "# momentum_degenerate = " << (meta.momentum_degenerate ? 1 : 0) << "\n";
  out << "# fiber_angle_valid = " << (meta.fiber_angle_valid ? 1 : 0) << "\n";
}

}  // namespace

std::string archive_column_header() {
  return "t q1x q1y q1z q2x q2y q2z q3x q3y q3z "
         "v1x v1y v1z v2x v2y v2z v3x v3y v3z "
         "I E Jx Jy Jz nx ny nz w1 w2 w3 z1 theta1 z2 theta2";
}

void write_archive_header(std::ostream& out, const ArchiveMeta& meta) {
  write_meta(out, meta);
  out << archive_column_header() << "\n";
}

void write_archive(std::ostream& out, const OrientedTrajectory& otr,
                   const ArchiveMeta& meta_in) {
  ArchiveMeta meta = meta_in;
  const auto& smp = otr.trajectory().samples();
  const double J0mag = meta.J0.norm();
  const double I0 = smp.front().I;
  meta.momentum_degenerate = J0mag < 1e-12 * (1.0 + I0);

  // Fiber angle needs the inertia eigenframe; fall back to zeros when the
  // trajectory passes through a degenerate-eigenframe shape.
  std::vector<double> theta2(smp.size(), 0.0);
  if (!meta.momentum_degenerate) {
    try {
      const GaugeTrajectory gt = eigenframe_track(otr, meta.J0);
      for (std::size_t k = 0; k < smp.size(); ++k) theta2[k] = gt.samples()[k].theta2;
      meta.fiber_angle_valid = true;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::EigenframeDegenerate) throw;
      meta.fiber_angle_valid = false;
    }
  } else {
    meta.fiber_angle_valid = false;
  }

  write_archive_header(out, meta);

  const Vec3 j = meta.momentum_degenerate ? Vec3::Zero() : Vec3(meta.J0 / J0mag);
  AngleUnwrapper th1;
  for (std::size_t k = 0; k < smp.size(); ++k) {
    const TrajectorySample& s = smp[k];
    const Vec3 n = otr.normals()[k];
    const ShapePoint sp = otr.shape_sample(k);
    const double z2 = meta.momentum_degenerate ? 0.0 : j.dot(n);
    out << fmt(s.t) << ' ' << fmt(s.state.config.q1) << ' ' << fmt(s.state.config.q2)
        << ' ' << fmt(s.state.config.q3) << ' ' << fmt(s.state.v1) << ' '
        << fmt(s.state.v2) << ' ' << fmt(s.state.v3) << ' ' << fmt(s.I) << ' '
        << fmt(s.E) << ' ' << fmt(s.J) << ' ' << fmt(n) << ' ' << fmt(sp.w) << ' '
        << fmt(sp.z1) << ' ' << fmt(th1.next(sp.theta1)) << ' ' << fmt(z2) << ' '
        << fmt(theta2[k]) << "\n";
  }
}

void write_archive_file(const std::string& path, const OrientedTrajectory& otr,
                        const ArchiveMeta& meta) {
  std::ofstream out(path);
  if (!out) raise(ErrorCode::IoError, "cannot open archive for writing: '" + path + "'");
  write_archive(out, otr, meta);
  if (!out) raise(ErrorCode::IoError, "write failed for archive '" + path + "'");
}

Archive read_archive(std::istream& in) {
  Archive a;
  std::string line;
  bool have_header = false;
  bool first = true;
  int lineno = 0;

  auto meta_value = [&](const std::string& l) {
    const auto eq = l.find('=');
    if (eq == std::string::npos) return std::string();
    auto v = l.substr(eq + 1);
    const auto b = v.find_first_not_of(" \t");
    return b == std::string::npos ? std::string() : v.substr(b);
  };
  auto parse3 = [&](const std::string& v, const char* what) {
    std::istringstream is(v);
    double x, y, z;
    if (!(is >> x >> y >> z)) {
      raise(ErrorCode::IoError, std::string("archive: malformed ") + what);
    }
    return Vec3(x, y, z);
  };

  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (first) {
        if (line.find("three-body trajectory archive") == std::string::npos) {
          raise(ErrorCode::IoError, "not a trajectory archive (bad signature line)");
        }
        first = false;
        continue;
      }
      const std::string v = meta_value(line);
      if (line.find("scenario_hash") != std::string::npos) {
        a.meta.scenario_hash = v;
      } else if (line.find("masses") != std::string::npos) {
        const Vec3 m = parse3(v, "masses");
        a.meta.masses = Masses{m.x(), m.y(), m.z()};
      } else if (line.find("potential") != std::string::npos) {
        std::istringstream is(v);
        std::string kind;
        is >> kind;
        if (kind == "newtonian") {
          a.meta.potential.kind = PotentialSpec::Kind::Newtonian;
          a.meta.potential.exponent = -1.0;
        } else if (kind == "powerlaw") {
          a.meta.potential.kind = PotentialSpec::Kind::PowerLaw;
          if (!(is >> a.meta.potential.exponent)) {
            raise(ErrorCode::IoError, "archive: malformed potential exponent");
          }
        } else {
          raise(ErrorCode::IoError, "archive: unknown potential '" + kind + "'");
        }
      } else if (line.find("softening") != std::string::npos) {
        a.meta.potential.softening = std::stod(v);
      } else if (line.find("J0") != std::string::npos) {
        a.meta.J0 = parse3(v, "J0");
      } else if (line.find("normal0") != std::string::npos) {
        a.meta.normal0 = parse3(v, "normal0");
      } else if (line.find("return_tolerance") != std::string::npos) {
        a.meta.return_tolerance = std::stod(v);
      } else if (line.find("phase_tolerance") != std::string::npos) {
        a.meta.phase_tolerance = std::stod(v);
      } else if (line.find("momentum_degenerate") != std::string::npos) {
        a.meta.momentum_degenerate = std::stod(v) != 0.0;
      } else if (line.find("fiber_angle_valid") != std::string::npos) {
        a.meta.fiber_angle_valid = std::stod(v) != 0.0;
      }
      continue;
    }
    if (first) {
      raise(ErrorCode::IoError, "not a trajectory archive (bad signature line)");
    }
    if (!have_header) {
      if (line != archive_column_header()) {
        raise(ErrorCode::IoError,
              "archive: unexpected column header at line " + std::to_string(lineno));
      }
      have_header = true;
      continue;
    }
    std::istringstream is(line);
    double col[34];
    for (int i = 0; i < 34; ++i) {
      if (!(is >> col[i])) {
        raise(ErrorCode::IoError,
              "archive: malformed data row at line " + std::to_string(lineno));
      }
    }
    double extra;
    if (is >> extra) {
      raise(ErrorCode::IoError,
            "archive: trailing data at line " + std::to_string(lineno));
    }
    State st;
    st.config.q1 = Vec3(col[1], col[2], col[3]);
    st.config.q2 = Vec3(col[4], col[5], col[6]);
    st.config.q3 = Vec3(col[7], col[8], col[9]);
    st.v1 = Vec3(col[10], col[11], col[12]);
    st.v2 = Vec3(col[13], col[14], col[15]);
    st.v3 = Vec3(col[16], col[17], col[18]);
    a.samples.push_back(sample_state(col[0], st, a.meta.masses, a.meta.potential));
    a.normals.push_back(Vec3(col[24], col[25], col[26]));
    a.w.push_back(Vec3(col[27], col[28], col[29]));
    a.z1.push_back(col[30]);
    a.theta1.push_back(col[31]);
    a.z2.push_back(col[32]);
    a.theta2.push_back(col[33]);
  }
  if (!have_header) {
    raise(ErrorCode::IoError, "archive: missing column header");
  }
  return a;
}

Archive read_archive_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(ErrorCode::IoError, "cannot open archive '" + path + "'");
  return read_archive(in);
}

OrientedTrajectory archive_trajectory(const Archive& a, const IntegratorConfig& cfg_in) {
  if (a.samples.empty()) {
    raise(ErrorCode::IoError, "archive has no samples");
  }
  IntegratorConfig cfg = cfg_in;
  if (a.samples.size() >= 2) {
    cfg.sample_spacing = (a.samples.back().t - a.samples.front().t) /
                         static_cast<double>(a.samples.size() - 1);
  }
  Trajectory tr(a.samples, a.meta.masses, a.meta.potential, cfg);
  return orientation_lift(tr, a.meta.normal0);
}

}  // namespace shapephase
