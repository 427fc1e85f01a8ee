#pragma once

// Deterministic motion builders shared by the test executables.
//
// The vertex-ellipse builder constructs a momentum-conserving planar motion
// directly from body positions: each vertex of a base triangle traces a small
// ellipse, and a carrier rotation built by quadrature makes the angular
// momentum exactly (0, 0, J0) at every emitted sample. It deliberately avoids
// the library's relative-coordinate machinery so the two construction routes
// cross-check each other.

#include <array>
#include <cmath>
#include <vector>

#include "shapephase/dynamics.hpp"
#include "shapephase/numeric.hpp"
#include "shapephase/triangle.hpp"
#include "shapephase/types.hpp"

namespace shapephase::testing {

// Equilateral relative equilibrium: three bodies at mutual distance L circle
// the center of mass rigidly with rate w, w^2 = M / L^3 (any mass ratios).
inline State lagrange_state(double L, double direction, const Masses& m) {
  const std::array<Vec3, 3> raw = {Vec3(0.0, 0.0, 0.0), Vec3(L, 0.0, 0.0),
                                   Vec3(0.5 * L, 0.5 * std::sqrt(3.0) * L, 0.0)};
  State s;
  s.config = center(raw, m);
  const double omega = direction * std::sqrt(m.total() / (L * L * L));
  for (int a = 0; a < 3; ++a) {
    s.velocity(a) = omega * Vec3::UnitZ().cross(s.config[a]);
  }
  return s;
}

inline double lagrange_period(double L, const Masses& m) {
  return 2.0 * kPi / std::sqrt(m.total() / (L * L * L));
}

struct VertexEllipseSpec {
  double J0 = 1.2;
  double duration = 1.0;   // one full loop of every vertex ellipse
  double periods = 1.0;    // emitted span = periods * duration
  int samples = 2001;
  double radius = 0.22;  // scale of the per-vertex ellipses
  std::array<Vec3, 3> base = {Vec3(0.7, -0.15, 0.0), Vec3(-0.45, 0.55, 0.0),
                              Vec3(-0.1, -0.4, 0.0)};
};

namespace detail {

struct BodyPath {
  std::array<Vec3, 3> p;   // centered positions, z = 0
  std::array<Vec3, 3> pd;  // their time derivatives
};

// Per-vertex ellipse phases and axis weights; fixed so every run of a given
// spec is identical.
inline BodyPath body_path(const VertexEllipseSpec& spec, const Masses& m, double t) {
  static constexpr double cx[3] = {1.0, 0.7, -0.8};
  static constexpr double cy[3] = {0.6, -1.0, 0.9};
  static constexpr double ph[3] = {0.0, 2.1, 4.0};
  const double Om = 2.0 * kPi / spec.duration;
  BodyPath out;
  Vec3 com = Vec3::Zero();
  Vec3 comd = Vec3::Zero();
  for (int a = 0; a < 3; ++a) {
    const double arg = Om * t + ph[a];
    out.p[a] = spec.base[a] + spec.radius * Vec3(cx[a] * std::cos(arg),
                                                 cy[a] * std::sin(arg), 0.0);
    out.pd[a] = spec.radius * Om * Vec3(-cx[a] * std::sin(arg),
                                        cy[a] * std::cos(arg), 0.0);
    com += m[a] * out.p[a];
    comd += m[a] * out.pd[a];
  }
  for (int a = 0; a < 3; ++a) {
    out.p[a] -= com / m.total();
    out.pd[a] -= comd / m.total();
  }
  return out;
}

// d(psi)/dt making the total angular momentum equal J0 z-hat when the body
// path is carried by a rotation of angle psi about z.
inline double carrier_rate(const VertexEllipseSpec& spec, const Masses& m, double t) {
  const BodyPath b = body_path(spec, m, t);
  double I = 0.0;
  double Lrel = 0.0;
  for (int a = 0; a < 3; ++a) {
    I += m[a] * b.p[a].squaredNorm();
    Lrel += m[a] * b.p[a].cross(b.pd[a]).z();
  }
  return (spec.J0 - Lrel) / I;
}

}  // namespace detail

// Planar loop with angular momentum exactly (0, 0, J0) at every sample. The
// stored potential is the constant power law (exponent 0), so accelerations
// vanish and only the momentum budget is meaningful for this motion.
inline OrientedTrajectory vertex_ellipse_loop(const VertexEllipseSpec& spec,
                                              const Masses& m) {
  const int n = spec.samples;
  const double h = spec.periods * spec.duration / (n - 1);

  PotentialSpec pot;
  pot.kind = PotentialSpec::Kind::PowerLaw;
  pot.exponent = 0.0;

  IntegratorConfig cfg;
  cfg.sample_spacing = h;
  cfg.energy_drift_budget = 1e300;  // not a solution of the equations of motion
  cfg.momentum_drift_budget = 1e-8;

  std::vector<TrajectorySample> samples;
  samples.reserve(n);
  double psi = 0.0;
  for (int k = 0; k < n; ++k) {
    const double t = k * h;
    const detail::BodyPath b = detail::body_path(spec, m, t);
    const double c = std::cos(psi), s = std::sin(psi);
    const double psid = detail::carrier_rate(spec, m, t);
    State st;
    for (int a = 0; a < 3; ++a) {
      const Vec3& p = b.p[a];
      const Vec3& pd = b.pd[a];
      const Vec3 q(c * p.x() - s * p.y(), s * p.x() + c * p.y(), 0.0);
      const Vec3 rpd(c * pd.x() - s * pd.y(), s * pd.x() + c * pd.y(), 0.0);
      st.config[a] = q;
      st.velocity(a) = psid * Vec3::UnitZ().cross(q) + rpd;
    }
    samples.push_back(sample_state(t, st, m, pot));
    if (k + 1 < n) {
      // One Simpson step of the carrier rate; the emitted momentum is exact
      // at the samples regardless of this quadrature's accuracy.
      const double f0 = psid;
      const double fm = detail::carrier_rate(spec, m, t + 0.5 * h);
      const double f1 = detail::carrier_rate(spec, m, t + h);
      psi += h * (f0 + 4.0 * fm + f1) / 6.0;
    }
  }
  Trajectory tr(std::move(samples), m, pot, cfg);
  std::vector<Vec3> normals(n, Vec3::UnitZ());
  return OrientedTrajectory(std::move(tr), std::move(normals));
}

}  // namespace shapephase::testing
