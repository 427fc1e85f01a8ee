#include "shapephase/shape.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace shapephase {

namespace {

JacobiVectors jacobi_of(const Vec3& a1, const Vec3& a2, const Vec3& a3, const Masses& m) {
  JacobiVectors jv;
  jv.mu1 = 1.0 / (1.0 / m.m1 + 1.0 / m.m3);
  jv.mu2 = 1.0 / (1.0 / (m.m1 + m.m3) + 1.0 / m.m2);
  const Vec3 xi1 = a1 - a3;
  const Vec3 xi2 = a2 - (m.m1 * a1 + m.m3 * a3) / (m.m1 + m.m3);
  jv.zeta1 = std::sqrt(jv.mu1) * xi1;
  jv.zeta2 = std::sqrt(jv.mu2) * xi2;
  return jv;
}

}  // namespace

JacobiVectors jacobi(const Configuration& q, const Masses& m) {
  return jacobi_of(q.q1, q.q2, q.q3, m);
}

JacobiVectors jacobi_velocity(const State& s, const Masses& m) {
  return jacobi_of(s.v1, s.v2, s.v3, m);
}

Configuration configuration_from_jacobi(const JacobiVectors& jv, const Masses& m) {
  const double M = m.total();
  const double m13 = m.m1 + m.m3;
  const Vec3 xi1 = jv.zeta1 / std::sqrt(jv.mu1);
  const Vec3 xi2 = jv.zeta2 / std::sqrt(jv.mu2);
  Configuration q;
  q.q2 = (m13 / M) * xi2;
  q.q1 = -(m.m2 / M) * xi2 + (m.m3 / m13) * xi1;
  q.q3 = q.q1 - xi1;
  return q;
}

ShapePoint hopf_map(const JacobiVectors& jv, const Vec3& n, double I) {
  if (I <= 0.0) raise(ErrorCode::TripleCollision, "hopf_map: zero polar moment");
  ShapePoint s;
  s.w(0) = 0.5 * (jv.zeta1.squaredNorm() - jv.zeta2.squaredNorm()) / I;
  s.w(1) = jv.zeta1.dot(jv.zeta2) / I;
  s.w(2) = n.dot(jv.zeta1.cross(jv.zeta2)) / I;
  s.z1 = 2.0 * s.w(2);
  s.theta1 = std::atan2(s.w(1), s.w(0));
  return s;
}

ShapePoint hopf_map(const OrientedConfiguration& oq, const Masses& m) {
  return hopf_map(jacobi(oq.config, m), oq.n, polar_moment(oq.config, m));
}

double shape_distance(const ShapePoint& a, const ShapePoint& b) {
  const double c = std::clamp(4.0 * a.w.dot(b.w), -1.0, 1.0);
  return 0.5 * std::acos(c);
}

std::pair<double, double> submersion_speed_check(const State& s, const Masses& m) {
  const Configuration& q = s.config;
  const double I = polar_moment(q, m);
  const auto n_opt = principal_normal(q, m);
  if (!n_opt) raise(ErrorCode::PreconditionViolated, "submersion check: collinear configuration");
  const Vec3 n = *n_opt;

  double planarity = 0.0;
  for (int a = 0; a < 3; ++a) {
    planarity = std::max(planarity, std::abs(n.dot(s.velocity(a))));
  }
  double Idot = 0.0;
  for (int a = 0; a < 3; ++a) Idot += 2.0 * m[a] * q[a].dot(s.velocity(a));
  const Vec3 J = angular_momentum(s, m);

  const double scale = std::sqrt(std::max(I, 1e-300));
  if (std::abs(I - 1.0) > 1e-8 || std::abs(Idot) > 1e-8 * scale ||
      J.norm() > 1e-8 * scale || planarity > 1e-8 * scale) {
    raise(ErrorCode::PreconditionViolated,
          "submersion check requires a planar state with I = 1, dI/dt = 0, J = 0");
  }

  const JacobiVectors z = jacobi(q, m);
  const JacobiVectors zd = jacobi_velocity(s, m);

  // Raw map derivative (I frozen at 1, n frozen: velocities lie in the plane).
  Vec3 wdot;
  wdot(0) = z.zeta1.dot(zd.zeta1) - z.zeta2.dot(zd.zeta2);
  wdot(1) = zd.zeta1.dot(z.zeta2) + z.zeta1.dot(zd.zeta2);
  wdot(2) = n.dot(zd.zeta1.cross(z.zeta2) + z.zeta1.cross(zd.zeta2));

  const double ambient = std::sqrt(2.0 * kinetic_energy(s, m));
  const double shape_speed = (wdot / I).norm();
  return {ambient, shape_speed};
}

}  // namespace shapephase
