#include "shapephase/triangle.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <string>

namespace shapephase {

namespace {

struct Pair {
  int a, b;
};
constexpr Pair kPairs[3] = {{0, 1}, {0, 2}, {1, 2}};

double pair_mass(const Masses& m, int a, int b) { return m[a] * m[b]; }

}  // namespace

Configuration center(const std::array<Vec3, 3>& q_raw, const Masses& m) {
  const Vec3 com = (m.m1 * q_raw[0] + m.m2 * q_raw[1] + m.m3 * q_raw[2]) / m.total();
  Configuration q;
  for (int a = 0; a < 3; ++a) q[a] = q_raw[a] - com;
  return q;
}

double polar_moment(const Configuration& q, const Masses& m) {
  return m.m1 * q.q1.squaredNorm() + m.m2 * q.q2.squaredNorm() + m.m3 * q.q3.squaredNorm();
}

Mat3 inertia_tensor(const Configuration& q, const Masses& m) {
  Mat3 M = polar_moment(q, m) * Mat3::Identity();
  for (int a = 0; a < 3; ++a) M -= m[a] * q[a] * q[a].transpose();
  return M;
}

Vec3 angular_momentum(const State& s, const Masses& m) {
  Vec3 J = Vec3::Zero();
  for (int a = 0; a < 3; ++a) J += m[a] * s.config[a].cross(s.velocity(a));
  return J;
}

double potential_energy(const Configuration& q, const Masses& m,
                        const PotentialSpec& spec) {
  const double p = spec.effective_exponent();
  double V = 0.0;
  for (const Pair& pr : kPairs) {
    const double d = (q[pr.a] - q[pr.b]).norm();
    if (spec.softening == 0.0 && d < spec.collision_floor) {
      raise(ErrorCode::BinaryCollision,
            "pairwise distance " + std::to_string(d) + " below floor");
    }
    const double deff = std::sqrt(d * d + spec.softening * spec.softening);
    V -= pair_mass(m, pr.a, pr.b) * std::pow(deff, p);
  }
  return V;
}

double kinetic_energy(const State& s, const Masses& m) {
  double K = 0.0;
  for (int a = 0; a < 3; ++a) K += 0.5 * m[a] * s.velocity(a).squaredNorm();
  return K;
}

double oriented_area(const OrientedConfiguration& oq) {
  const Configuration& q = oq.config;
  return 0.5 * oq.n.dot((q.q2 - q.q1).cross(q.q3 - q.q1));
}

double collinearity_measure(const Configuration& q, const Masses& m) {
  const double I = polar_moment(q, m);
  if (I <= 0.0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Mat3> es(inertia_tensor(q, m));
  return es.eigenvalues()(0) / I;
}

std::optional<Vec3> principal_normal(const Configuration& q, const Masses& m) {
  const double I = polar_moment(q, m);
  if (I <= 0.0) raise(ErrorCode::TripleCollision, "principal_normal: zero-size configuration");
  if (collinearity_measure(q, m) < kCollinearEigenvalueRatio) return std::nullopt;

  // The centered vertices always span a plane through the origin, so the
  // weighted second-moment matrix has an exact null direction: the normal.
  Mat3 M = Mat3::Zero();
  for (int a = 0; a < 3; ++a) M += m[a] * q[a] * q[a].transpose();
  Eigen::SelfAdjointEigenSolver<Mat3> es(M);
  Vec3 n = es.eigenvectors().col(0);

  int imax = 0;
  n.cwiseAbs().maxCoeff(&imax);
  if (n(imax) < 0.0) n = -n;
  return n.normalized();
}

}  // namespace shapephase
