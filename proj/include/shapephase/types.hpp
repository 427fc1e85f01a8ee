#pragma once

#include <Eigen/Dense>

namespace shapephase {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
// Proper orthogonal 3x3 matrix: R^T R = 1, det R = +1 (within 1e-12).
using Rotation = Eigen::Matrix3d;

// Natural units throughout: G = 1, masses and lengths dimensionless.
struct Masses {
  double m1 = 1.0, m2 = 1.0, m3 = 1.0;

  double total() const { return m1 + m2 + m3; }
  double operator[](int a) const { return a == 0 ? m1 : (a == 1 ? m2 : m3); }
  bool valid() const { return m1 > 0.0 && m2 > 0.0 && m3 > 0.0; }
};

// Three position vectors with the weighted center of mass at the origin.
struct Configuration {
  Vec3 q1 = Vec3::Zero(), q2 = Vec3::Zero(), q3 = Vec3::Zero();

  const Vec3& operator[](int a) const { return a == 0 ? q1 : (a == 1 ? q2 : q3); }
  Vec3& operator[](int a) { return a == 0 ? q1 : (a == 1 ? q2 : q3); }
};

// Configuration plus a unit normal to the triangle's plane; the normal
// resolves the two-fold orientation ambiguity of the plane.
struct OrientedConfiguration {
  Configuration config;
  Vec3 n = Vec3::UnitZ();
};

// Configuration plus velocities; the weighted velocity sum is zero so the
// center of mass stays fixed at the origin.
struct State {
  Configuration config;
  Vec3 v1 = Vec3::Zero(), v2 = Vec3::Zero(), v3 = Vec3::Zero();

  const Vec3& velocity(int a) const { return a == 0 ? v1 : (a == 1 ? v2 : v3); }
  Vec3& velocity(int a) { return a == 0 ? v1 : (a == 1 ? v2 : v3); }
};

// Pairwise-distance potential. Newtonian is the power law with exponent -1:
//   V = -sum_{i<j} m_i m_j d_ij^p   (single count over unordered pairs).
// Optional Plummer-style softening replaces d by sqrt(d^2 + softening^2).
struct PotentialSpec {
  enum class Kind { Newtonian, PowerLaw };
  Kind kind = Kind::Newtonian;
  double exponent = -1.0;   // used by PowerLaw only
  double softening = 0.0;   // >= 0; 0 disables
  double collision_floor = 1e-12;  // pairwise distance below this raises BinaryCollision

  double effective_exponent() const {
    return kind == Kind::Newtonian ? -1.0 : exponent;
  }
};

}  // namespace shapephase
