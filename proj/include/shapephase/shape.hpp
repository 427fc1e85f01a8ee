#pragma once

#include <utility>

#include "shapephase/error.hpp"
#include "shapephase/triangle.hpp"
#include "shapephase/types.hpp"

namespace shapephase {

// Mass-weighted relative coordinates diagonalizing the kinetic energy, with
// the (1,3 | 2) grouping frozen:
//   xi1 = q1 - q3, xi2 = q2 - (m1 q1 + m3 q3)/(m1 + m3),
//   zeta_i = sqrt(mu_i) xi_i,  1/mu1 = 1/m1 + 1/m3, 1/mu2 = 1/(m1+m3) + 1/m2.
// Identities: |zeta1|^2 + |zeta2|^2 = I(q); sum m|v|^2 = |zeta1_dot|^2 + |zeta2_dot|^2.
struct JacobiVectors {
  Vec3 zeta1 = Vec3::Zero(), zeta2 = Vec3::Zero();
  double mu1 = 0.0, mu2 = 0.0;
};

JacobiVectors jacobi(const Configuration& q, const Masses& m);

// The same linear map applied to velocities (gives zeta_i time derivatives).
JacobiVectors jacobi_velocity(const State& s, const Masses& m);

// Inverse map: configuration with zero center of mass from Jacobi vectors.
Configuration configuration_from_jacobi(const JacobiVectors& jv, const Masses& m);

// Point on the shape sphere of radius 1/2: oriented similarity class of the
// weighted triangle. Coordinates: w (norm 1/2), height z1 = 2 w3 in [-1, 1],
// azimuth theta1 = atan2(w2, w1).
struct ShapePoint {
  Vec3 w = Vec3(0.5, 0.0, 0.0);
  double z1 = 0.0;
  double theta1 = 0.0;
};

// Quadratic map from Jacobi vectors to the shape sphere; raw components
//   w1 = (|zeta1|^2 - |zeta2|^2)/2, w2 = zeta1 . zeta2, w3 = n . (zeta1 x zeta2)
// are divided by I. The normal n supplies the orientation (flipping n
// reflects the point about the equator). Raises TripleCollision when I = 0.
ShapePoint hopf_map(const JacobiVectors& jv, const Vec3& n, double I);
ShapePoint hopf_map(const OrientedConfiguration& oq, const Masses& m);

// Great-circle distance on the radius-1/2 sphere: (1/2) arccos(4 w . w').
double shape_distance(const ShapePoint& a, const ShapePoint& b);

// For a planar state with I = 1, dI/dt = 0 and zero angular momentum
// (horizontal velocity), returns {ambient kinetic-metric speed, shape-sphere
// speed}. The quotient metric makes these equal. Raises PreconditionViolated.
std::pair<double, double> submersion_speed_check(const State& s, const Masses& m);

}  // namespace shapephase
