#pragma once

#include "shapephase/error.hpp"
#include "shapephase/types.hpp"

namespace shapephase {

struct AxisAngle {
  Vec3 axis = Vec3::UnitZ();  // unit vector
  double angle = 0.0;         // radians in (-pi, pi]
};

bool is_rotation(const Rotation& R, double tol = 1e-12);

// Rotation by |v| radians about v/|v|; identity for |v| below machine scale.
Rotation exp_rotation(const Vec3& v);

// Principal axis-angle of R (angle in [0, pi], axis convention from the
// eigenstructure). Diagnostic companion of exp_rotation.
AxisAngle axis_angle_of(const Rotation& R);

// Signed angle in (-pi, pi] of a rotation that fixes `axis`.
// Raises AxisNotFixed when |R axis - axis| > tol_axis.
double log_about_axis(const Rotation& R, const Vec3& axis, double tol_axis = 1e-8);

// Smallest rotation taking unit vector a to unit vector b (axis orthogonal to
// both, angle arccos(a.b); identity when a = b).
// Raises AntipodalInput when a.b < -1 + tol (rotation plane undefined).
Rotation rotation_between(const Vec3& a, const Vec3& b, double antipodal_tol = 1e-12);

struct SimilarityFit {
  double scale = 1.0;
  Rotation R = Rotation::Identity();
  double residual = 0.0;  // min over (scale, R) of sum_a m_a |q1_a - scale R q0_a|^2
};

// Weighted orthogonal alignment: minimizes sum m_a |q1_a - s R q0_a|^2 over
// s > 0 and proper rotations R. Exact for exactly-similar inputs.
// Raises DegenerateFit when q0 is collinear (R unique only up to rotation
// about the line; callers must disambiguate with normals), TripleCollision
// when q0 has zero size.
SimilarityFit fit_similarity(const Configuration& q0, const Configuration& q1,
                             const Masses& m);

}  // namespace shapephase
