#include "shapephase/rigid.hpp"

#include <Eigen/Geometry>
#include <Eigen/SVD>
#include <cmath>
#include <string>

#include "shapephase/numeric.hpp"
#include "shapephase/triangle.hpp"

namespace shapephase {

bool is_rotation(const Rotation& R, double tol) {
  const Mat3 err = R.transpose() * R - Mat3::Identity();
  return err.cwiseAbs().maxCoeff() <= tol && std::abs(R.determinant() - 1.0) <= tol;
}

Rotation exp_rotation(const Vec3& v) {
  const double theta = v.norm();
  if (theta < 1e-14) return Rotation::Identity();
  return Eigen::AngleAxisd(theta, v / theta).toRotationMatrix();
}

AxisAngle axis_angle_of(const Rotation& R) {
  const Eigen::AngleAxisd aa(R);
  AxisAngle out;
  out.axis = aa.axis();
  out.angle = wrap_pi(aa.angle());
  return out;
}

double log_about_axis(const Rotation& R, const Vec3& axis, double tol_axis) {
  const double nrm = axis.norm();
  if (nrm < 1e-12) raise(ErrorCode::PreconditionViolated, "log_about_axis: zero axis");
  const Vec3 u = axis / nrm;
  const double off = (R * u - u).norm();
  if (off > tol_axis) {
    raise(ErrorCode::AxisNotFixed,
          "log_about_axis: |R axis - axis| = " + std::to_string(off));
  }
  const Vec3 e = u.unitOrthogonal();
  const Vec3 Re = R * e;
  double theta = std::atan2(Re.dot(u.cross(e)), Re.dot(e));
  if (theta <= -kPi) theta = kPi;
  return theta;
}

Rotation rotation_between(const Vec3& a, const Vec3& b, double antipodal_tol) {
  const Vec3 ua = a.normalized();
  const Vec3 ub = b.normalized();
  if (ua.dot(ub) < -1.0 + antipodal_tol) {
    raise(ErrorCode::AntipodalInput, "rotation_between: antipodal unit vectors");
  }
  return Eigen::Quaterniond::FromTwoVectors(ua, ub).toRotationMatrix();
}

SimilarityFit fit_similarity(const Configuration& q0, const Configuration& q1,
                             const Masses& m) {
  const double I0 = polar_moment(q0, m);
  if (I0 <= 0.0) raise(ErrorCode::TripleCollision, "fit_similarity: zero-size reference");
  if (collinearity_measure(q0, m) < kCollinearEigenvalueRatio) {
    raise(ErrorCode::DegenerateFit,
          "fit_similarity: collinear reference configuration; rotation about the "
          "line is unconstrained");
  }

  Mat3 A = Mat3::Zero();  // weighted cross-covariance
  for (int a = 0; a < 3; ++a) A += m[a] * q1[a] * q0[a].transpose();

  Eigen::JacobiSVD<Mat3> svd(A, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Mat3 U = svd.matrixU(), V = svd.matrixV();
  const Vec3 sigma = svd.singularValues();  // descending
  const double det_sign = (U * V.transpose()).determinant() > 0.0 ? 1.0 : -1.0;

  SimilarityFit out;
  out.R = U * Vec3(1.0, 1.0, det_sign).asDiagonal() * V.transpose();
  const double aligned_trace = sigma(0) + sigma(1) + det_sign * sigma(2);
  if (aligned_trace <= 0.0) {
    raise(ErrorCode::DegenerateFit, "fit_similarity: optimal scale not positive");
  }
  out.scale = aligned_trace / I0;

  double resid = 0.0;
  for (int a = 0; a < 3; ++a) {
    resid += m[a] * (q1[a] - out.scale * out.R * q0[a]).squaredNorm();
  }
  out.residual = resid;
  return out;
}

}  // namespace shapephase
