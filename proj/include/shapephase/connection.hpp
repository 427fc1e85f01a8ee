#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

#include "shapephase/dynamics.hpp"
#include "shapephase/numeric.hpp"
#include "shapephase/shape.hpp"
#include "shapephase/types.hpp"

namespace shapephase {

// Inertia eigenvalues below this fraction of the polar moment are treated as
// zero by the pseudo-inverse; the in-plane eigenvalue gap below
// kEigenframeGapFloor (again relative to the polar moment) makes the inertia
// eigenframe numerically meaningless.
inline constexpr double kInertiaPseudoInverseFloor = 1e-12;
inline constexpr double kEigenframeGapFloor = 1e-8;

// Angular velocity reproducing the state's angular momentum: pinv(I_tensor)*J.
// The pseudo-inverse drops directions whose inertia eigenvalue vanishes
// (collinear configurations), where J has no component along the line anyway
// for physical velocities.
Vec3 connection_value(const State& s, const Masses& m);

// Component of the connection along a fixed momentum vector: J0 . pinv(I)*J(s).
double alpha_J0(const State& s, const Masses& m, const Vec3& J0);

// Instantaneous rotation rate about J0 of a triangle carrying momentum J0:
// J0^T pinv(I(q)) J0. Always >= 0. Raises UndefinedAtCollinear when J0 has a
// component along the null axis of a collinear configuration.
double omega_J0(const Configuration& q, const Masses& m, const Vec3& J0);

// Integral of omega_J0 along the trajectory (adaptive quadrature on the dense
// interpolant), with an error estimate.
QuadratureValue dynamic_phase(const Trajectory& tr, const Vec3& J0, double t_end);
QuadratureValue dynamic_phase(const OrientedTrajectory& otr, const Vec3& J0);

// Orthonormal frame diagonalizing the inertia tensor: U3 = n, U1/U2 the
// in-plane eigenvectors with eigenvalues lambda1 <= lambda2, det +1.
struct BodyFrame {
  Vec3 U1 = Vec3::UnitX();
  Vec3 U2 = Vec3::UnitY();
  Vec3 U3 = Vec3::UnitZ();
  double lambda1 = 0.0;
  double lambda2 = 0.0;
};

// Frame at a single configuration (no continuity chaining; U1's overall sign
// is arbitrary). Raises TripleCollision on zero-size configurations.
BodyFrame body_frame(const Configuration& q, const Masses& m, const Vec3& n);

// One sample of the reduced curve: shape coordinates (z1, theta1) and fiber
// coordinates (z2, theta2), both angles unwrapped along the trajectory.
struct ReducedSample {
  double t = 0.0;
  double z1 = 0.0;
  double theta1 = 0.0;
  double z2 = 1.0;
  double theta2 = 0.0;
  BodyFrame frame;
  double gap_ratio = 0.0;   // in-plane eigenvalue gap / polar moment
  double continuity = 1.0;  // |U1(t_k) . U1(t_{k-1})| before sign chaining
};

class GaugeTrajectory {
 public:
  GaugeTrajectory(std::vector<ReducedSample> samples, Vec3 J0, Masses m);

  const std::vector<ReducedSample>& samples() const { return samples_; }
  const Vec3& momentum() const { return J0_; }
  double momentum_magnitude() const { return J0_.norm(); }
  const Masses& masses() const { return m_; }
  double min_gap_ratio() const { return min_gap_ratio_; }
  double min_continuity() const { return min_continuity_; }
  bool momentum_degenerate() const { return momentum_degenerate_; }
  double sample_spacing() const;

 private:
  std::vector<ReducedSample> samples_;
  Vec3 J0_;
  Masses m_;
  double min_gap_ratio_ = 1.0;
  double min_continuity_ = 1.0;
  bool momentum_degenerate_ = false;

  friend GaugeTrajectory eigenframe_track(const OrientedTrajectory&, const Vec3&);
};

// Tracks the inertia eigenframe along the trajectory with sign chaining and
// continuous angle unwrapping. Raises EigenframeDegenerate when the in-plane
// eigenvalue gap falls below the floor. The one-argument overload measures J0
// from the trajectory's initial sample.
GaugeTrajectory eigenframe_track(const OrientedTrajectory& otr, const Vec3& J0);
GaugeTrajectory eigenframe_track(const OrientedTrajectory& otr);

// Time-parametrized curve on the shape sphere in the (z1, theta1) chart,
// t in [0, 1], theta1 continuous (not reduced mod 2pi).
class ShapeCurve {
 public:
  using ChartFn = std::function<std::pair<double, double>(double)>;

  // Circle of constant z1 traversed `turns` times in the +theta1 direction
  // (negative turns reverse the direction).
  static ShapeCurve latitude(double z1, double turns = 1.0);
  // Piecewise chart-linear curve through the given (z1, theta1) vertices;
  // when `close` is set the last segment returns to the first vertex.
  static ShapeCurve polygon(std::vector<std::pair<double, double>> vertices,
                            bool close = true);
  // Arbitrary smooth chart curve; optional analytic derivative and interior
  // breakpoints where the derivative may jump.
  static ShapeCurve from_function(ChartFn f, ChartFn df = nullptr,
                                  std::vector<double> breaks = {});

  std::pair<double, double> at(double t) const;          // (z1, theta1)
  std::pair<double, double> derivative(double t) const;  // (dz1/dt, dtheta1/dt)
  const std::vector<double>& breaks() const { return breaks_; }
  // Endpoints coincide as shape-sphere points (theta1 may differ by 2pi k).
  bool closed(double tol = 1e-9) const;
  // (theta1(1) - theta1(0)) / 2pi.
  double winding() const;

 private:
  ShapeCurve() = default;
  ChartFn f_;
  ChartFn df_;
  std::vector<double> breaks_;
};

struct LiftOptions {
  double rel_tol = 1e-12;
  double abs_tol = 1e-12;
  int samples_per_segment = 256;
  double shape_error_budget = 1e-8;   // max |w(lift) - w(target)| allowed
  double stabilization_rate = 20.0;   // feedback pulling the lift onto the curve
};

// Result of integrating the zero-angular-momentum (horizontal) lift of a
// planar shape curve at unit polar moment. zeta packs the two normalized
// Jacobi vectors as planar complex numbers (Re z1, Im z1, Re z2, Im z2).
struct HorizontalLift {
  std::vector<double> t;
  std::vector<Eigen::Vector4d> zeta;
  Masses m;
  double max_abs_momentum = 0.0;
  double max_shape_error = 0.0;

  Configuration configuration(std::size_t k) const;
  std::vector<Configuration> configurations() const;
  // Overall planar rotation from first to last configuration, in (-pi, pi].
  double rotation_angle() const;
};

// Integrates the unique planar motion projecting to `curve` with zero angular
// momentum and constant polar moment 1. q_start must be planar, have polar
// moment 1, and project to curve(0).
HorizontalLift horizontal_lift(const ShapeCurve& curve, const Configuration& q_start,
                               const Masses& m, const LiftOptions& opt = {});

// Planar configuration with polar moment 1, normal +z, projecting to the
// given chart point. Raises PreconditionViolated at the chart's south pole.
Configuration section_configuration(double z1, double theta1, const Masses& m);

// Rotation angle about +z carrying the planar configuration q0 to q1 (same
// shape assumed), via the phase of the Hermitian inner product of normalized
// Jacobi vectors. Result in (-pi, pi].
double planar_rotation_angle(const Configuration& q0, const Configuration& q1,
                             const Masses& m);

}  // namespace shapephase
