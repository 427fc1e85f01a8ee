#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "shapephase/connection.hpp"
#include "shapephase/rigid.hpp"

namespace shapephase {

namespace debug {
// Validation canary: flips the sign of the gauge-potential coefficients used
// by the line-integral route (and only that route), so cross-checks against
// the surface quadrature and the measured rotation must fail when set.
extern bool flip_beta_sign;
}  // namespace debug

// Reduced curve closed by two meridian arcs (constant shape, constant theta2)
// running between the fiber-sphere north pole z2 = 1 and the curve endpoints.
// The gauge potential vanishes identically on such arcs, so they carry the
// bookkeeping of the closure without contributing to the line integral.
struct ClosedReducedLoop {
  GaugeTrajectory gauge;
  double z2_start = 1.0;
  double z2_end = 1.0;
  double arc_length_start = 0.0;  // J0 * arccos(z2_start)
  double arc_length_end = 0.0;    // J0 * arccos(z2_end)
  double closure_distance = 0.0;  // shape distance between curve endpoints
  double max_excursion = 0.0;     // max shape distance from the start point
};

ClosedReducedLoop close_reduced_loop(const GaugeTrajectory& gt,
                                     double shape_tol = 1e-4);

struct GeometricPhase {
  double value = 0.0;  // theta1_term + theta2_term + winding_correction
  double raw_line_integral = 0.0;
  double winding_correction = 0.0;  // -pi * J0 * winding
  int winding = 0;                  // net theta1 turns of the loop
  double theta1_term = 0.0;         // J0 * integral of (z1 z2 / 2) dtheta1
  double theta2_term = 0.0;         // J0 * integral of (z2 - 1) dtheta2
  double error = 0.0;
  bool point_loop = false;
};

GeometricPhase geometric_phase_line(const ClosedReducedLoop& loop, double J0);

// A point of the local product chart (shape sphere x fiber sphere).
struct ChartPoint {
  double z1 = 0.0;
  double theta1 = 0.0;
  double z2 = 1.0;
  double theta2 = 0.0;
};

using ChartPatch = std::function<ChartPoint(double, double)>;
using ChartPatchDeriv =
    std::function<std::pair<ChartPoint, ChartPoint>(double, double)>;
using ChartPath = std::function<ChartPoint(double)>;

// Integral of the curvature two-form J0 [ 1/2 d(z1 z2) ^ dtheta1 + dz2 ^ dtheta2 ]
// over the patch image of [0,1]^2. Derivatives are taken analytically when
// provided, otherwise by high-order finite differences (the patch must then be
// evaluable slightly outside the unit square). Raises ChartViolation when the
// patch leaves the chart (|z1| at a pole, |z2| > 1).
QuadratureValue omega_surface_quadrature(const ChartPatch& patch, double J0,
                                         const ChartPatchDeriv& deriv = nullptr);

// Integral of the gauge potential J0 [ 1/2 z1 z2 dtheta1 + (z2 - 1) dtheta2 ]
// along a parametrized chart path, t from 0 to 1, split at the given breaks.
QuadratureValue beta_line_integral(const ChartPath& path, double J0,
                                   const std::vector<double>& breaks = {});

struct RotationMeasurement {
  double dtheta = 0.0;  // rotation about the J0 axis, in (-pi, pi]
  Rotation R = Rotation::Identity();
  Rotation R0 = Rotation::Identity();
  Rotation R1 = Rotation::Identity();
  double fit_residual = 0.0;  // relative similarity-fit residual
};

// Measures the rotation carrying oq0 to oq1 and factors it through the J0
// axis: R = R1 * R_J0 * R0 with R0 = rotation_between(n0, J0hat) and
// R1 = rotation_between(J0hat, n1); dtheta is the angle of R_J0 about J0hat.
RotationMeasurement measure_total_rotation(const OrientedConfiguration& oq0,
                                           const OrientedConfiguration& oq1,
                                           const Masses& m, const Vec3& J0,
                                           double similarity_tol = 1e-4);

struct ReconstructOptions {
  double tolerance = 1e-5;          // PASS threshold on |residual|
  double shape_closure_tol = 1e-4;  // loop-closure gate
  double point_loop_tol = 1e-6;     // whole-curve-at-one-point shortcut
  double similarity_tol = 1e-4;     // endpoint similarity gate
};

struct PhaseReport {
  double dtheta = 0.0;
  double dynamic_phase = 0.0;
  double dynamic_error = 0.0;
  double geometric_phase = 0.0;
  double geometric_error = 0.0;
  double residual = 0.0;  // wrap(dtheta - (dynamic + geometric)/J0), (-pi, pi]
  double residual_error = 0.0;
  bool pass = false;
  double tolerance = 0.0;
  Vec3 J0 = Vec3::Zero();
  double t_return = 0.0;
  double return_distance = 0.0;
  double raw_line_integral = 0.0;
  double winding_correction = 0.0;
  int winding = 0;
  double theta1_term = 0.0;
  double theta2_term = 0.0;
  double z2_start = 1.0;
  double z2_end = 1.0;
  double arc_length_start = 0.0;
  double arc_length_end = 0.0;
  bool point_loop = false;
  double max_energy_drift = 0.0;
  double max_momentum_drift = 0.0;
  double min_eigen_gap_ratio = 1.0;
  double min_frame_continuity = 1.0;
  std::vector<std::string> warnings;
};

// Full balance check at a shape return: measured rotation vs dynamic plus
// geometric phase, with diagnostics. Raises ZeroMomentum when J0 vanishes.
PhaseReport reconstruct(const OrientedTrajectory& otr, double t_star, const Vec3& J0,
                        const ReconstructOptions& opt = {});

struct HolonomyResult {
  double lift_angle = 0.0;       // rotation picked up by the horizontal lift
  double predicted_angle = 0.0;  // integral of (z1 - 1)/2 dtheta1 over the loop
  double residual = 0.0;         // wrap(lift - predicted), (-pi, pi]
  double max_abs_momentum = 0.0;
  double max_shape_error = 0.0;
};

// Compares the horizontal-lift holonomy of a closed planar shape loop against
// the chart-gauge prediction (the primitive chosen to vanish at z1 = 1).
HolonomyResult holonomy_check(const ShapeCurve& loop, const Configuration& q_start,
                              const Masses& m, const LiftOptions& opt = {});

// The predicted holonomy angle by itself (unwrapped, not reduced mod 2pi).
double predicted_holonomy(const ShapeCurve& loop);

}  // namespace shapephase
