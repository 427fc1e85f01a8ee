#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <optional>

#include "shapephase/connection.hpp"
#include "shapephase/dynamics.hpp"
#include "shapephase/numeric.hpp"
#include "shapephase/reconstruction.hpp"
#include "synthetic.hpp"

using namespace shapephase;
using shapephase::testing::lagrange_period;
using shapephase::testing::lagrange_state;
using shapephase::testing::VertexEllipseSpec;
using shapephase::testing::vertex_ellipse_loop;

namespace {

template <typename F>
std::optional<ErrorCode> raised_code(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

const Masses kM{1.3, 0.7, 2.1};

Configuration reference_config() {
  return center({Vec3(0.9, -0.2, 0.0), Vec3(-0.4, 1.1, 0.0), Vec3(0.1, -0.5, 0.0)},
                kM);
}

State rigid_state(const Configuration& q, const Vec3& omega) {
  State s;
  s.config = q;
  for (int a = 0; a < 3; ++a) s.velocity(a) = omega.cross(q[a]);
  return s;
}

}  // namespace

TEST_CASE("connection value recovers a rigid angular velocity") {
  const Masses m{1.0, 2.0, 3.0};
  const Configuration q = center(
      {Vec3(1.0, 0.0, 0.0), Vec3(0.0, 1.0, 0.0), Vec3(0.0, 0.0, 1.0)}, m);
  const Vec3 omega0(0.3, -1.1, 0.7);
  const State s = rigid_state(q, omega0);
  CHECK((connection_value(s, m) - omega0).norm() < 1e-12);

  const Vec3 J0(0.5, 0.2, -1.0);
  CHECK(std::abs(alpha_J0(s, m, J0) - J0.dot(omega0)) < 1e-12);
}

TEST_CASE("rotation rate about the momentum axis of a planar triangle") {
  const Configuration q = reference_config();
  const double I = polar_moment(q, kM);
  // The normal axis of a planar configuration carries inertia eigenvalue I,
  // so for momentum along +z the rate is exactly J0^2 / I.
  const double J0 = 1.5;
  CHECK(std::abs(omega_J0(q, kM, J0 * Vec3::UnitZ()) - J0 * J0 / I) < 1e-13);
  CHECK(omega_J0(q, kM, Vec3(0.4, -0.2, 0.9)) > 0.0);
}

TEST_CASE("rotation rate at a collinear configuration") {
  const Masses m{1.0, 1.0, 1.0};
  const Configuration line =
      center({Vec3(-1.0, 0.0, 0.0), Vec3(0.15, 0.0, 0.0), Vec3(0.85, 0.0, 0.0)}, m);
  const double I = polar_moment(line, m);
  // Momentum orthogonal to the line: the degenerate axis never enters.
  CHECK(std::abs(omega_J0(line, m, 2.0 * Vec3::UnitZ()) - 4.0 / I) < 1e-12);
  // Momentum along the line has no rotation rate at all.
  const auto code = raised_code([&] { omega_J0(line, m, Vec3::UnitX()); });
  REQUIRE(code.has_value());
  CHECK(*code == ErrorCode::UndefinedAtCollinear);
}

TEST_CASE("dynamic phase of the rigid equilateral rotation") {
  const Masses m{1.0, 1.0, 1.0};
  const State s0 = lagrange_state(1.0, 1.0, m);
  const double T = lagrange_period(1.0, m);
  const Trajectory tr = integrate(s0, T, m, PotentialSpec{}, IntegratorConfig{});
  const Vec3 J0 = angular_momentum(s0, m);
  CHECK(std::abs(J0.z() - std::sqrt(3.0)) < 1e-13);

  // omega_J0 = J0^2 / I0 = 3 throughout, so the phase is 3 T = 2 sqrt(3) pi.
  const QuadratureValue dyn = dynamic_phase(tr, J0, T);
  const double expected = 2.0 * std::sqrt(3.0) * kPi;
  CHECK(std::abs(dyn.value - expected) < 1e-9);
  CHECK(dyn.error < 1e-8);

  const OrientedTrajectory otr = orientation_lift(tr, Vec3::UnitZ());
  const QuadratureValue dyn2 = dynamic_phase(otr, J0);
  CHECK(std::abs(dyn2.value - expected) < 1e-9);
}

TEST_CASE("body frame of the reference triangle") {
  const Configuration q = reference_config();
  const BodyFrame bf = body_frame(q, kM, Vec3::UnitZ());
  CHECK(std::abs(bf.lambda1 - 0.56916885408902074) < 1e-12);
  CHECK(std::abs(bf.lambda2 - 1.6745872434719558) < 1e-12);
  CHECK(bf.lambda1 <= bf.lambda2);
  CHECK((bf.U3 - Vec3::UnitZ()).norm() < 1e-14);
  // Right-handed orthonormal triple.
  CHECK(std::abs(bf.U1.dot(bf.U2)) < 1e-13);
  CHECK(std::abs(bf.U1.cross(bf.U2).dot(bf.U3) - 1.0) < 1e-12);
  // U1 is an eigenvector of the inertia tensor with eigenvalue lambda1.
  const Mat3 T = inertia_tensor(q, kM);
  CHECK((T * bf.U1 - bf.lambda1 * bf.U1).norm() < 1e-12);
}

TEST_CASE("eigenframe track on a planar loop freezes the fiber coordinates") {
  VertexEllipseSpec spec;
  spec.J0 = 1.4;
  const OrientedTrajectory otr = vertex_ellipse_loop(spec, kM);
  const GaugeTrajectory gt = eigenframe_track(otr);

  CHECK(gt.samples().size() == otr.trajectory().samples().size());
  CHECK(std::abs(gt.momentum_magnitude() - 1.4) < 1e-12);
  CHECK_FALSE(gt.momentum_degenerate());
  CHECK(gt.min_continuity() > 0.9);

  double min_gap = 1.0;
  for (const auto& rs : gt.samples()) {
    CHECK(std::abs(rs.z2 - 1.0) < 1e-12);
    CHECK(std::abs(rs.theta2) < 1e-9);
    min_gap = std::min(min_gap, std::sqrt(std::max(0.0, 1.0 - rs.z1 * rs.z1)));
  }
  CHECK(std::abs(gt.min_gap_ratio() - min_gap) < 1e-6);
}

TEST_CASE("eigenframe degenerates at a shape-sphere pole") {
  // Equal masses, exact equilateral: the in-plane eigenvalues coincide.
  const Masses m{1.0, 1.0, 1.0};
  const State s0 = lagrange_state(1.0, 1.0, m);
  const Trajectory tr = integrate(s0, 0.4, m, PotentialSpec{}, IntegratorConfig{});
  const OrientedTrajectory otr = orientation_lift(tr, Vec3::UnitZ());
  const auto code = raised_code([&] { eigenframe_track(otr); });
  REQUIRE(code.has_value());
  CHECK(*code == ErrorCode::EigenframeDegenerate);
}

TEST_CASE("zero total momentum marks the fiber coordinates degenerate") {
  VertexEllipseSpec spec;
  spec.J0 = 0.0;
  const OrientedTrajectory otr = vertex_ellipse_loop(spec, kM);
  const GaugeTrajectory gt = eigenframe_track(otr);
  CHECK(gt.momentum_degenerate());
  for (const auto& rs : gt.samples()) {
    CHECK(rs.z2 == 1.0);
    CHECK(rs.theta2 == 0.0);
  }
}

TEST_CASE("latitude holonomy matches the chart prediction") {
  const Masses m{1.0, 1.0, 1.0};
  for (double z1 : {0.5, -0.4}) {
    const ShapeCurve loop = ShapeCurve::latitude(z1);
    CHECK(loop.closed());
    CHECK(std::abs(loop.winding() - 1.0) < 1e-15);
    CHECK(std::abs(predicted_holonomy(loop) - kPi * (z1 - 1.0)) < 1e-12);

    const Configuration q0 = section_configuration(z1, 0.0, m);
    const HolonomyResult hr = holonomy_check(loop, q0, m);
    CHECK(std::abs(hr.residual) < 1e-6);
    CHECK(hr.max_abs_momentum < 1e-6);
    CHECK(hr.max_shape_error < 1e-6);
  }
  // Multiple turns scale the unwrapped prediction linearly.
  CHECK(std::abs(predicted_holonomy(ShapeCurve::latitude(0.3, 3.0)) -
                 3.0 * kPi * (0.3 - 1.0)) < 1e-12);
}

TEST_CASE("one positive turn at height one half turns the triangle by -pi/2") {
  const Masses m{1.0, 1.0, 1.0};
  const HolonomyResult hr = holonomy_check(
      ShapeCurve::latitude(0.5), section_configuration(0.5, 0.0, m), m);
  CHECK(std::abs(wrap_pi(hr.lift_angle - (-0.5 * kPi))) < 1e-6);
}

TEST_CASE("polygon loop holonomy agrees with the gauge line integral") {
  const Masses m{1.3, 0.7, 2.1};
  const ShapeCurve poly = ShapeCurve::polygon(
      {{0.2, 0.3}, {0.55, 1.4}, {-0.1, 2.3}, {-0.45, 1.1}});
  CHECK(poly.closed());
  const Configuration q0 = section_configuration(0.2, 0.3, m);
  const HolonomyResult hr = holonomy_check(poly, q0, m);
  CHECK(std::abs(hr.residual) < 1e-6);
}

TEST_CASE("section configuration round trip and chart boundary") {
  const Masses m{1.3, 0.7, 2.1};
  for (double z1 : {0.7, 0.0, -0.6}) {
    for (double th : {0.0, 2.2, -1.3}) {
      const Configuration q = section_configuration(z1, th, m);
      CHECK(std::abs(polar_moment(q, m) - 1.0) < 1e-12);
      CHECK(std::abs(q.q1.z()) + std::abs(q.q2.z()) + std::abs(q.q3.z()) < 1e-14);
      const ShapePoint p = hopf_map({q, Vec3::UnitZ()}, m);
      CHECK(std::abs(p.z1 - z1) < 1e-12);
      CHECK(std::abs(wrap_pi(p.theta1 - th)) < 1e-12);
    }
  }
  const auto code = raised_code([&] { section_configuration(-1.0, 0.0, m); });
  REQUIRE(code.has_value());
  CHECK(*code == ErrorCode::PreconditionViolated);
}

TEST_CASE("planar rotation angle between rotated copies") {
  const Masses m{1.3, 0.7, 2.1};
  const Configuration q0 = section_configuration(0.35, 0.8, m);
  for (double phi : {0.7, -2.5, 2.9}) {
    const double c = std::cos(phi), s = std::sin(phi);
    Configuration q1;
    for (int a = 0; a < 3; ++a) {
      q1[a] = Vec3(c * q0[a].x() - s * q0[a].y(), s * q0[a].x() + c * q0[a].y(), 0.0);
    }
    CHECK(std::abs(wrap_pi(planar_rotation_angle(q0, q1, m) - phi)) < 1e-12);
  }
}

TEST_CASE("horizontal lift reports faithful quality diagnostics") {
  const Masses m{1.0, 1.0, 1.0};
  const ShapeCurve loop = ShapeCurve::latitude(0.4);
  const HorizontalLift lift =
      horizontal_lift(loop, section_configuration(0.4, 0.0, m), m);
  CHECK(lift.t.size() == lift.zeta.size());
  CHECK(lift.t.size() >= 2);
  CHECK(lift.max_abs_momentum < 1e-8);
  CHECK(lift.max_shape_error < 1e-8);
  const auto configs = lift.configurations();
  CHECK(configs.size() == lift.t.size());
  for (const auto& q : configs) {
    CHECK(std::abs(polar_moment(q, m) - 1.0) < 1e-7);
  }
}
