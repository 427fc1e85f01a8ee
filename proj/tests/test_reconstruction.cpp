#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <optional>
#include <vector>

#include "shapephase/reconstruction.hpp"
#include "shapephase/validate.hpp"
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

// Uniformly sampled gauge series in the product chart.
GaugeTrajectory analytic_gauge(
    int n, double J0, const std::function<void(double, ReducedSample&)>& fill) {
  std::vector<ReducedSample> samples(n);
  for (int k = 0; k < n; ++k) {
    ReducedSample& rs = samples[k];
    rs.t = static_cast<double>(k) / (n - 1);
    rs.z2 = 1.0;
    rs.theta2 = 0.0;
    fill(rs.t, rs);
    rs.gap_ratio = std::sqrt(std::max(0.0, 1.0 - rs.z1 * rs.z1));
    rs.continuity = 1.0;
  }
  return GaugeTrajectory(std::move(samples), Vec3(0.0, 0.0, J0),
                         Masses{1.0, 1.0, 1.0});
}

struct FlipGuard {
  ~FlipGuard() { debug::flip_beta_sign = false; }
};

}  // namespace

TEST_CASE("rotation measurement recovers a constructed turn about J0") {
  const Masses m{1.3, 0.7, 2.1};
  Configuration q0 = center(
      {Vec3(0.9, -0.2, 0.05), Vec3(-0.4, 1.1, -0.1), Vec3(0.1, -0.5, 0.02)}, m);
  const Vec3 n0 = (*principal_normal(q0, m));
  const Vec3 J0 = Vec3(0.4, -0.3, 1.6);
  const Vec3 j = J0.normalized();

  for (double theta : {0.5, -2.2, 3.0}) {
    const Rotation Rtot = exp_rotation(theta * j);  // pure turn about J0
    Configuration q1;
    const double lam = 1.3;
    for (int a = 0; a < 3; ++a) q1[a] = lam * (Rtot * q0[a]);
    const Vec3 n1 = Rtot * n0;
    const RotationMeasurement rm =
        measure_total_rotation({q0, n0}, {q1, n1}, m, J0);
    CHECK(std::abs(wrap_pi(rm.dtheta - theta)) < 1e-10);
    CHECK(rm.fit_residual < 1e-12);
  }
}

TEST_CASE("rotation measurement factors through tilted endpoint normals") {
  const Masses m{1.0, 1.0, 1.0};
  Configuration q0 = center(
      {Vec3(0.8, 0.1, 0.0), Vec3(-0.3, 0.9, 0.0), Vec3(-0.5, -1.0, 0.0)}, m);
  const Vec3 n0 = (*principal_normal(q0, m));
  const Vec3 J0(0.2, 0.1, 1.1);
  const Vec3 j = J0.normalized();
  const double theta = 1.234;
  // Build R = R1 * exp(theta j) * R0 with the two bracket rotations fixed by
  // the endpoint normals, then check the middle factor is recovered.
  const Vec3 n1_target = exp_rotation(Vec3(0.3, -0.2, 0.1)) * j;
  const Rotation R0 = rotation_between(n0, j);
  const Rotation R1 = rotation_between(j, n1_target);
  const Rotation Rtot = R1 * exp_rotation(theta * j) * R0;
  Configuration q1;
  for (int a = 0; a < 3; ++a) q1[a] = Rtot * q0[a];
  const RotationMeasurement rm =
      measure_total_rotation({q0, n0}, {q1, Rtot * n0}, m, J0);
  CHECK(std::abs(wrap_pi(rm.dtheta - theta)) < 1e-9);
}

TEST_CASE("rotation measurement rejects dissimilar endpoints and zero momentum") {
  const Masses m{1.0, 1.0, 1.0};
  Configuration q0 = center(
      {Vec3(0.8, 0.1, 0.0), Vec3(-0.3, 0.9, 0.0), Vec3(-0.5, -1.0, 0.0)}, m);
  Configuration q1 = q0;
  q1.q1 += Vec3(0.2, 0.0, 0.0);  // different shape now
  q1 = center({q1.q1, q1.q2, q1.q3}, m);
  auto code = raised_code([&] {
    measure_total_rotation({q0, Vec3::UnitZ()}, {q1, Vec3::UnitZ()}, m,
                           Vec3(0.0, 0.0, 1.0));
  });
  REQUIRE(code.has_value());
  CHECK(*code == ErrorCode::NotSimilar);

  code = raised_code([&] {
    measure_total_rotation({q0, Vec3::UnitZ()}, {q0, Vec3::UnitZ()}, m,
                           Vec3::Zero());
  });
  REQUIRE(code.has_value());
  CHECK(*code == ErrorCode::ZeroMomentum);

  code = raised_code([&] {
    measure_total_rotation({q0, Vec3::UnitZ()}, {q0, Vec3::UnitZ()}, m,
                           Vec3(0.0, 0.0, -1.0));
  });
  REQUIRE(code.has_value());
  CHECK(*code == ErrorCode::AntipodalNormal);
}

TEST_CASE("gauge line integral over a sampled latitude loop") {
  const double J0 = 1.5;
  const double z1 = 0.45;
  const auto gt = analytic_gauge(2001, J0, [&](double t, ReducedSample& rs) {
    rs.z1 = z1;
    rs.theta1 = 2.0 * kPi * t;
  });
  const ClosedReducedLoop loop = close_reduced_loop(gt);
  CHECK(loop.closure_distance < 1e-12);
  CHECK(loop.z2_start == 1.0);
  CHECK(loop.z2_end == 1.0);
  CHECK(loop.arc_length_start == 0.0);
  CHECK(loop.arc_length_end == 0.0);

  const GeometricPhase geo = geometric_phase_line(loop, J0);
  CHECK(geo.winding == 1);
  CHECK(std::abs(geo.theta1_term - J0 * kPi * z1) < 1e-9);
  CHECK(std::abs(geo.theta2_term) < 1e-12);
  CHECK(std::abs(geo.winding_correction - (-kPi * J0)) < 1e-12);
  CHECK(std::abs(geo.value - J0 * kPi * (z1 - 1.0)) < 1e-9);
}

TEST_CASE("gauge line integral flips with the traversal direction") {
  const double J0 = 2.0;
  const double z1 = -0.3;
  const auto gt = analytic_gauge(2001, J0, [&](double t, ReducedSample& rs) {
    rs.z1 = z1;
    rs.theta1 = -2.0 * kPi * t;  // one negative turn
  });
  const GeometricPhase geo = geometric_phase_line(close_reduced_loop(gt), J0);
  CHECK(geo.winding == -1);
  CHECK(std::abs(geo.value - (-J0 * kPi * (z1 - 1.0))) < 1e-9);
}

TEST_CASE("closing arcs appear when the fiber height ends away from the pole") {
  const double J0 = 1.8;
  const auto gt = analytic_gauge(3001, J0, [&](double t, ReducedSample& rs) {
    rs.z1 = 0.4;
    rs.theta1 = 2.0 * kPi * t;
    rs.z2 = 1.0 - 0.3 * t;   // drifts off the fiber pole
    rs.theta2 = 0.9 * t;
  });
  const ClosedReducedLoop loop = close_reduced_loop(gt);
  CHECK(loop.z2_start == 1.0);
  CHECK(std::abs(loop.z2_end - 0.7) < 1e-12);
  CHECK(loop.arc_length_start == 0.0);
  CHECK(std::abs(loop.arc_length_end - J0 * std::acos(0.7)) < 1e-12);
}

TEST_CASE("a loop that does not close in shape is rejected") {
  const auto gt = analytic_gauge(501, 1.0, [&](double t, ReducedSample& rs) {
    rs.z1 = 0.1 + 0.5 * t;  // drifts, never returns
    rs.theta1 = 2.0 * kPi * t;
  });
  const auto code = raised_code([&] { close_reduced_loop(gt, 1e-4); });
  REQUIRE(code.has_value());
  CHECK(*code == ErrorCode::ShapeNotClosed);
}

TEST_CASE("surface and boundary routes agree on hand-integrable patches") {
  // z1 linear in u, theta1 linear in v: the two-form reduces to a constant,
  // integral J0 * b * c / 2.
  {
    const double J0 = 1.7, a = 0.1, b = 0.35, c = 1.9;
    const ChartPatch patch = [&](double u, double v) {
      ChartPoint p;
      p.z1 = a + b * u;
      p.theta1 = c * v;
      return p;
    };
    const QuadratureValue surf = omega_surface_quadrature(patch, J0);
    const double expected = 0.5 * J0 * b * c;
    CHECK(std::abs(surf.value - expected) < 1e-9);

    const ChartPath path = [&](double t) {
      if (t < 0.25) return patch(4.0 * t, 0.0);
      if (t < 0.5) return patch(1.0, 4.0 * (t - 0.25));
      if (t < 0.75) return patch(1.0 - 4.0 * (t - 0.5), 1.0);
      return patch(0.0, 1.0 - 4.0 * (t - 0.75));
    };
    const QuadratureValue line = beta_line_integral(path, J0, {0.25, 0.5, 0.75});
    CHECK(std::abs(line.value - expected) < 1e-9);
  }
  // z2 linear in u, theta2 linear in v: integral J0 * f * g.
  {
    const double J0 = 2.0, e = 0.5, f = 0.3, g = 1.1;
    const ChartPatch patch = [&](double u, double v) {
      ChartPoint p;
      p.z1 = 0.2;
      p.theta1 = 0.0;
      p.z2 = e + f * u;
      p.theta2 = g * v;
      return p;
    };
    const QuadratureValue surf = omega_surface_quadrature(patch, J0);
    CHECK(std::abs(surf.value - J0 * f * g) < 1e-9);
    const ChartPath path = [&](double t) {
      if (t < 0.25) return patch(4.0 * t, 0.0);
      if (t < 0.5) return patch(1.0, 4.0 * (t - 0.25));
      if (t < 0.75) return patch(1.0 - 4.0 * (t - 0.5), 1.0);
      return patch(0.0, 1.0 - 4.0 * (t - 0.75));
    };
    const QuadratureValue line = beta_line_integral(path, J0, {0.25, 0.5, 0.75});
    CHECK(std::abs(line.value - J0 * f * g) < 1e-9);
  }
}

TEST_CASE("patches that leave the chart are rejected") {
  const ChartPatch bad = [](double u, double) {
    ChartPoint p;
    p.z1 = 0.5 + 0.6 * u;  // crosses the z1 = 1 pole
    p.theta1 = 1.0;
    return p;
  };
  const auto code = raised_code([&] { omega_surface_quadrature(bad, 1.0); });
  REQUIRE(code.has_value());
  CHECK(*code == ErrorCode::ChartViolation);
}

TEST_CASE("phase balance on an independently constructed planar loop") {
  VertexEllipseSpec spec;
  spec.J0 = 1.3;
  spec.samples = 2401;
  const OrientedTrajectory otr = vertex_ellipse_loop(spec, Masses{1.0, 1.0, 1.0});

  ReconstructOptions opt;
  opt.tolerance = 1e-5;
  opt.shape_closure_tol = 1e-6;
  opt.point_loop_tol = 1e-9;
  const PhaseReport rep = reconstruct(otr, 1.0, Vec3(0.0, 0.0, spec.J0), opt);

  CHECK(rep.pass);
  CHECK(std::abs(rep.residual) < 1e-5);
  CHECK_FALSE(rep.point_loop);
  CHECK(rep.return_distance < 1e-9);
  CHECK(rep.max_momentum_drift < 1e-12);
  CHECK(std::abs(rep.theta2_term) < 1e-12);  // planar: no fiber contribution
  // The reported rotation matches the balance identity by construction.
  const double balance =
      wrap_pi(rep.dtheta - (rep.dynamic_phase + rep.geometric_phase) / spec.J0);
  CHECK(std::abs(balance - rep.residual) < 1e-15);
}

TEST_CASE("phase balance on the library's spatial synthetic loop") {
  SpatialLoopSpec spec;
  spec.base.z1_center = 0.62;
  spec.base.z1_amplitude = 0.15;
  spec.base.samples = 3001;
  spec.J0 = Vec3(0.3, -0.05, 1.8);
  const OrientedTrajectory otr = synthetic_spatial_loop(spec, Masses{1.0, 1.0, 1.0});

  ReconstructOptions opt;
  opt.tolerance = 1e-4;
  opt.shape_closure_tol = 1e-6;
  const PhaseReport rep = reconstruct(otr, spec.base.duration, spec.J0, opt);
  CHECK(rep.pass);
  CHECK(std::abs(rep.residual) < 1e-4);
  // Genuinely spatial: the fiber term and the closing arcs participate.
  CHECK(std::abs(rep.theta2_term) > 1e-6);
  CHECK(std::abs(rep.z2_end - 1.0) > 1e-6);
}

TEST_CASE("rigid rotation reconstructs as a point loop with zero geometric phase") {
  const Masses m{1.0, 1.0, 1.0};
  const State s0 = lagrange_state(1.0, 1.0, m);
  const double omega = std::sqrt(3.0);
  const double theta = 0.5;
  const Trajectory tr =
      integrate(s0, theta / omega, m, PotentialSpec{}, IntegratorConfig{});
  const OrientedTrajectory otr = orientation_lift(tr, Vec3::UnitZ());
  const Vec3 J0 = angular_momentum(s0, m);

  const PhaseReport rep = reconstruct(otr, theta / omega, J0);
  CHECK(rep.point_loop);
  CHECK(rep.geometric_phase == 0.0);
  CHECK(std::abs(rep.dtheta - theta) < 1e-9);
  CHECK(std::abs(rep.dynamic_phase / J0.norm() - theta) < 1e-9);
  CHECK(std::abs(rep.residual) < 1e-8);
  CHECK(rep.pass);
}

TEST_CASE("reconstruction refuses vanishing momentum") {
  VertexEllipseSpec spec;
  spec.J0 = 0.0;
  const OrientedTrajectory otr = vertex_ellipse_loop(spec, Masses{1.0, 1.0, 1.0});
  const auto code = raised_code([&] { reconstruct(otr, 1.0, Vec3::Zero()); });
  REQUIRE(code.has_value());
  CHECK(*code == ErrorCode::ZeroMomentum);
}

TEST_CASE("the sign canary breaks the balance as designed") {
  FlipGuard guard;
  VertexEllipseSpec spec;
  spec.J0 = 1.3;
  const OrientedTrajectory otr = vertex_ellipse_loop(spec, Masses{1.0, 1.0, 1.0});

  ReconstructOptions opt;
  opt.shape_closure_tol = 1e-6;
  const PhaseReport good = reconstruct(otr, 1.0, Vec3(0.0, 0.0, spec.J0), opt);
  debug::flip_beta_sign = true;
  const PhaseReport bad = reconstruct(otr, 1.0, Vec3(0.0, 0.0, spec.J0), opt);
  debug::flip_beta_sign = false;

  CHECK(std::abs(good.residual) < 1e-5);
  CHECK(std::abs(bad.residual) > 1e-2);
  CHECK_FALSE(bad.pass);
}
