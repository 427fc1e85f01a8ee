#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <optional>

#include "shapephase/dynamics.hpp"
#include "shapephase/numeric.hpp"
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

double state_distance(const State& a, const State& b) {
  double d = 0.0;
  for (int k = 0; k < 3; ++k) {
    d = std::max(d, (a.config[k] - b.config[k]).norm());
    d = std::max(d, (a.velocity(k) - b.velocity(k)).norm());
  }
  return d;
}

Rotation z_rotation(double angle) {
  Rotation R;
  R << std::cos(angle), -std::sin(angle), 0.0, std::sin(angle), std::cos(angle),
      0.0, 0.0, 0.0, 1.0;
  return R;
}

}  // namespace

TEST_CASE("accelerations at the unit-point configuration") {
  const Masses m{1.0, 2.0, 3.0};
  const Configuration q = center(
      {Vec3(1.0, 0.0, 0.0), Vec3(0.0, 1.0, 0.0), Vec3(0.0, 0.0, 1.0)}, m);
  const auto a = accelerations(q, m, PotentialSpec{});
  // All pairwise distances are sqrt(2), so a_k = sum_b m_b (q_b - q_k)/(2 sqrt 2).
  const double f = 1.0 / (2.0 * std::sqrt(2.0));
  CHECK((a[0] - f * Vec3(-5.0, 2.0, 3.0)).norm() < 1e-14);
  CHECK((a[1] - f * Vec3(1.0, -4.0, 3.0)).norm() < 1e-14);
  CHECK((a[2] - f * Vec3(1.0, 2.0, -3.0)).norm() < 1e-14);
  CHECK((m.m1 * a[0] + m.m2 * a[1] + m.m3 * a[2]).norm() < 1e-15);
}

TEST_CASE("accelerations raise on a binary collision") {
  const Masses m{1.0, 1.0, 1.0};
  const Configuration q = center(
      {Vec3(0.2, 0.0, 0.0), Vec3(0.2, 0.0, 0.0), Vec3(-0.4, 0.0, 0.0)}, m);
  const auto code = raised_code([&] { accelerations(q, m, PotentialSpec{}); });
  REQUIRE(code.has_value());
  CHECK(*code == ErrorCode::BinaryCollision);
}

TEST_CASE("rigid equilateral rotation: closure, conservation, interpolation") {
  const Masses m{1.0, 1.0, 1.0};
  const State s0 = lagrange_state(1.0, 1.0, m);
  const double T = lagrange_period(1.0, m);
  CHECK(std::abs(T - 2.0 * kPi / std::sqrt(3.0)) < 1e-15);

  IntegratorConfig cfg;
  const Trajectory tr = integrate(s0, T, m, PotentialSpec{}, cfg);

  // One full period returns to the initial state.
  CHECK(state_distance(tr.samples().back().state, s0) < 1e-8);
  CHECK(tr.max_energy_drift() < 1e-10);
  CHECK(tr.max_momentum_drift() < 1e-10);
  CHECK(tr.within_drift_budgets());

  // The polar moment is constant and the energy matches the closed form.
  const double I0 = polar_moment(s0.config, m);
  CHECK(std::abs(I0 - 1.0) < 1e-14);
  CHECK(std::abs(tr.samples().front().E - (-1.5)) < 1e-13);
  for (const auto& smp : tr.samples()) {
    CHECK(std::abs(smp.I - I0) < 1e-9);
  }

  // Interpolated states match the analytic rotating solution between samples.
  const double omega = std::sqrt(3.0);
  for (double t : {0.123456, 0.5 * T + 0.00371, 0.9 * T}) {
    const State st = tr.state_at(t);
    const Rotation R = z_rotation(omega * t);
    for (int k = 0; k < 3; ++k) {
      CHECK((st.config[k] - R * s0.config[k]).norm() < 1e-9);
      const Vec3 v_exact = omega * Vec3::UnitZ().cross(R * s0.config[k]);
      CHECK((st.velocity(k) - v_exact).norm() < 1e-8);
    }
  }
}

TEST_CASE("time reversal retraces a generic bound motion") {
  const Masses m{1.0, 1.0, 1.0};
  State s0 = lagrange_state(1.0, 1.0, m);
  // Perturb off the relative equilibrium but stay bound.
  s0.v1 *= 0.9;
  s0.v2 *= 1.05;
  s0.v3 = -(m.m1 * s0.v1 + m.m2 * s0.v2) / m.m3;

  IntegratorConfig cfg;
  cfg.rel_tol = 1e-11;
  cfg.abs_tol = 1e-11;
  const double T = 0.8;
  const Trajectory fwd = integrate(s0, T, m, PotentialSpec{}, cfg);

  State flipped = fwd.samples().back().state;
  for (int k = 0; k < 3; ++k) flipped.velocity(k) = -flipped.velocity(k);
  const Trajectory back = integrate(flipped, T, m, PotentialSpec{}, cfg);

  State expected = s0;
  for (int k = 0; k < 3; ++k) expected.velocity(k) = -expected.velocity(k);
  CHECK(state_distance(back.samples().back().state, expected) < 1e-8);
}

TEST_CASE("gravitational scaling symmetry of the flow") {
  // q -> lam q, v -> v/sqrt(lam) maps solutions to solutions with
  // t -> lam^(3/2) t for the inverse-distance potential.
  const Masses m{1.0, 1.0, 1.0};
  State s0 = lagrange_state(1.0, 1.0, m);
  s0.v1 *= 0.92;
  s0.v2 *= 1.03;
  s0.v3 = -(m.m1 * s0.v1 + m.m2 * s0.v2) / m.m3;

  const double lam = 1.69;
  State s1;
  for (int k = 0; k < 3; ++k) {
    s1.config[k] = lam * s0.config[k];
    s1.velocity(k) = s0.velocity(k) / std::sqrt(lam);
  }

  IntegratorConfig cfg;
  cfg.rel_tol = 1e-11;
  cfg.abs_tol = 1e-11;
  const double T = 0.6;
  const double Ts = std::pow(lam, 1.5) * T;
  const Trajectory base = integrate(s0, T, m, PotentialSpec{}, cfg);
  const Trajectory scaled = integrate(s1, Ts, m, PotentialSpec{}, cfg);

  for (double f : {0.35, 1.0}) {
    const Configuration qa = base.configuration_at(f * T);
    const Configuration qb = scaled.configuration_at(f * Ts);
    for (int k = 0; k < 3; ++k) {
      CHECK((qb[k] - lam * qa[k]).norm() < 1e-7);
    }
  }
}

TEST_CASE("fixed-step method: symplectic drift stays bounded, samples on grid") {
  const Masses m{1.0, 1.0, 1.0};
  const State s0 = lagrange_state(1.0, 1.0, m);
  const double T = lagrange_period(1.0, m);

  IntegratorConfig cfg;
  cfg.method = IntegratorConfig::Method::Verlet;
  cfg.fixed_step = 2e-4;
  cfg.sample_spacing = 0.01;
  cfg.energy_drift_budget = 1e-5;
  cfg.momentum_drift_budget = 1e-9;
  const Trajectory tr = integrate(s0, T, m, PotentialSpec{}, cfg);

  CHECK(tr.max_energy_drift() < 1e-6);
  CHECK(tr.max_momentum_drift() < 1e-10);
  CHECK(state_distance(tr.samples().back().state, s0) < 1e-3);

  // Samples sit on a uniform grid rounded so that it divides the duration
  // evenly; the realized spacing stays within a grid cell of the request.
  const std::size_t n = tr.samples().size();
  REQUIRE(n >= 2);
  const double h = T / static_cast<double>(n - 1);
  CHECK(std::abs(h - cfg.sample_spacing) < cfg.sample_spacing * 0.01);
  CHECK(std::abs(tr.samples().back().t - T) < 1e-12);
  for (std::size_t k = 0; k < n; ++k) {
    CHECK(std::abs(tr.samples()[k].t - static_cast<double>(k) * h) < 1e-12);
  }
}

TEST_CASE("orientation lift stays continuous through near-collinear passages") {
  VertexEllipseSpec spec;
  spec.base = {Vec3(0.8, 0.0, 0.0), Vec3(-0.5, 0.0, 0.0), Vec3(-0.3, 0.0, 0.0)};
  spec.radius = 0.18;
  spec.samples = 3001;
  const OrientedTrajectory otr = vertex_ellipse_loop(spec, Masses{1.0, 1.0, 1.0});

  // The shape path crosses the collinear equator: z1 changes sign.
  double z1_min = 1.0, z1_max = -1.0;
  for (std::size_t k = 0; k < otr.trajectory().samples().size(); ++k) {
    const double z1 = otr.shape_sample(k).z1;
    z1_min = std::min(z1_min, z1);
    z1_max = std::max(z1_max, z1);
  }
  CHECK(z1_min < -0.05);
  CHECK(z1_max > 0.05);

  const OrientedTrajectory lifted =
      orientation_lift(otr.trajectory(), Vec3::UnitZ());
  for (const Vec3& n : lifted.normals()) {
    CHECK((n - Vec3::UnitZ()).norm() < 1e-9);
  }
}

TEST_CASE("orientation lift rejects collinear starts and collinear runs") {
  const Masses m{1.0, 1.0, 1.0};
  // Repulsive power-law keeps a line of bodies collinear without collisions.
  PotentialSpec pot;
  pot.kind = PotentialSpec::Kind::PowerLaw;
  pot.exponent = 2.0;
  State line;
  line.config = center(
      {Vec3(-1.0, 0.0, 0.0), Vec3(0.1, 0.0, 0.0), Vec3(0.9, 0.0, 0.0)}, m);
  line.v1 = Vec3(-0.1, 0.0, 0.0);
  line.v2 = Vec3(0.05, 0.0, 0.0);
  line.v3 = Vec3(0.05, 0.0, 0.0);

  IntegratorConfig cfg;
  cfg.energy_drift_budget = 1e-4;  // only the lift behavior matters here
  const Trajectory tr = integrate(line, 0.2, m, pot, cfg);
  const auto code = raised_code([&] { orientation_lift(tr, Vec3::UnitZ()); });
  REQUIRE(code.has_value());
  const bool rejected = *code == ErrorCode::PreconditionViolated ||
                        *code == ErrorCode::PersistentlyCollinear;
  CHECK(rejected);
}

TEST_CASE("shape returns of a periodic synthetic loop") {
  VertexEllipseSpec spec;
  spec.periods = 2.5;
  spec.samples = 2501;  // the grid hits t = 1 and t = 2 exactly
  const OrientedTrajectory otr = vertex_ellipse_loop(spec, Masses{1.0, 1.0, 1.0});

  const auto returns = shape_returns(otr, 1e-4);
  REQUIRE(!returns.empty());
  bool near_one = false, near_two = false;
  for (const auto& r : returns) {
    CHECK(r.distance <= 1e-4);
    if (std::abs(r.t - 1.0) < 1e-3) near_one = true;
    if (std::abs(r.t - 2.0) < 1e-3) near_two = true;
  }
  CHECK(near_one);
  CHECK(near_two);
}

TEST_CASE("no spurious returns before the loop closes") {
  VertexEllipseSpec spec;
  spec.periods = 0.6;  // stop well before the loop closes
  spec.samples = 1201;
  const OrientedTrajectory otr = vertex_ellipse_loop(spec, Masses{1.0, 1.0, 1.0});
  CHECK(shape_returns(otr, 1e-4).empty());
}

TEST_CASE("uniform resampling preserves the span and the interpolant") {
  const Masses m{1.0, 1.0, 1.0};
  const State s0 = lagrange_state(1.0, 1.0, m);
  const Trajectory tr = integrate(s0, 1.0, m, PotentialSpec{}, IntegratorConfig{});
  const Trajectory rs = tr.resampled(0.775);
  CHECK(rs.t0() == tr.t0());
  CHECK(std::abs(rs.t1() - 0.775) < 1e-12);
  CHECK(rs.samples().size() >= 9);
  for (double t : {0.1, 0.33, 0.775}) {
    CHECK(state_distance(rs.state_at(t), tr.state_at(t)) < 1e-9);
  }
}

TEST_CASE("drift budgets gate the conservation verdict") {
  const Masses m{1.0, 1.0, 1.0};
  const State s0 = lagrange_state(1.0, 1.0, m);
  IntegratorConfig cfg;
  cfg.momentum_drift_budget = 1e-18;  // stricter than any floating-point run
  const Trajectory tr = integrate(s0, 0.5, m, PotentialSpec{}, cfg);
  CHECK_FALSE(tr.within_drift_budgets());
}
