#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <optional>

#include "shapephase/numeric.hpp"
#include "shapephase/rigid.hpp"

using namespace shapephase;

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

double rotation_distance(const Rotation& A, const Rotation& B) {
  return (A - B).norm();
}

}  // namespace

TEST_CASE("exponential map: quarter turn about z") {
  const Rotation R = exp_rotation(Vec3(0.0, 0.0, 0.5 * kPi));
  Rotation expected;
  expected << 0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0;
  CHECK(rotation_distance(R, expected) < 1e-15);
  CHECK(is_rotation(R));
}

TEST_CASE("exponential map: tiny and zero inputs") {
  CHECK(rotation_distance(exp_rotation(Vec3::Zero()), Rotation::Identity()) == 0.0);
  const Rotation R = exp_rotation(Vec3(1e-14, -2e-14, 0.5e-14));
  CHECK(is_rotation(R));
  CHECK(rotation_distance(R, Rotation::Identity()) < 1e-13);
}

TEST_CASE("axis-angle round trip on fixed cases") {
  const Vec3 cases[] = {Vec3(0.3, -0.4, 1.2), Vec3(-2.0, 0.1, 0.1),
                        Vec3(0.0, 3.0, 0.0), Vec3(1e-3, 0.0, -1e-3)};
  for (const Vec3& v : cases) {
    const Rotation R = exp_rotation(v);
    const AxisAngle aa = axis_angle_of(R);
    CHECK(std::abs(aa.axis.norm() - 1.0) < 1e-12);
    CHECK(rotation_distance(exp_rotation(aa.angle * aa.axis), R) < 1e-10);
    CHECK(aa.angle >= 0.0);
    CHECK(aa.angle <= kPi);
  }
}

TEST_CASE("signed log about a fixed axis") {
  const Vec3 axis = Vec3(1.0, 2.0, -0.5).normalized();
  for (double theta : {0.3, -2.9, 3.1, -0.0001}) {
    const Rotation R = exp_rotation(theta * axis);
    CHECK(std::abs(log_about_axis(R, axis) - theta) < 1e-12);
  }
  // The identity gives zero regardless of the axis.
  CHECK(log_about_axis(Rotation::Identity(), Vec3::UnitZ()) == 0.0);
}

TEST_CASE("log about an axis the rotation does not fix") {
  const Rotation R = exp_rotation(Vec3(1.0, 0.0, 0.0));  // one radian about x
  const auto code = raised_code([&] { log_about_axis(R, Vec3::UnitZ()); });
  REQUIRE(code.has_value());
  CHECK(*code == ErrorCode::AxisNotFixed);
}

TEST_CASE("smallest rotation between unit vectors") {
  const Rotation R = rotation_between(Vec3::UnitX(), Vec3::UnitY());
  CHECK(rotation_distance(R, exp_rotation(Vec3(0.0, 0.0, 0.5 * kPi))) < 1e-14);

  const Vec3 a = Vec3(0.3, -0.7, 0.2).normalized();
  const Vec3 b = Vec3(-0.1, 0.5, 0.9).normalized();
  const Rotation Rab = rotation_between(a, b);
  CHECK((Rab * a - b).norm() < 1e-14);
  CHECK(is_rotation(Rab));
  // The axis is orthogonal to both vectors: a x b stays fixed.
  const Vec3 axis = a.cross(b).normalized();
  CHECK((Rab * axis - axis).norm() < 1e-13);

  CHECK(rotation_distance(rotation_between(a, a), Rotation::Identity()) < 1e-15);
}

TEST_CASE("antipodal input has no smallest rotation") {
  const Vec3 a = Vec3(0.6, -0.8, 0.0);
  const auto code = raised_code([&] { rotation_between(a, Vec3(-a)); });
  REQUIRE(code.has_value());
  CHECK(*code == ErrorCode::AntipodalInput);
}

TEST_CASE("similarity fit recovers an exact scaled rotation") {
  const Masses m{1.3, 0.7, 2.1};
  Configuration q0;
  q0.q1 = Vec3(0.9, -0.2, 0.1);
  q0.q2 = Vec3(-0.4, 1.1, -0.3);
  q0.q3 = Vec3(0.1, -0.5, 0.4);
  // Center the weighted configuration.
  Vec3 com = (m.m1 * q0.q1 + m.m2 * q0.q2 + m.m3 * q0.q3) / m.total();
  for (int a = 0; a < 3; ++a) q0[a] -= com;

  const double scale = 1.7;
  const Rotation R = exp_rotation(Vec3(0.4, -1.1, 0.8));
  Configuration q1;
  for (int a = 0; a < 3; ++a) q1[a] = scale * (R * q0[a]);

  const SimilarityFit fit = fit_similarity(q0, q1, m);
  CHECK(std::abs(fit.scale - scale) < 1e-12);
  CHECK(rotation_distance(fit.R, R) < 1e-12);
  CHECK(std::abs(fit.residual) < 1e-20);
}

TEST_CASE("similarity fit residual equals the direct misfit at the optimum") {
  const Masses m{1.0, 2.0, 3.0};
  Configuration q0, q1;
  q0.q1 = Vec3(5.0 / 6.0, -1.0 / 3.0, -0.5);
  q0.q2 = Vec3(-1.0 / 6.0, 2.0 / 3.0, -0.5);
  q0.q3 = Vec3(-1.0 / 6.0, -1.0 / 3.0, 0.5);
  q1.q1 = Vec3(1.1, 0.2, -0.4);
  q1.q2 = Vec3(-0.3, 0.6, -0.1);
  q1.q3 = Vec3(-0.5 / 3.0, -0.46666666666666667, 0.2);
  const SimilarityFit fit = fit_similarity(q0, q1, m);
  double direct = 0.0;
  for (int a = 0; a < 3; ++a) {
    direct += m[a] * (q1[a] - fit.scale * (fit.R * q0[a])).squaredNorm();
  }
  CHECK(std::abs(fit.residual - direct) < 1e-12 * (1.0 + direct));
  CHECK(fit.residual > 0.0);
  // Small perturbations of the fit never do better than the optimum.
  for (double d : {1e-3, -1e-3}) {
    const Rotation Rp = exp_rotation(Vec3(d, 0.0, 0.0)) * fit.R;
    double perturbed = 0.0;
    for (int a = 0; a < 3; ++a) {
      perturbed += m[a] * (q1[a] - fit.scale * (Rp * q0[a])).squaredNorm();
    }
    CHECK(perturbed >= fit.residual - 1e-14);
  }
}

TEST_CASE("similarity fit degenerates on collinear and vanishing input") {
  const Masses m{1.0, 1.0, 1.0};
  Configuration line;
  line.q1 = Vec3(-1.0, 0.0, 0.0);
  line.q2 = Vec3(0.0, 0.0, 0.0);
  line.q3 = Vec3(1.0, 0.0, 0.0);
  Configuration target;
  target.q1 = Vec3(-0.9, 0.1, 0.0);
  target.q2 = Vec3(0.0, -0.2, 0.0);
  target.q3 = Vec3(0.9, 0.1, 0.0);
  auto code = raised_code([&] { fit_similarity(line, target, m); });
  REQUIRE(code.has_value());
  CHECK(*code == ErrorCode::DegenerateFit);

  Configuration zero;  // all three bodies at the origin
  code = raised_code([&] { fit_similarity(zero, target, m); });
  REQUIRE(code.has_value());
  CHECK(*code == ErrorCode::TripleCollision);
}
