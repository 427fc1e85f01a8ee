#include "shapephase/validate.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <limits>
#include <sstream>
#include <utility>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/numeric/odeint.hpp>

#include "shapephase/connection.hpp"
#include "shapephase/error.hpp"
#include "shapephase/numeric.hpp"
#include "shapephase/reconstruction.hpp"
#include "shapephase/rigid.hpp"
#include "shapephase/shape.hpp"
#include "shapephase/triangle.hpp"

namespace shapephase {

namespace {

using Cplx = std::complex<double>;
constexpr Cplx kI{0.0, 1.0};

struct ChartEval {
  double z1, theta1, dz1, dtheta1;  // d/dt
};

ChartEval chart_eval(const PlanarLoopSpec& s, double t) {
  const double T = s.duration;
  const double w = 2.0 * kPi / T;
  const double ph = w * t;
  ChartEval e;
  e.z1 = s.z1_center + s.z1_amplitude * std::sin(ph + s.phase1);
  e.dz1 = s.z1_amplitude * w * std::cos(ph + s.phase1);
  e.theta1 = s.theta1_start + 2.0 * kPi * s.winding * (t / T) +
             s.theta1_wobble * std::sin(ph + s.phase2);
  e.dtheta1 = 2.0 * kPi * s.winding / T + s.theta1_wobble * w * std::cos(ph + s.phase2);
  return e;
}

struct SectionEval {
  Cplx zp1, zp2, dzp1, dzp2;  // normalized planar Jacobi pair and d/dt
};

// Reference configuration over the chart point: unit polar moment, +z normal.
SectionEval section_eval(const ChartEval& c) {
  const double u = std::sqrt(0.5 * (1.0 + c.z1));
  const double rho = 0.5 * std::sqrt(std::max(1.0 - c.z1 * c.z1, 1e-14));
  const double du = c.dz1 / (4.0 * u);
  const double drho = -c.z1 * c.dz1 / (4.0 * rho);
  const Cplx eit = std::exp(kI * c.theta1);
  const Cplx v = (rho / u) * eit;
  const Cplx dv = ((drho * u - rho * du) / (u * u)) * eit + kI * c.dtheta1 * v;
  const double r2 = std::sqrt(0.5);
  SectionEval s;
  s.zp1 = r2 * (u + v);
  s.zp2 = kI * r2 * (u - v);
  s.dzp1 = r2 * (du + dv);
  s.dzp2 = kI * r2 * (du - dv);
  return s;
}

double relative_momentum(const SectionEval& s) {
  return (std::conj(s.zp1) * s.dzp1 + std::conj(s.zp2) * s.dzp2).imag();
}

JacobiVectors planar_jacobi(const Cplx& z1c, const Cplx& z2c, const Masses& m) {
  JacobiVectors jv;
  jv.mu1 = 1.0 / (1.0 / m.m1 + 1.0 / m.m3);
  jv.mu2 = 1.0 / (1.0 / (m.m1 + m.m3) + 1.0 / m.m2);
  jv.zeta1 = Vec3(z1c.real(), z1c.imag(), 0.0);
  jv.zeta2 = Vec3(z2c.real(), z2c.imag(), 0.0);
  return jv;
}

PotentialSpec inert_potential() {
  PotentialSpec pot;
  pot.kind = PotentialSpec::Kind::PowerLaw;
  pot.exponent = 0.0;  // constant potential: pure kinematics
  return pot;
}

IntegratorConfig synthetic_config(double h) {
  IntegratorConfig cfg;
  cfg.sample_spacing = h;
  cfg.energy_drift_budget = 1e300;  // no potential shapes these motions
  cfg.momentum_drift_budget = 1e-8;
  return cfg;
}

}  // namespace

OrientedTrajectory synthetic_planar_loop(const PlanarLoopSpec& spec, const Masses& m) {
  if (std::abs(spec.z1_center) + std::abs(spec.z1_amplitude) > 0.9) {
    raise(ErrorCode::PreconditionViolated, "synthetic planar loop: z1 range too wide");
  }
  if (spec.samples < 33 || spec.duration <= 0.0) {
    raise(ErrorCode::PreconditionViolated, "synthetic planar loop: bad sampling");
  }
  const int n = spec.samples;
  const double T = spec.duration;
  const double h = T / (n - 1);

  const auto psidot = [&](double t) {
    return spec.J0 - relative_momentum(section_eval(chart_eval(spec, t)));
  };

  const PotentialSpec pot = inert_potential();
  std::vector<TrajectorySample> samples;
  samples.reserve(n);
  double psi = 0.0;
  for (int k = 0; k < n; ++k) {
    const double t = (k == n - 1) ? T : k * h;
    const ChartEval ce = chart_eval(spec, t);
    const SectionEval se = section_eval(ce);
    const double pd = spec.J0 - relative_momentum(se);
    const Cplx eip = std::exp(kI * psi);
    const Cplx zeta1 = eip * se.zp1;
    const Cplx zeta2 = eip * se.zp2;
    const Cplx dzeta1 = eip * (kI * pd * se.zp1 + se.dzp1);
    const Cplx dzeta2 = eip * (kI * pd * se.zp2 + se.dzp2);

    const Configuration q = configuration_from_jacobi(planar_jacobi(zeta1, zeta2, m), m);
    const Configuration dv = configuration_from_jacobi(planar_jacobi(dzeta1, dzeta2, m), m);
    State s;
    s.config = q;
    s.v1 = dv.q1;
    s.v2 = dv.q2;
    s.v3 = dv.q3;
    samples.push_back(sample_state(t, s, m, pot));

    if (k + 1 < n) {
      const double t1 = (k + 1 == n - 1) ? T : (k + 1) * h;
      const double hk = t1 - t;
      psi += hk / 6.0 * (psidot(t) + 4.0 * psidot(t + 0.5 * hk) + psidot(t1));
    }
  }

  Trajectory tr(std::move(samples), m, pot, synthetic_config(h));
  std::vector<Vec3> normals(n, Vec3::UnitZ());
  return OrientedTrajectory(std::move(tr), std::move(normals));
}

OrientedTrajectory synthetic_spatial_loop(const SpatialLoopSpec& spec, const Masses& m) {
  const PlanarLoopSpec& b = spec.base;
  if (b.z1_center - std::abs(b.z1_amplitude) < 0.2 ||
      b.z1_center + std::abs(b.z1_amplitude) > 0.92) {
    raise(ErrorCode::PreconditionViolated,
          "synthetic spatial loop: keep z1 inside [0.2, 0.92]");
  }
  if (b.samples < 33 || b.duration <= 0.0) {
    raise(ErrorCode::PreconditionViolated, "synthetic spatial loop: bad sampling");
  }
  const int n = b.samples;
  const double T = b.duration;
  const double h = T / (n - 1);

  struct BodyPath {
    Configuration p;
    Configuration pd;  // d/dt of the positions, stored in the q fields
  };
  const auto body_path = [&](double t) {
    const SectionEval se = section_eval(chart_eval(b, t));
    BodyPath bp;
    bp.p = configuration_from_jacobi(planar_jacobi(se.zp1, se.zp2, m), m);
    bp.pd = configuration_from_jacobi(planar_jacobi(se.dzp1, se.dzp2, m), m);
    return bp;
  };
  const auto body_rate = [&](const Rotation& R, const BodyPath& bp) -> Vec3 {
    State rel;
    rel.config = bp.p;
    rel.v1 = bp.pd.q1;
    rel.v2 = bp.pd.q2;
    rel.v3 = bp.pd.q3;
    const Vec3 jrel = angular_momentum(rel, m);
    const Mat3 Ib = inertia_tensor(bp.p, m);
    return Ib.ldlt().solve(R.transpose() * spec.J0 - jrel);
  };

  using Quat = std::array<double, 4>;  // (w, x, y, z)
  const auto rhs = [&](const Quat& y, Quat& dydt, double t) {
    Eigen::Quaterniond Q(y[0], y[1], y[2], y[3]);
    Q.normalize();
    const BodyPath bp = body_path(t);
    const Vec3 wb = body_rate(Q.toRotationMatrix(), bp);
    const Eigen::Quaterniond dQ = Q * Eigen::Quaterniond(0.0, wb.x(), wb.y(), wb.z());
    dydt = {0.5 * dQ.w(), 0.5 * dQ.x(), 0.5 * dQ.y(), 0.5 * dQ.z()};
  };

  namespace ode = boost::numeric::odeint;
  auto stepper = ode::make_controlled(1e-12, 1e-12, ode::runge_kutta_dopri5<Quat>());

  const PotentialSpec pot = inert_potential();
  std::vector<TrajectorySample> samples;
  std::vector<Vec3> normals;
  samples.reserve(n);
  normals.reserve(n);

  const auto emit = [&](double t, const Quat& y) {
    Eigen::Quaterniond Q(y[0], y[1], y[2], y[3]);
    Q.normalize();
    const Rotation R = Q.toRotationMatrix();
    const BodyPath bp = body_path(t);
    const Vec3 wb = body_rate(R, bp);
    State s;
    for (int a = 0; a < 3; ++a) {
      s.config[a] = R * bp.p[a];
      s.velocity(a) = R * (wb.cross(bp.p[a]) + bp.pd[a]);
    }
    samples.push_back(sample_state(t, s, m, pot));
    normals.push_back(R * Vec3::UnitZ());
  };

  Quat y{1.0, 0.0, 0.0, 0.0};
  double t = 0.0;
  double dt = 0.25 * h;
  emit(0.0, y);
  for (int k = 1; k < n; ++k) {
    const double t_target = (k == n - 1) ? T : k * h;
    int rejections = 0;
    while (t < t_target - 1e-13 * T) {
      double dtc = std::min(dt, t_target - t);
      const auto res = stepper.try_step(rhs, y, t, dtc);
      if (res == ode::success) {
        dt = dtc;
      } else if (++rejections > 200) {
        raise(ErrorCode::StepFailure, "synthetic spatial loop: step control stalled");
      }
    }
    emit(t_target, y);
  }

  Trajectory tr(std::move(samples), m, pot, synthetic_config(h));
  return OrientedTrajectory(std::move(tr), std::move(normals));
}

// ---------------------------------------------------------------------------
// Property suite
// ---------------------------------------------------------------------------

namespace {

using TrialFn = std::function<double(Rng&)>;

PropertyResult run_property(const std::string& name, int trials, double tol,
                            std::uint64_t seed, const TrialFn& fn) {
  PropertyResult r;
  r.name = name;
  r.trials = trials;
  r.tolerance = tol;
  Rng rng(seed);
  for (int i = 0; i < trials; ++i) {
    double res;
    try {
      res = fn(rng);
    } catch (const Error&) {
      res = std::numeric_limits<double>::infinity();
    }
    if (!(res <= tol)) ++r.failures;
    if (std::isnan(res)) res = std::numeric_limits<double>::infinity();
    r.worst = std::max(r.worst, res);
  }
  return r;
}

Masses random_masses(Rng& rng) {
  return Masses{rng.uniform(0.4, 2.0), rng.uniform(0.4, 2.0), rng.uniform(0.4, 2.0)};
}

Configuration random_configuration(Rng& rng, const Masses& m, bool planar = false) {
  for (int attempt = 0; attempt < 256; ++attempt) {
    std::array<Vec3, 3> raw;
    for (auto& v : raw) {
      v = rng.vec3(1.0);
      if (planar) v.z() = 0.0;
    }
    Configuration q = center(raw, m);
    if (polar_moment(q, m) < 0.05) continue;
    if (collinearity_measure(q, m) < 1e-3) continue;
    return q;
  }
  raise(ErrorCode::PreconditionViolated, "random configuration sampling failed");
}

Configuration rotated(const Rotation& R, const Configuration& q) {
  Configuration out;
  for (int a = 0; a < 3; ++a) out[a] = R * q[a];
  return out;
}

State rigid_state(const Configuration& q, const Vec3& omega) {
  State s;
  s.config = q;
  for (int a = 0; a < 3; ++a) s.velocity(a) = omega.cross(q[a]);
  return s;
}

PlanarLoopSpec random_planar_spec(Rng& rng) {
  PlanarLoopSpec spec;
  spec.z1_center = rng.uniform(-0.25, 0.3);
  spec.z1_amplitude = rng.uniform(0.25, 0.42);
  spec.theta1_start = rng.uniform(0.0, 2.0 * kPi);
  spec.theta1_wobble = rng.uniform(0.0, 0.45);
  const int windings[] = {1, -1, 2, 3, 1};
  spec.winding = windings[rng.raw() % 5];
  spec.phase2 = rng.uniform(0.0, 2.0 * kPi);
  spec.J0 = rng.uniform(0.8, 2.2);
  spec.samples = 2401;
  // keep the loop start (and end) clear of collinear shapes
  for (int i = 0; i < 64; ++i) {
    spec.phase1 = rng.uniform(0.0, 2.0 * kPi);
    if (std::abs(spec.z1_center + spec.z1_amplitude * std::sin(spec.phase1)) > 0.08) break;
  }
  return spec;
}

double trial_rotation_roundtrip(Rng& rng) {
  const Vec3 u = rng.unit_vec3();
  const double a = rng.uniform(-3.0, 3.0);
  const Rotation R = exp_rotation(a * u);
  return std::abs(wrap_pi(log_about_axis(R, u) - a));
}

double trial_similarity_recovery(Rng& rng) {
  const Masses m = random_masses(rng);
  const Configuration q0 = random_configuration(rng, m);
  const Rotation R = exp_rotation(rng.vec3(1.2));
  const double lam = rng.uniform(0.5, 2.0);
  Configuration q1;
  for (int a = 0; a < 3; ++a) q1[a] = lam * (R * q0[a]);
  const SimilarityFit fit = fit_similarity(q0, q1, m);
  const double I0 = polar_moment(q0, m);
  const double r1 = std::abs(fit.scale - lam) / lam;
  const double r2 = (fit.R - R).norm();
  const double r3 = std::sqrt(std::max(fit.residual, 0.0) / (lam * lam * I0));
  return std::max({r1, r2, r3});
}

double trial_inertia_quadratic(Rng& rng) {
  const Masses m = random_masses(rng);
  const Configuration q = random_configuration(rng, m);
  const Vec3 w = rng.vec3(2.0);
  const double lhs = w.dot(inertia_tensor(q, m) * w);
  double rhs = 0.0;
  for (int a = 0; a < 3; ++a) rhs += m[a] * (w.cross(q[a])).squaredNorm();
  return std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs));
}

double trial_coordinate_norms(Rng& rng) {
  const Masses m = random_masses(rng);
  const Configuration q = random_configuration(rng, m);
  const JacobiVectors jv = jacobi(q, m);
  const double I = polar_moment(q, m);
  const double r1 =
      std::abs(jv.zeta1.squaredNorm() + jv.zeta2.squaredNorm() - I) / I;
  State s;
  s.config = q;
  s.v1 = rng.vec3(1.0);
  s.v2 = rng.vec3(1.0);
  s.v3 = rng.vec3(1.0);
  // The relative coordinates drop the center-of-mass motion, so the
  // kinetic-norm identity is stated in the zero-momentum frame.
  const Vec3 vcm =
      (m[0] * s.v1 + m[1] * s.v2 + m[2] * s.v3) / (m[0] + m[1] + m[2]);
  s.v1 -= vcm;
  s.v2 -= vcm;
  s.v3 -= vcm;
  const JacobiVectors jw = jacobi_velocity(s, m);
  double k2 = 0.0;
  for (int a = 0; a < 3; ++a) k2 += m[a] * s.velocity(a).squaredNorm();
  const double r2 = std::abs(k2 - jw.zeta1.squaredNorm() - jw.zeta2.squaredNorm()) /
                    std::max(1.0, k2);
  return std::max(r1, r2);
}

double trial_area_height(Rng& rng) {
  const Masses m = random_masses(rng);
  const Configuration q = random_configuration(rng, m);
  const Vec3 n = *principal_normal(q, m);
  const ShapePoint sp = hopf_map({q, n}, m);
  const double delta = oriented_area({q, n});
  const double I = polar_moment(q, m);
  const double pred = 4.0 * std::sqrt(m.m1 * m.m2 * m.m3 / m.total()) * delta / I;
  return std::abs(sp.z1 - pred);
}

double trial_shape_invariance(Rng& rng) {
  const Masses m = random_masses(rng);
  const Configuration q = random_configuration(rng, m);
  const Vec3 n = *principal_normal(q, m);
  const Rotation R = exp_rotation(rng.vec3(1.2));
  const double lam = rng.uniform(0.4, 2.5);
  Configuration q2;
  for (int a = 0; a < 3; ++a) q2[a] = lam * (R * q[a]);
  const ShapePoint s0 = hopf_map({q, n}, m);
  const ShapePoint s1 = hopf_map({q2, Vec3(R * n)}, m);
  return (s1.w - s0.w).norm();
}

double trial_orientation_flip(Rng& rng) {
  const Masses m = random_masses(rng);
  const Configuration q = random_configuration(rng, m);
  const Vec3 n = *principal_normal(q, m);
  const ShapePoint s0 = hopf_map({q, n}, m);
  const ShapePoint s1 = hopf_map({q, Vec3(-n)}, m);
  return std::abs(s1.w(2) + s0.w(2)) + std::abs(s1.w(0) - s0.w(0)) +
         std::abs(s1.w(1) - s0.w(1));
}

double trial_horizontal_speed(Rng& rng) {
  const Masses m = random_masses(rng);
  Configuration q = random_configuration(rng, m, /*planar=*/true);
  const double scale = std::sqrt(polar_moment(q, m));
  for (int a = 0; a < 3; ++a) q[a] /= scale;
  State s;
  s.config = q;
  for (int a = 0; a < 3; ++a) {
    Vec3 v = rng.vec3(1.0);
    v.z() = 0.0;
    s.velocity(a) = v;
  }
  // strip center-of-mass drift, dilation, and rotation; I = 1 afterwards
  Vec3 psum = Vec3::Zero();
  for (int a = 0; a < 3; ++a) psum += m[a] * s.velocity(a);
  for (int a = 0; a < 3; ++a) s.velocity(a) -= psum / m.total();
  double idot = 0.0;
  for (int a = 0; a < 3; ++a) idot += 2.0 * m[a] * q[a].dot(s.velocity(a));
  for (int a = 0; a < 3; ++a) s.velocity(a) -= 0.5 * idot * q[a];
  const Vec3 J = angular_momentum(s, m);
  const Vec3 omega(0.0, 0.0, J.z());
  for (int a = 0; a < 3; ++a) s.velocity(a) -= omega.cross(q[a]);
  double k2 = 0.0;
  for (int a = 0; a < 3; ++a) k2 += m[a] * s.velocity(a).squaredNorm();
  if (k2 < 1e-12) return 0.0;
  const double sp = std::sqrt(k2);
  for (int a = 0; a < 3; ++a) s.velocity(a) /= sp;
  const auto [ambient, shape] = submersion_speed_check(s, m);
  return std::abs(ambient - shape);
}

double trial_angular_velocity_recovery(Rng& rng) {
  const Masses m = random_masses(rng);
  const Configuration q = random_configuration(rng, m);
  Vec3 w0 = rng.vec3(1.5);
  if (w0.norm() < 0.1) w0 = 0.5 * rng.unit_vec3();
  const Vec3 rec = connection_value(rigid_state(q, w0), m);
  return (rec - w0).norm() / w0.norm();
}

double trial_connection_scaling(Rng& rng) {
  const Masses m = random_masses(rng);
  const Configuration q = random_configuration(rng, m);
  const Vec3 J0 = rng.vec3(2.0);
  State s;
  s.config = q;
  s.v1 = rng.vec3(1.0);
  s.v2 = rng.vec3(1.0);
  s.v3 = rng.vec3(1.0);
  const double a0 = alpha_J0(s, m, J0);
  const double lam = rng.uniform(0.3, 3.0);
  State s2;
  for (int a = 0; a < 3; ++a) {
    s2.config[a] = lam * s.config[a];
    s2.velocity(a) = lam * s.velocity(a);
  }
  const double a1 = alpha_J0(s2, m, J0);
  const double r1 = std::abs(a1 - a0) / (1.0 + std::abs(a0));
  const double c = rng.uniform(-2.0, 2.0);
  State sd;
  sd.config = q;
  for (int a = 0; a < 3; ++a) sd.velocity(a) = c * q[a];
  const double r2 = std::abs(alpha_J0(sd, m, J0)) / (1.0 + J0.norm());
  return std::max(r1, r2);
}

double trial_connection_arcs(Rng& rng) {
  using boost::math::quadrature::gauss_kronrod;
  const Masses m = random_masses(rng);
  const Configuration q0 = random_configuration(rng, m);
  Vec3 J0 = rng.vec3(2.0);
  if (J0.norm() < 0.2) J0 = rng.unit_vec3();
  const Vec3 jhat = J0.normalized();
  const Vec3 u =
      exp_rotation(rng.uniform(0.0, 2.0 * kPi) * jhat) * jhat.unitOrthogonal();
  const double phi = rng.uniform(0.5, 2.5);

  const auto arc = [&](const Vec3& axis) {
    return [&, axis](double sarc) {
      const Configuration qs = rotated(exp_rotation(phi * sarc * axis), q0);
      return alpha_J0(rigid_state(qs, phi * axis), m, J0);
    };
  };
  const double i1 =
      gauss_kronrod<double, 15>::integrate(arc(u), 0.0, 1.0, 8, 1e-13);
  const double r1 = std::abs(i1) / (J0.norm() * phi);

  const auto dil = [&](double sarc) {
    const double lam = 1.0 + 0.7 * sarc;
    State s;
    for (int a = 0; a < 3; ++a) {
      s.config[a] = lam * q0[a];
      s.velocity(a) = 0.7 * q0[a];
    }
    return alpha_J0(s, m, J0);
  };
  const double i2 = gauss_kronrod<double, 15>::integrate(dil, 0.0, 1.0, 8, 1e-13);
  const double r2 = std::abs(i2) / J0.norm();

  const double i3 =
      gauss_kronrod<double, 15>::integrate(arc(jhat), 0.0, 1.0, 8, 1e-13);
  const double r3 = std::abs(i3 - phi * J0.norm()) / (phi * J0.norm());
  return std::max({r1, r2, r3});
}

double trial_rigid_dynamic_phase(Rng& rng) {
  // Uniformly rotating equilateral triangle: an exact solution, so the dense
  // interpolant (which uses the true accelerations) is accurate to its order.
  const Masses m{1.0, 1.0, 1.0};
  const double L = rng.uniform(0.7, 1.5);
  const double omega = (rng.raw() % 2 ? 1.0 : -1.0) * std::sqrt(3.0 / (L * L * L));
  const double T = rng.uniform(0.5, 1.5);
  const double r = L / std::sqrt(3.0);
  Configuration q0;
  for (int a = 0; a < 3; ++a) {
    const double ang = kPi / 2.0 + a * 2.0 * kPi / 3.0;
    q0[a] = Vec3(r * std::cos(ang), r * std::sin(ang), 0.0);
  }
  const Vec3 w(0.0, 0.0, omega);
  const int n = 257;
  const double h = T / (n - 1);
  PotentialSpec pot;  // Newtonian
  std::vector<TrajectorySample> samples;
  samples.reserve(n);
  for (int k = 0; k < n; ++k) {
    const double t = (k == n - 1) ? T : k * h;
    const Configuration qt = rotated(exp_rotation(w * t), q0);
    samples.push_back(sample_state(t, rigid_state(qt, w), m, pot));
  }
  IntegratorConfig cfg;
  cfg.sample_spacing = h;
  Trajectory tr(std::move(samples), m, pot, cfg);
  const Vec3 J0 = tr.samples().front().J;
  const double I0 = polar_moment(q0, m);
  const QuadratureValue dyn = dynamic_phase(tr, J0, T);
  const double expected = I0 * omega * omega * T;  // = |J0| * omega * T
  return std::abs(dyn.value - expected) / std::max(1.0, std::abs(expected));
}

double trial_latitude_integral(Rng& rng) {
  const double z1 = rng.uniform(-0.9, 0.9);
  const int turns_choices[] = {1, -1, 2};
  const int turns = turns_choices[rng.raw() % 3];
  const double pred = predicted_holonomy(ShapeCurve::latitude(z1, turns));
  return std::abs(pred - kPi * (z1 - 1.0) * turns);
}

double trial_planar_gauge_decomposition(Rng& rng) {
  const Masses m = random_masses(rng);
  PlanarLoopSpec spec = random_planar_spec(rng);
  spec.samples = 2001;
  const OrientedTrajectory otr = synthetic_planar_loop(spec, m);
  const auto& samples = otr.trajectory().samples();
  const double h = otr.trajectory().sample_spacing();
  const Vec3 J0vec = samples.front().J;
  const double J0 = J0vec.norm();

  std::vector<double> alpha(samples.size()), z1(samples.size()), th1(samples.size());
  AngleUnwrapper th1_unwrap;
  AngleUnwrapper eig_unwrap;
  Vec3 u_prev = Vec3::Zero();
  double psi_first = 0.0;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    alpha[k] = alpha_J0(samples[k].state, m, J0vec);
    const ShapePoint sp = otr.shape_sample(k);
    z1[k] = sp.z1;
    th1[k] = th1_unwrap.next(sp.theta1);
    BodyFrame bf = body_frame(samples[k].state.config, m, Vec3::UnitZ());
    if (k > 0 && bf.U1.dot(u_prev) < 0.0) bf.U1 = -bf.U1;
    u_prev = bf.U1;
    const double ang = eig_unwrap.next(std::atan2(bf.U1.y(), bf.U1.x()));
    if (k == 0) psi_first = ang;
  }
  const double lhs = simpson_sampled(alpha, h).value;
  const double dpsi_eig = eig_unwrap.value() - psi_first;
  const double circ = line_integral_sampled(z1, th1, h).value;
  const double rhs = J0 * (dpsi_eig - 0.5 * circ);
  return std::abs(lhs - rhs) / (1.0 + std::abs(lhs));
}

double trial_gauge_shift(Rng& rng) {
  const Masses m = random_masses(rng);
  const double J0 = rng.uniform(0.7, 2.0);
  const int n = 801;
  const double h = 1.0 / (n - 1);
  const double pa = rng.uniform(0.0, 2.0 * kPi);
  const double pb = rng.uniform(0.0, 2.0 * kPi);
  const double pc = rng.uniform(0.0, 2.0 * kPi);
  const int k2 = static_cast<int>(rng.raw() % 3) - 1;
  std::vector<ReducedSample> samples(n);
  for (int k = 0; k < n; ++k) {
    const double t = k * h;
    ReducedSample& s = samples[k];
    s.t = t;
    s.z1 = 0.3 + 0.25 * std::sin(2.0 * kPi * t + pa);
    s.theta1 = 2.0 * kPi * t + 0.3 * std::sin(2.0 * kPi * t + pb);
    s.z2 = 0.55 + 0.3 * std::sin(2.0 * kPi * t + pc);
    s.theta2 = 2.0 * kPi * k2 * t + 0.4 * std::sin(4.0 * kPi * t + pa);
    s.gap_ratio = 0.5;
    s.continuity = 1.0;
  }
  const auto phase_of = [&](std::vector<ReducedSample> ss) {
    GaugeTrajectory gt(std::move(ss), Vec3(0.0, 0.0, J0), m);
    return geometric_phase_line(close_reduced_loop(gt, 1e-6), J0).value;
  };
  const double g0 = phase_of(samples);
  const double shift = rng.uniform(-3.0, 3.0);
  for (auto& s : samples) s.theta2 += shift;
  const double g1 = phase_of(samples);
  return std::abs(g1 - g0) / J0;
}

double trial_stokes(Rng& rng) {
  const double J0 = rng.uniform(0.7, 2.5);
  const double z1c = rng.uniform(-0.55, 0.55);
  const double th1c = rng.uniform(0.0, 2.0 * kPi);
  const double z2c = rng.uniform(-0.55, 0.55);
  const double th2c = rng.uniform(0.0, 2.0 * kPi);
  std::array<double, 16> a;
  for (auto& x : a) x = rng.uniform(-0.15, 0.15);
  const auto patch = [=](double u, double v) {
    const double U = u - 0.5, V = v - 0.5;
    ChartPoint p;
    p.z1 = z1c + a[0] * U + a[1] * V + a[2] * U * V + a[3] * U * U;
    p.theta1 = th1c + a[4] * U + a[5] * V + a[6] * U * V + a[7] * V * V;
    p.z2 = z2c + a[8] * U + a[9] * V + a[10] * U * V + a[11] * V * V;
    p.theta2 = th2c + a[12] * U + a[13] * V + a[14] * U * V + a[15] * U * U;
    return p;
  };
  const auto patch_deriv = [=](double u, double v) {
    const double U = u - 0.5, V = v - 0.5;
    ChartPoint du, dv;
    du.z1 = a[0] + a[2] * V + 2.0 * a[3] * U;
    dv.z1 = a[1] + a[2] * U;
    du.theta1 = a[4] + a[6] * V;
    dv.theta1 = a[5] + a[6] * U + 2.0 * a[7] * V;
    du.z2 = a[8] + a[10] * V;
    dv.z2 = a[9] + a[10] * U + 2.0 * a[11] * V;
    du.theta2 = a[12] + a[14] * V + 2.0 * a[15] * U;
    dv.theta2 = a[13] + a[14] * U;
    return std::make_pair(du, dv);
  };
  const QuadratureValue surf = omega_surface_quadrature(patch, J0, patch_deriv);
  const auto path = [&](double t) {
    if (t < 0.25) return patch(4.0 * t, 0.0);
    if (t < 0.5) return patch(1.0, 4.0 * (t - 0.25));
    if (t < 0.75) return patch(1.0 - 4.0 * (t - 0.5), 1.0);
    return patch(0.0, 1.0 - 4.0 * (t - 0.75));
  };
  const QuadratureValue line = beta_line_integral(path, J0, {0.25, 0.5, 0.75});
  return std::abs(line.value - surf.value) / J0;
}

double trial_factorization_recovery(Rng& rng) {
  const Masses m = random_masses(rng);
  Vec3 J0 = rng.vec3(2.0);
  if (J0.norm() < 0.2) J0 = rng.unit_vec3();
  const Vec3 jhat = J0.normalized();
  Vec3 n0, n1;
  do {
    n0 = rng.unit_vec3();
  } while (n0.dot(jhat) < -0.9);
  do {
    n1 = rng.unit_vec3();
  } while (n1.dot(jhat) < -0.9);
  const Configuration qp = random_configuration(rng, m);
  Vec3 np = *principal_normal(qp, m);
  if (np.dot(n0) < 0.0) np = -np;  // stay clear of the antipodal case
  const Configuration q0 = rotated(rotation_between(np, n0), qp);
  const double theta = rng.uniform(-2.9, 2.9);
  const double lam = rng.uniform(0.6, 1.7);
  const Rotation Rtot = rotation_between(jhat, n1) *
                        exp_rotation(theta * jhat) * rotation_between(n0, jhat);
  Configuration q1;
  for (int a = 0; a < 3; ++a) q1[a] = lam * (Rtot * q0[a]);
  const RotationMeasurement rm =
      measure_total_rotation({q0, n0}, {q1, n1}, m, J0);
  return std::abs(wrap_pi(rm.dtheta - theta));
}

double trial_lift_holonomy(Rng& rng) {
  const Masses m = random_masses(rng);
  const double z1c = rng.uniform(-0.45, 0.45);
  const double thc = rng.uniform(0.0, 2.0 * kPi);
  const int k = 3 + static_cast<int>(rng.raw() % 3);
  std::vector<std::pair<double, double>> verts;
  for (int i = 0; i < k; ++i) {
    verts.emplace_back(z1c + rng.uniform(-0.25, 0.25), thc + rng.uniform(-0.3, 0.3));
  }
  const ShapeCurve poly = ShapeCurve::polygon(verts);
  const Configuration q0 = section_configuration(verts[0].first, verts[0].second, m);
  const HolonomyResult res = holonomy_check(poly, q0, m);
  return std::abs(res.residual);
}

double trial_planar_fiber_freeze(Rng& rng) {
  const Masses m = random_masses(rng);
  PlanarLoopSpec spec = random_planar_spec(rng);
  spec.samples = 801;
  const OrientedTrajectory otr = synthetic_planar_loop(spec, m);
  const GaugeTrajectory gt = eigenframe_track(otr);
  double worst = 0.0;
  for (const auto& s : gt.samples()) {
    worst = std::max(worst, std::abs(s.z2 - 1.0));
    worst = std::max(worst, std::abs(s.theta2 - gt.samples().front().theta2));
  }
  return worst;
}

double trial_planar_phase_balance(Rng& rng) {
  const Masses m = random_masses(rng);
  const PlanarLoopSpec spec = random_planar_spec(rng);
  const OrientedTrajectory otr = synthetic_planar_loop(spec, m);
  const Vec3 J0vec = otr.trajectory().samples().front().J;
  ReconstructOptions opt;
  opt.tolerance = 1e-5;
  opt.shape_closure_tol = 1e-6;
  opt.point_loop_tol = 1e-9;
  opt.similarity_tol = 1e-6;
  const PhaseReport pr = reconstruct(otr, otr.trajectory().t1(), J0vec, opt);
  return std::abs(pr.residual);
}

double trial_spatial_phase_balance(Rng& rng) {
  const Masses m{1.0, rng.uniform(0.8, 1.3), 1.0};
  SpatialLoopSpec spec;
  spec.base.z1_center = rng.uniform(0.58, 0.66);
  spec.base.z1_amplitude = rng.uniform(0.12, 0.18);
  spec.base.theta1_start = rng.uniform(0.0, 2.0 * kPi);
  spec.base.theta1_wobble = rng.uniform(0.0, 0.25);
  spec.base.winding = 1;
  spec.base.phase1 = rng.uniform(0.0, 2.0 * kPi);
  spec.base.phase2 = rng.uniform(0.0, 2.0 * kPi);
  spec.base.samples = 3001;
  spec.J0 = Vec3(rng.uniform(0.2, 0.35), rng.uniform(-0.1, 0.1), rng.uniform(1.6, 2.0));
  const OrientedTrajectory otr = synthetic_spatial_loop(spec, m);
  const Vec3 J0vec = otr.trajectory().samples().front().J;
  ReconstructOptions opt;
  opt.tolerance = 1e-4;
  opt.shape_closure_tol = 1e-6;
  opt.point_loop_tol = 1e-9;
  opt.similarity_tol = 1e-6;
  const PhaseReport pr = reconstruct(otr, otr.trajectory().t1(), J0vec, opt);
  return std::abs(pr.residual);
}

}  // namespace

std::vector<PropertyResult> run_validation_suite(std::uint64_t seed, int count) {
  std::vector<PropertyResult> out;
  if (count <= 0) return out;
  const int few = std::max(2, count / 4);
  const int fewer = std::max(2, count / 8);
  int idx = 0;
  const auto prop = [&](const std::string& name, int trials, double tol,
                        const TrialFn& fn) {
    out.push_back(run_property(name, trials, tol, seed * 1000003ull + ++idx, fn));
  };

  prop("rotation exp/log round trip", count, 1e-10, trial_rotation_roundtrip);
  prop("similarity fit recovery", count, 1e-9, trial_similarity_recovery);
  prop("inertia quadratic form", count, 1e-10, trial_inertia_quadratic);
  prop("mass-weighted coordinate norms", count, 1e-10, trial_coordinate_norms);
  prop("signed area height", count, 1e-10, trial_area_height);
  prop("shape similarity invariance", count, 1e-10, trial_shape_invariance);
  prop("orientation flip antisymmetry", count, 1e-12, trial_orientation_flip);
  prop("horizontal speed isometry", count, 1e-8, trial_horizontal_speed);
  prop("rigid angular velocity recovery", count, 1e-10, trial_angular_velocity_recovery);
  prop("connection scale invariance", count, 1e-12, trial_connection_scaling);
  prop("orthogonal and homothety arcs", few, 1e-8, trial_connection_arcs);
  prop("rigid rotation dynamic phase", few, 1e-10, trial_rigid_dynamic_phase);
  prop("latitude gauge integral", count, 1e-12, trial_latitude_integral);
  prop("planar gauge decomposition", fewer, 1e-8, trial_planar_gauge_decomposition);
  prop("gauge shift invariance", few, 1e-10, trial_gauge_shift);
  prop("curvature vs boundary circulation", std::max(4, count / 4), 1e-8, trial_stokes);
  prop("rotation factorization recovery", std::max(4, count / 2), 1e-9,
       trial_factorization_recovery);
  prop("lift holonomy vs gauge prediction", fewer, 1e-6, trial_lift_holonomy);
  prop("planar fiber height freeze", fewer, 1e-12, trial_planar_fiber_freeze);
  prop("phase balance, planar loops", fewer, 1e-5, trial_planar_phase_balance);
  prop("phase balance, spatial loops", std::min(2, count), 1e-4,
       trial_spatial_phase_balance);
  return out;
}

bool all_passed(const std::vector<PropertyResult>& results) {
  for (const auto& r : results) {
    if (!r.passed()) return false;
  }
  return true;
}

std::string render_property_table(const std::vector<PropertyResult>& results) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof(line), "  %-36s %7s %9s %10s %10s  %s\n", "property",
                "trials", "failures", "worst", "tolerance", "status");
  out << line;
  for (const auto& r : results) {
    std::snprintf(line, sizeof(line), "  %-36s %7d %9d %10.2e %10.1e  %s\n",
                  r.name.c_str(), r.trials, r.failures, r.worst, r.tolerance,
                  r.passed() ? "ok" : "FAIL");
    out << line;
  }
  int failed = 0;
  for (const auto& r : results) failed += r.passed() ? 0 : 1;
  if (results.empty()) {
    out << "  (no checks requested)\n";
  } else if (failed == 0) {
    out << "  all checks passed\n";
  } else {
    std::snprintf(line, sizeof(line), "  %d check(s) failed\n", failed);
    out << line;
  }
  return out.str();
}

}  // namespace shapephase
