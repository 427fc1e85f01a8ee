#include "shapephase/connection.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/numeric/odeint.hpp>
#include <boost/numeric/odeint/external/eigen/eigen.hpp>
#include <cmath>
#include <complex>
#include <memory>
#include <string>

#include "shapephase/triangle.hpp"

namespace shapephase {

namespace {

using Quad = boost::math::quadrature::gauss_kronrod<double, 15>;
using Cplx = std::complex<double>;

struct InertiaEigen {
  Eigen::Vector3d lambda;
  Mat3 U;
  double I;
};

InertiaEigen inertia_eigen(const Configuration& q, const Masses& m) {
  InertiaEigen out;
  out.I = polar_moment(q, m);
  if (out.I <= 0.0) raise(ErrorCode::TripleCollision, "zero-size configuration");
  Eigen::SelfAdjointEigenSolver<Mat3> es(inertia_tensor(q, m));
  out.lambda = es.eigenvalues();
  out.U = es.eigenvectors();
  return out;
}

Cplx c1of(const Eigen::Vector4d& y) { return Cplx(y(0), y(1)); }
Cplx c2of(const Eigen::Vector4d& y) { return Cplx(y(2), y(3)); }

Vec3 w_of_zeta(const Eigen::Vector4d& y) {
  const Cplx z1 = c1of(y), z2 = c2of(y);
  const Cplx cross = std::conj(z1) * z2;
  return Vec3(0.5 * (std::norm(z1) - std::norm(z2)), cross.real(), cross.imag());
}

}  // namespace

Vec3 connection_value(const State& s, const Masses& m) {
  const InertiaEigen ie = inertia_eigen(s.config, m);
  const Vec3 J = angular_momentum(s, m);
  Vec3 out = Vec3::Zero();
  for (int i = 0; i < 3; ++i) {
    if (ie.lambda(i) > kInertiaPseudoInverseFloor * ie.I) {
      const Vec3 u = ie.U.col(i);
      out += (u.dot(J) / ie.lambda(i)) * u;
    }
  }
  return out;
}

double alpha_J0(const State& s, const Masses& m, const Vec3& J0) {
  return J0.dot(connection_value(s, m));
}

double omega_J0(const Configuration& q, const Masses& m, const Vec3& J0) {
  const InertiaEigen ie = inertia_eigen(q, m);
  const double J0mag = J0.norm();
  if (J0mag == 0.0) return 0.0;
  double out = 0.0;
  for (int i = 0; i < 3; ++i) {
    const Vec3 u = ie.U.col(i);
    const double proj = u.dot(J0);
    if (ie.lambda(i) <= kInertiaPseudoInverseFloor * ie.I) {
      if (std::abs(proj) > 1e-4 * J0mag) {
        raise(ErrorCode::UndefinedAtCollinear,
              "J0 has a component along the null axis of a collinear configuration");
      }
      continue;
    }
    out += proj * proj / ie.lambda(i);
  }
  return out;
}

QuadratureValue dynamic_phase(const Trajectory& tr, const Vec3& J0, double t_end) {
  const double a = tr.t0();
  const double b = std::min(t_end, tr.t1());
  if (b <= a) return {0.0, 0.0};
  auto f = [&](double t) { return omega_J0(tr.configuration_at(t), tr.masses(), J0); };
  QuadratureValue out;
  out.value = Quad::integrate(f, a, b, 15, 1e-12, &out.error);
  return out;
}

QuadratureValue dynamic_phase(const OrientedTrajectory& otr, const Vec3& J0) {
  return dynamic_phase(otr.trajectory(), J0, otr.trajectory().t1());
}

BodyFrame body_frame(const Configuration& q, const Masses& m, const Vec3& n) {
  const Mat3 It = inertia_tensor(q, m);
  const double I = polar_moment(q, m);
  if (I <= 0.0) raise(ErrorCode::TripleCollision, "zero-size configuration");
  const Vec3 nn = n.normalized();
  const Vec3 e = nn.unitOrthogonal();
  const Vec3 f = nn.cross(e);
  const double b11 = e.dot(It * e);
  const double b22 = f.dot(It * f);
  const double b12 = e.dot(It * f);
  const double mean = 0.5 * (b11 + b22);
  const double r = std::hypot(0.5 * (b11 - b22), b12);
  // Angle of the larger-eigenvalue direction in the (e, f) basis; the smaller
  // one sits a quarter turn away.
  const double phi = 0.5 * std::atan2(2.0 * b12, b11 - b22);
  BodyFrame bf;
  bf.U1 = -std::sin(phi) * e + std::cos(phi) * f;
  bf.U2 = nn.cross(bf.U1);
  bf.U3 = nn;
  bf.lambda1 = mean - r;
  bf.lambda2 = mean + r;
  return bf;
}

GaugeTrajectory::GaugeTrajectory(std::vector<ReducedSample> samples, Vec3 J0, Masses m)
    : samples_(std::move(samples)), J0_(std::move(J0)), m_(m) {
  if (samples_.empty()) raise(ErrorCode::PreconditionViolated, "empty gauge trajectory");
  for (const ReducedSample& s : samples_) {
    min_gap_ratio_ = std::min(min_gap_ratio_, s.gap_ratio);
    min_continuity_ = std::min(min_continuity_, s.continuity);
  }
}

double GaugeTrajectory::sample_spacing() const {
  if (samples_.size() < 2) return 0.0;
  return (samples_.back().t - samples_.front().t) /
         static_cast<double>(samples_.size() - 1);
}

GaugeTrajectory eigenframe_track(const OrientedTrajectory& otr, const Vec3& J0) {
  const auto& smp = otr.trajectory().samples();
  const Masses& m = otr.masses();
  const double J0mag = J0.norm();
  const double scale = std::sqrt(std::max(smp.front().I, 0.0));
  const bool degenerate_J = J0mag < 1e-12 * (1.0 + scale * scale);
  const Vec3 J0hat = degenerate_J ? Vec3::UnitZ() : Vec3(J0 / J0mag);

  std::vector<ReducedSample> out;
  out.reserve(smp.size());
  AngleUnwrapper th1, th2;
  Vec3 prev_U1 = Vec3::Zero();
  double frozen_theta2 = 0.0;
  bool have_theta2 = false;

  for (std::size_t k = 0; k < smp.size(); ++k) {
    const Configuration& q = smp[k].state.config;
    const Vec3 n = otr.normals()[k];
    BodyFrame bf = body_frame(q, m, n);
    const double I = smp[k].I;
    const double gap_ratio = (bf.lambda2 - bf.lambda1) / I;
    if (gap_ratio < kEigenframeGapFloor) {
      raise(ErrorCode::EigenframeDegenerate,
            "in-plane inertia eigenvalues degenerate at t = " + std::to_string(smp[k].t));
    }
    double continuity = 1.0;
    if (k > 0) {
      const double d = bf.U1.dot(prev_U1);
      continuity = std::abs(d);
      if (d < 0.0) {
        bf.U1 = -bf.U1;
        bf.U2 = bf.U3.cross(bf.U1);
      }
    }
    prev_U1 = bf.U1;

    ReducedSample rs;
    rs.t = smp[k].t;
    rs.frame = bf;
    rs.gap_ratio = gap_ratio;
    rs.continuity = continuity;

    const ShapePoint sp = otr.shape_sample(k);
    rs.z1 = sp.z1;
    rs.theta1 = th1.next(sp.theta1);

    if (degenerate_J) {
      rs.z2 = 1.0;
      rs.theta2 = 0.0;
    } else {
      rs.z2 = std::clamp(J0hat.dot(n), -1.0, 1.0);
      const double in_plane = (J0 - J0.dot(n) * n).norm();
      if (in_plane < 1e-12 * J0mag) {
        // theta2 undefined where J0 is normal to the plane; freeze it.
        rs.theta2 = have_theta2 ? frozen_theta2 : 0.0;
        if (!have_theta2) {
          th2.next(0.0);
          have_theta2 = true;
        }
      } else {
        rs.theta2 = th2.next(std::atan2(J0.dot(bf.U2), J0.dot(bf.U1)));
        have_theta2 = true;
      }
      frozen_theta2 = rs.theta2;
    }
    out.push_back(rs);
  }

  GaugeTrajectory gt(std::move(out), J0, m);
  gt.momentum_degenerate_ = degenerate_J;
  return gt;
}

GaugeTrajectory eigenframe_track(const OrientedTrajectory& otr) {
  return eigenframe_track(otr, otr.trajectory().samples().front().J);
}

ShapeCurve ShapeCurve::latitude(double z1, double turns) {
  ShapeCurve c;
  const double rate = 2.0 * kPi * turns;
  c.f_ = [z1, rate](double t) { return std::make_pair(z1, rate * t); };
  c.df_ = [rate](double) { return std::make_pair(0.0, rate); };
  c.breaks_ = {0.0, 1.0};
  return c;
}

ShapeCurve ShapeCurve::polygon(std::vector<std::pair<double, double>> vertices,
                               bool close) {
  if (vertices.size() < 2) {
    raise(ErrorCode::PreconditionViolated, "polygon needs at least two vertices");
  }
  if (close) vertices.push_back(vertices.front());
  const std::size_t nseg = vertices.size() - 1;
  ShapeCurve c;
  auto verts = std::make_shared<std::vector<std::pair<double, double>>>(std::move(vertices));
  const double n = static_cast<double>(nseg);
  c.f_ = [verts, n](double t) {
    const double u = std::clamp(t, 0.0, 1.0) * n;
    std::size_t k = std::min(static_cast<std::size_t>(u), verts->size() - 2);
    const double s = u - static_cast<double>(k);
    const auto& a = (*verts)[k];
    const auto& b = (*verts)[k + 1];
    return std::make_pair(a.first + s * (b.first - a.first),
                          a.second + s * (b.second - a.second));
  };
  c.df_ = [verts, n](double t) {
    const double u = std::clamp(t, 0.0, 1.0) * n;
    std::size_t k = std::min(static_cast<std::size_t>(u), verts->size() - 2);
    const auto& a = (*verts)[k];
    const auto& b = (*verts)[k + 1];
    return std::make_pair((b.first - a.first) * n, (b.second - a.second) * n);
  };
  c.breaks_.resize(nseg + 1);
  for (std::size_t i = 0; i <= nseg; ++i) c.breaks_[i] = static_cast<double>(i) / n;
  return c;
}

ShapeCurve ShapeCurve::from_function(ChartFn f, ChartFn df, std::vector<double> breaks) {
  ShapeCurve c;
  c.f_ = std::move(f);
  if (df) {
    c.df_ = std::move(df);
  } else {
    // Fourth-order central difference, one-sided fallback at the ends.
    ChartFn base = c.f_;
    c.df_ = [base](double t) {
      const double h = 1e-5;
      auto ev = [&](double x) { return base(std::clamp(x, 0.0, 1.0)); };
      if (t > 2.0 * h && t < 1.0 - 2.0 * h) {
        auto m2 = ev(t - 2 * h), m1 = ev(t - h), p1 = ev(t + h), p2 = ev(t + 2 * h);
        return std::make_pair(
            (m2.first - 8 * m1.first + 8 * p1.first - p2.first) / (12 * h),
            (m2.second - 8 * m1.second + 8 * p1.second - p2.second) / (12 * h));
      }
      const double dir = (t < 0.5) ? 1.0 : -1.0;
      auto f0 = ev(t), f1 = ev(t + dir * h), f2 = ev(t + 2 * dir * h);
      return std::make_pair(dir * (-3 * f0.first + 4 * f1.first - f2.first) / (2 * h),
                            dir * (-3 * f0.second + 4 * f1.second - f2.second) / (2 * h));
    };
  }
  c.breaks_ = {0.0};
  for (double b : breaks) {
    if (b > 0.0 && b < 1.0) c.breaks_.push_back(b);
  }
  c.breaks_.push_back(1.0);
  std::sort(c.breaks_.begin(), c.breaks_.end());
  return c;
}

std::pair<double, double> ShapeCurve::at(double t) const { return f_(std::clamp(t, 0.0, 1.0)); }

std::pair<double, double> ShapeCurve::derivative(double t) const {
  return df_(std::clamp(t, 0.0, 1.0));
}

bool ShapeCurve::closed(double tol) const {
  const auto a = at(0.0);
  const auto b = at(1.0);
  auto wvec = [](const std::pair<double, double>& p) {
    const double rho = 0.5 * std::sqrt(std::max(0.0, 1.0 - p.first * p.first));
    return Vec3(rho * std::cos(p.second), rho * std::sin(p.second), 0.5 * p.first);
  };
  return (wvec(a) - wvec(b)).norm() <= tol;
}

double ShapeCurve::winding() const {
  return (at(1.0).second - at(0.0).second) / (2.0 * kPi);
}

Configuration HorizontalLift::configuration(std::size_t k) const {
  const Eigen::Vector4d& y = zeta[k];
  JacobiVectors jv;
  jv.zeta1 = Vec3(y(0), y(1), 0.0);
  jv.zeta2 = Vec3(y(2), y(3), 0.0);
  const double m13 = m.m1 + m.m3;
  jv.mu1 = 1.0 / (1.0 / m.m1 + 1.0 / m.m3);
  jv.mu2 = 1.0 / (1.0 / m13 + 1.0 / m.m2);
  return configuration_from_jacobi(jv, m);
}

std::vector<Configuration> HorizontalLift::configurations() const {
  std::vector<Configuration> out;
  out.reserve(zeta.size());
  for (std::size_t k = 0; k < zeta.size(); ++k) out.push_back(configuration(k));
  return out;
}

double HorizontalLift::rotation_angle() const {
  if (zeta.size() < 2) return 0.0;
  const Eigen::Vector4d& a = zeta.front();
  const Eigen::Vector4d& b = zeta.back();
  const Cplx h = std::conj(c1of(a)) * c1of(b) + std::conj(c2of(a)) * c2of(b);
  return std::atan2(h.imag(), h.real());
}

HorizontalLift horizontal_lift(const ShapeCurve& curve, const Configuration& q_start,
                               const Masses& m, const LiftOptions& opt) {
  namespace odeint = boost::numeric::odeint;

  const double I0 = polar_moment(q_start, m);
  if (std::abs(I0 - 1.0) > 1e-8) {
    raise(ErrorCode::PreconditionViolated, "lift start must have polar moment 1");
  }
  const double zmax = std::max({std::abs(q_start.q1.z()), std::abs(q_start.q2.z()),
                                std::abs(q_start.q3.z())});
  if (zmax > 1e-10) {
    raise(ErrorCode::PreconditionViolated, "lift start must be planar (z = 0)");
  }

  const JacobiVectors jv0 = jacobi(q_start, m);
  Eigen::Vector4d y(jv0.zeta1.x(), jv0.zeta1.y(), jv0.zeta2.x(), jv0.zeta2.y());

  auto target_w = [&](double t) {
    const auto [z1, th1] = curve.at(t);
    const double rho = 0.5 * std::sqrt(std::max(0.0, 1.0 - z1 * z1));
    return Vec3(rho * std::cos(th1), rho * std::sin(th1), 0.5 * z1);
  };
  auto target_dw = [&](double t) {
    const auto [z1, th1] = curve.at(t);
    const auto [dz1, dth1] = curve.derivative(t);
    const double s2 = std::max(1e-14, 1.0 - z1 * z1);
    const double rho = 0.5 * std::sqrt(s2);
    const double drho = -z1 * dz1 / (4.0 * rho);
    return Vec3(drho * std::cos(th1) - rho * std::sin(th1) * dth1,
                drho * std::sin(th1) + rho * std::cos(th1) * dth1, 0.5 * dz1);
  };

  if ((w_of_zeta(y) - target_w(0.0)).norm() > 1e-8) {
    raise(ErrorCode::PreconditionViolated, "lift start does not project to curve(0)");
  }

  const double kappa = opt.stabilization_rate;
  HorizontalLift lift;
  lift.m = m;

  auto rhs = [&](const Eigen::Vector4d& yy, Eigen::Vector4d& dydt, double t) {
    // Orthonormal basis of the horizontal plane: orthogonal to yy (constant
    // scale) and to i*yy (zero angular momentum).
    const double nrm2 = yy.squaredNorm();
    const Eigen::Vector4d zhat = yy / std::sqrt(nrm2);
    const Eigen::Vector4d izhat(-zhat(1), zhat(0), -zhat(3), zhat(2));
    auto project = [&](const Eigen::Vector4d& x) {
      return Eigen::Vector4d(x - x.dot(zhat) * zhat - x.dot(izhat) * izhat);
    };
    Eigen::Vector4d h1 = Eigen::Vector4d::Zero(), h2 = Eigen::Vector4d::Zero();
    double best = -1.0;
    for (int i = 0; i < 4; ++i) {
      const Eigen::Vector4d p = project(Eigen::Vector4d::Unit(i));
      if (p.norm() > best) {
        best = p.norm();
        h1 = p;
      }
    }
    h1.normalize();
    best = -1.0;
    for (int i = 0; i < 4; ++i) {
      Eigen::Vector4d p = project(Eigen::Vector4d::Unit(i));
      p -= p.dot(h1) * h1;
      if (p.norm() > best) {
        best = p.norm();
        h2 = p;
      }
    }
    if (best < 1e-6) raise(ErrorCode::LiftStepFailure, "degenerate horizontal basis");
    h2.normalize();

    auto dw_of = [&](const Eigen::Vector4d& eta) {
      const Cplx z1 = c1of(yy), z2 = c2of(yy);
      const Cplx e1 = c1of(eta), e2 = c2of(eta);
      const Cplx dcross = std::conj(e1) * z2 + std::conj(z1) * e2;
      return Vec3(yy(0) * eta(0) + yy(1) * eta(1) - yy(2) * eta(2) - yy(3) * eta(3),
                  dcross.real(), dcross.imag());
    };
    const Vec3 c1 = dw_of(h1);
    const Vec3 c2 = dw_of(h2);
    const Vec3 rhs_w = target_dw(t) + kappa * (target_w(t) - w_of_zeta(yy));
    Eigen::Matrix2d G;
    G << c1.dot(c1), c1.dot(c2), c2.dot(c1), c2.dot(c2);
    const Eigen::Vector2d b(c1.dot(rhs_w), c2.dot(rhs_w));
    if (std::abs(G.determinant()) < 1e-12) {
      raise(ErrorCode::LiftStepFailure, "singular shape-velocity system");
    }
    const Eigen::Vector2d c = G.inverse() * b;
    dydt = c(0) * h1 + c(1) * h2;
  };

  auto ctrl = odeint::make_controlled(opt.abs_tol, opt.rel_tol,
                                      odeint::runge_kutta_dopri5<Eigen::Vector4d, double,
                                                                 Eigen::Vector4d, double,
                                                                 odeint::vector_space_algebra>{});

  auto record = [&](double t) {
    y.normalize();  // scale correction only; leaves the shape point unchanged
    lift.t.push_back(t);
    lift.zeta.push_back(y);
    Eigen::Vector4d dydt;
    rhs(y, dydt, t);
    const double Jz = y(0) * dydt(1) - y(1) * dydt(0) + y(2) * dydt(3) - y(3) * dydt(2);
    lift.max_abs_momentum = std::max(lift.max_abs_momentum, std::abs(Jz));
    lift.max_shape_error =
        std::max(lift.max_shape_error, (w_of_zeta(y) - target_w(t)).norm());
  };

  record(0.0);
  const auto& brk = curve.breaks();
  for (std::size_t seg = 0; seg + 1 < brk.size(); ++seg) {
    const double a = brk[seg];
    const double b = brk[seg + 1];
    const int nspan = std::max(2, opt.samples_per_segment);
    double t = a;
    double dt = (b - a) / nspan;
    for (int i = 1; i <= nspan; ++i) {
      const double t_target = (i == nspan) ? b : a + (b - a) * i / nspan;
      int rejections = 0;
      while (t < t_target - 1e-15) {
        double step = std::min(dt, t_target - t);
        const auto result = ctrl.try_step(rhs, y, t, step);
        dt = step;
        if (result != odeint::controlled_step_result::success) {
          if (++rejections > 200) {
            raise(ErrorCode::LiftStepFailure, "lift step control stalled");
          }
        } else {
          rejections = 0;
        }
      }
      record(t_target);
    }
  }

  if (lift.max_shape_error > opt.shape_error_budget) {
    raise(ErrorCode::LiftStepFailure, "lift strayed from the target shape curve");
  }
  return lift;
}

Configuration section_configuration(double z1, double theta1, const Masses& m) {
  if (z1 < -1.0 + 1e-12) {
    raise(ErrorCode::PreconditionViolated, "chart section undefined at z1 = -1");
  }
  z1 = std::min(z1, 1.0);
  const double u = std::sqrt(0.5 * (1.0 + z1));
  const double rho = 0.5 * std::sqrt(std::max(0.0, 1.0 - z1 * z1));
  const Cplx v = (rho / u) * std::exp(Cplx(0.0, theta1));
  const Cplx inv_sqrt2(1.0 / std::sqrt(2.0), 0.0);
  const Cplx zeta1 = (u + v) * inv_sqrt2;
  const Cplx zeta2 = Cplx(0.0, 1.0) * (u - v) * inv_sqrt2;
  JacobiVectors jv;
  jv.zeta1 = Vec3(zeta1.real(), zeta1.imag(), 0.0);
  jv.zeta2 = Vec3(zeta2.real(), zeta2.imag(), 0.0);
  const double m13 = m.m1 + m.m3;
  jv.mu1 = 1.0 / (1.0 / m.m1 + 1.0 / m.m3);
  jv.mu2 = 1.0 / (1.0 / m13 + 1.0 / m.m2);
  return configuration_from_jacobi(jv, m);
}

double planar_rotation_angle(const Configuration& q0, const Configuration& q1,
                             const Masses& m) {
  const JacobiVectors a = jacobi(q0, m);
  const JacobiVectors b = jacobi(q1, m);
  auto cplx = [](const Vec3& v) { return Cplx(v.x(), v.y()); };
  const Cplx h = std::conj(cplx(a.zeta1)) * cplx(b.zeta1) +
                 std::conj(cplx(a.zeta2)) * cplx(b.zeta2);
  if (std::abs(h) < 1e-14) {
    raise(ErrorCode::PreconditionViolated, "rotation angle undefined (orthogonal states)");
  }
  return std::atan2(h.imag(), h.real());
}

}  // namespace shapephase
