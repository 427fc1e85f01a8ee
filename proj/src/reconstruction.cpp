#include "shapephase/reconstruction.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <string>

#include "shapephase/triangle.hpp"

namespace shapephase {

namespace debug {
bool flip_beta_sign = false;
}

namespace {

using Quad = boost::math::quadrature::gauss_kronrod<double, 15>;

Vec3 chart_w(double z1, double theta1) {
  const double rho = 0.5 * std::sqrt(std::max(0.0, 1.0 - z1 * z1));
  return Vec3(rho * std::cos(theta1), rho * std::sin(theta1), 0.5 * z1);
}

double chart_shape_distance(double z1a, double th1a, double z1b, double th1b) {
  const double c = std::clamp(4.0 * chart_w(z1a, th1a).dot(chart_w(z1b, th1b)), -1.0, 1.0);
  return 0.5 * std::acos(c);
}

double beta_sign() { return debug::flip_beta_sign ? -1.0 : 1.0; }

ChartPoint chart_derivative_fd(const ChartPath& path, double t, double h) {
  const ChartPoint m2 = path(t - 2 * h), m1 = path(t - h);
  const ChartPoint p1 = path(t + h), p2 = path(t + 2 * h);
  auto d = [&](double a, double b, double c, double e) {
    return (a - 8.0 * b + 8.0 * c - e) / (12.0 * h);
  };
  ChartPoint out;
  out.z1 = d(m2.z1, m1.z1, p1.z1, p2.z1);
  out.theta1 = d(m2.theta1, m1.theta1, p1.theta1, p2.theta1);
  out.z2 = d(m2.z2, m1.z2, p1.z2, p2.z2);
  out.theta2 = d(m2.theta2, m1.theta2, p1.theta2, p2.theta2);
  return out;
}

}  // namespace

ClosedReducedLoop close_reduced_loop(const GaugeTrajectory& gt, double shape_tol) {
  const auto& smp = gt.samples();
  if (smp.size() < 2) {
    raise(ErrorCode::PreconditionViolated, "gauge trajectory too short to close");
  }
  const ReducedSample& a = smp.front();
  const ReducedSample& b = smp.back();
  const double closure = chart_shape_distance(a.z1, a.theta1, b.z1, b.theta1);
  if (closure > shape_tol) {
    raise(ErrorCode::ShapeNotClosed,
          "shape endpoints differ by " + std::to_string(closure));
  }
  ClosedReducedLoop loop{gt, 1.0, 1.0, 0.0, 0.0, closure, 0.0};
  for (const ReducedSample& s : smp) {
    loop.max_excursion = std::max(
        loop.max_excursion, chart_shape_distance(a.z1, a.theta1, s.z1, s.theta1));
  }
  const double J0 = gt.momentum_magnitude();
  loop.z2_start = std::clamp(a.z2, -1.0, 1.0);
  loop.z2_end = std::clamp(b.z2, -1.0, 1.0);
  loop.arc_length_start = J0 * std::acos(loop.z2_start);
  loop.arc_length_end = J0 * std::acos(loop.z2_end);
  return loop;
}

GeometricPhase geometric_phase_line(const ClosedReducedLoop& loop, double J0) {
  GeometricPhase out;
  const auto& smp = loop.gauge.samples();
  if (smp.size() < 3) return out;
  const double h = loop.gauge.sample_spacing();
  if (h <= 0.0) return out;

  const std::size_t n = smp.size();
  std::vector<double> f1(n), g1(n), f2(n), g2(n);
  for (std::size_t k = 0; k < n; ++k) {
    f1[k] = 0.5 * smp[k].z1 * smp[k].z2;
    g1[k] = smp[k].theta1;
    f2[k] = smp[k].z2 - 1.0;
    g2[k] = smp[k].theta2;
  }
  const QuadratureValue t1 = line_integral_sampled(f1, g1, h);
  const QuadratureValue t2 = line_integral_sampled(f2, g2, h);
  const double sgn = beta_sign();
  out.theta1_term = sgn * J0 * t1.value;
  out.theta2_term = sgn * J0 * t2.value;
  out.raw_line_integral = out.theta1_term + out.theta2_term;

  const double turn = (g1.back() - g1.front()) / (2.0 * kPi);
  out.winding = static_cast<int>(std::lround(turn));
  out.winding_correction = -kPi * J0 * static_cast<double>(out.winding);
  out.value = out.raw_line_integral + out.winding_correction;
  out.error = J0 * (t1.error + t2.error) +
              J0 * (0.5 * std::abs(g1.back() - g1.front() -
                                   2.0 * kPi * out.winding) +
                    loop.closure_distance);
  return out;
}

QuadratureValue omega_surface_quadrature(const ChartPatch& patch, double J0,
                                         const ChartPatchDeriv& deriv) {
  const double h = 1e-4;
  auto partials = [&](double u, double v) {
    if (deriv) return deriv(u, v);
    ChartPoint du = chart_derivative_fd([&](double x) { return patch(x, v); }, u, h);
    ChartPoint dv = chart_derivative_fd([&](double x) { return patch(u, x); }, v, h);
    return std::make_pair(du, dv);
  };
  auto integrand = [&](double u, double v) {
    const ChartPoint p = patch(u, v);
    if (std::abs(p.z1) > 1.0 - 1e-9) {
      raise(ErrorCode::ChartViolation, "patch reaches a shape-sphere pole");
    }
    if (std::abs(p.z2) > 1.0 + 1e-9) {
      raise(ErrorCode::ChartViolation, "patch leaves the fiber sphere (|z2| > 1)");
    }
    const auto [du, dv] = partials(u, v);
    const double xu = du.z1 * p.z2 + p.z1 * du.z2;
    const double xv = dv.z1 * p.z2 + p.z1 * dv.z2;
    const double term = 0.5 * (xu * dv.theta1 - xv * du.theta1) +
                        (du.z2 * dv.theta2 - dv.z2 * du.theta2);
    return J0 * term;
  };

  // The outer tolerance sits above the inner one so the outer rule does not
  // chase the inner quadrature's own error floor; both stay far below the
  // accuracy anyone can expect from a chart-level surface integral.
  double inner_err_max = 0.0;
  auto outer = [&](double u) {
    double err = 0.0;
    const double val = Quad::integrate([&](double v) { return integrand(u, v); }, 0.0,
                                       1.0, 12, 1e-12, &err);
    inner_err_max = std::max(inner_err_max, err);
    return val;
  };
  QuadratureValue out;
  out.value = Quad::integrate(outer, 0.0, 1.0, 12, 1e-10, &out.error);
  out.error += inner_err_max;
  return out;
}

QuadratureValue beta_line_integral(const ChartPath& path, double J0,
                                   const std::vector<double>& breaks) {
  std::vector<double> cuts{0.0};
  for (double b : breaks) {
    if (b > 0.0 && b < 1.0) cuts.push_back(b);
  }
  cuts.push_back(1.0);
  std::sort(cuts.begin(), cuts.end());

  const double sgn = beta_sign();
  QuadratureValue out;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double lo = cuts[i];
    const double hi = cuts[i + 1];
    // Keep the difference stencil strictly inside the segment: the path may
    // have corners at the cut points and a stencil straddling one would
    // poison the quadrature's error estimate.
    auto integrand = [&, lo, hi](double t) {
      const double h =
          std::max(std::min({1e-4, 0.45 * (t - lo), 0.45 * (hi - t)}), 1e-9);
      const ChartPoint p = path(t);
      const ChartPoint d = chart_derivative_fd(path, t, h);
      return sgn * J0 * (0.5 * p.z1 * p.z2 * d.theta1 + (p.z2 - 1.0) * d.theta2);
    };
    double err = 0.0;
    out.value += Quad::integrate(integrand, lo, hi, 15, 1e-12, &err);
    out.error += err;
  }
  return out;
}

RotationMeasurement measure_total_rotation(const OrientedConfiguration& oq0,
                                           const OrientedConfiguration& oq1,
                                           const Masses& m, const Vec3& J0,
                                           double similarity_tol) {
  const double J0mag = J0.norm();
  if (J0mag <= 0.0) raise(ErrorCode::ZeroMomentum, "rotation axis requires J0 != 0");
  const Vec3 j = J0 / J0mag;

  const Configuration q0 = center({oq0.config.q1, oq0.config.q2, oq0.config.q3}, m);
  const Configuration q1 = center({oq1.config.q1, oq1.config.q2, oq1.config.q3}, m);
  const SimilarityFit fit = fit_similarity(q0, q1, m);
  const double I0 = polar_moment(q0, m);
  RotationMeasurement rm;
  rm.R = fit.R;
  rm.fit_residual =
      std::sqrt(std::max(fit.residual, 0.0) / (fit.scale * fit.scale * I0));
  if (rm.fit_residual > similarity_tol) {
    raise(ErrorCode::NotSimilar,
          "endpoint shapes differ (relative residual " +
              std::to_string(rm.fit_residual) + ")");
  }

  const Vec3 n0 = oq0.n.normalized();
  const Vec3 n1 = oq1.n.normalized();
  if ((fit.R * n0 - n1).norm() > std::max(1e-6, 100.0 * rm.fit_residual)) {
    raise(ErrorCode::NotSimilar,
          "rotation does not carry the initial plane normal to the final one");
  }
  if (n0.dot(j) < -1.0 + 1e-12 || n1.dot(j) < -1.0 + 1e-12) {
    raise(ErrorCode::AntipodalNormal, "plane normal antiparallel to J0");
  }

  try {
    rm.R0 = rotation_between(n0, j);
    rm.R1 = rotation_between(j, n1);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::AntipodalInput) {
      raise(ErrorCode::AntipodalNormal, "plane normal antiparallel to J0");
    }
    throw;
  }

  const Rotation R_J0 = rm.R1.transpose() * fit.R * rm.R0.transpose();
  rm.dtheta = log_about_axis(R_J0, j, std::max(1e-8, 100.0 * rm.fit_residual));
  return rm;
}

PhaseReport reconstruct(const OrientedTrajectory& otr, double t_star, const Vec3& J0,
                        const ReconstructOptions& opt) {
  const Trajectory& tr = otr.trajectory();
  const Masses& m = otr.masses();
  const double J0mag = J0.norm();
  const double I0 = tr.samples().front().I;
  if (J0mag < 1e-12 * (1.0 + I0)) {
    raise(ErrorCode::ZeroMomentum, "reconstruction requires J0 != 0");
  }
  if (t_star <= tr.t0() || t_star > tr.t1() + 1e-9 * (tr.t1() - tr.t0())) {
    raise(ErrorCode::PreconditionViolated, "return time outside the trajectory span");
  }

  PhaseReport rep;
  rep.J0 = J0;
  rep.t_return = t_star;
  rep.tolerance = opt.tolerance;

  // Re-sample uniformly on [t0, t*] so the gauge-series quadratures see an
  // even grid ending exactly at the return time.
  const OrientedTrajectory seg = otr.resampled(t_star);
  rep.max_energy_drift = seg.trajectory().max_energy_drift();
  rep.max_momentum_drift = seg.trajectory().max_momentum_drift();
  if (!seg.trajectory().within_drift_budgets()) {
    rep.warnings.push_back("conservation drift exceeds budget");
  }

  const ShapePoint start_shape = seg.shape_sample(0);
  const std::size_t n = seg.trajectory().samples().size();
  double max_excursion = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    max_excursion = std::max(max_excursion,
                             shape_distance(seg.shape_sample(k), start_shape));
  }
  rep.return_distance = shape_distance(seg.shape_sample(n - 1), start_shape);
  rep.point_loop = max_excursion <= opt.point_loop_tol;

  // Endpoint orientations: the end normal is recomputed from the interpolated
  // configuration (the slerped estimate only fixes its sign).
  const OrientedConfiguration oq0{tr.samples().front().state.config,
                                  otr.normals().front()};
  const Configuration q_end = tr.configuration_at(t_star);
  Vec3 n_end = otr.normal_at(t_star);
  if (const auto pn = principal_normal(q_end, m)) {
    n_end = (pn->dot(n_end) >= 0.0) ? *pn : Vec3(-*pn);
  }
  const OrientedConfiguration oq1{q_end, n_end};

  const RotationMeasurement rm =
      measure_total_rotation(oq0, oq1, m, J0, opt.similarity_tol);
  rep.dtheta = rm.dtheta;

  const QuadratureValue dyn = dynamic_phase(seg.trajectory(), J0, t_star);
  rep.dynamic_phase = dyn.value;
  rep.dynamic_error = dyn.error;

  GeometricPhase geo;
  if (rep.point_loop) {
    // The whole reduced curve sits at one shape point: no enclosed area, no
    // winding; the eigenframe gauge (possibly degenerate there) is not needed.
    geo.point_loop = true;
    rep.min_eigen_gap_ratio =
        std::sqrt(std::max(0.0, 1.0 - start_shape.z1 * start_shape.z1));
  } else {
    const GaugeTrajectory gauge = eigenframe_track(seg, J0);
    rep.min_eigen_gap_ratio = gauge.min_gap_ratio();
    rep.min_frame_continuity = gauge.min_continuity();
    if (gauge.min_continuity() < 0.9) {
      rep.warnings.push_back("eigenframe continuity below 0.9; refine sampling");
    }
    if (gauge.momentum_degenerate()) {
      rep.warnings.push_back("momentum too small for fiber coordinates");
    }
    const ClosedReducedLoop loop = close_reduced_loop(gauge, opt.shape_closure_tol);
    geo = geometric_phase_line(loop, J0mag);
    rep.z2_start = loop.z2_start;
    rep.z2_end = loop.z2_end;
    rep.arc_length_start = loop.arc_length_start;
    rep.arc_length_end = loop.arc_length_end;
  }
  rep.geometric_phase = geo.value;
  rep.geometric_error = geo.error;
  rep.raw_line_integral = geo.raw_line_integral;
  rep.winding_correction = geo.winding_correction;
  rep.winding = geo.winding;
  rep.theta1_term = geo.theta1_term;
  rep.theta2_term = geo.theta2_term;

  rep.residual = wrap_pi(rep.dtheta - (rep.dynamic_phase + rep.geometric_phase) / J0mag);
  const double gap_floor = rep.point_loop ? 1.0 : std::max(rep.min_eigen_gap_ratio, 1e-3);
  const double dtheta_err =
      4.0 * rep.return_distance / gap_floor + 2.0 * rm.fit_residual;
  rep.residual_error = (rep.dynamic_error + rep.geometric_error) / J0mag + dtheta_err;
  rep.pass = std::abs(rep.residual) <= opt.tolerance;
  return rep;
}

double predicted_holonomy(const ShapeCurve& loop) {
  double total = 0.0;
  const auto& brk = loop.breaks();
  auto integrand = [&](double t) {
    const auto [z1, th1] = loop.at(t);
    (void)th1;
    return 0.5 * (z1 - 1.0) * loop.derivative(t).second;
  };
  for (std::size_t i = 0; i + 1 < brk.size(); ++i) {
    total += Quad::integrate(integrand, brk[i], brk[i + 1], 15, 1e-13);
  }
  return total;
}

HolonomyResult holonomy_check(const ShapeCurve& loop, const Configuration& q_start,
                              const Masses& m, const LiftOptions& opt) {
  if (!loop.closed(1e-9)) {
    raise(ErrorCode::PreconditionViolated, "holonomy requires a closed shape loop");
  }
  const HorizontalLift lift = horizontal_lift(loop, q_start, m, opt);
  HolonomyResult out;
  out.lift_angle = lift.rotation_angle();
  out.predicted_angle = predicted_holonomy(loop);
  out.residual = wrap_pi(out.lift_angle - out.predicted_angle);
  out.max_abs_momentum = lift.max_abs_momentum;
  out.max_shape_error = lift.max_shape_error;
  return out;
}

}  // namespace shapephase
