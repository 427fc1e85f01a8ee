#include "shapephase/dynamics.hpp"

#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <cstddef>
#include <string>

#include "shapephase/numeric.hpp"

namespace shapephase {

namespace {

constexpr int kMaxStepRejections = 200;
constexpr int kPersistentCollinearRun = 25;

struct PairIdx {
  int a, b;
};
constexpr PairIdx kPairs[3] = {{0, 1}, {0, 2}, {1, 2}};

using OdeState = std::array<double, 18>;

OdeState pack(const State& s) {
  OdeState y{};
  for (int a = 0; a < 3; ++a) {
    for (int i = 0; i < 3; ++i) {
      y[3 * a + i] = s.config[a](i);
      y[9 + 3 * a + i] = s.velocity(a)(i);
    }
  }
  return y;
}

State unpack(const OdeState& y) {
  State s;
  for (int a = 0; a < 3; ++a) {
    for (int i = 0; i < 3; ++i) {
      s.config[a](i) = y[3 * a + i];
      s.velocity(a)(i) = y[9 + 3 * a + i];
    }
  }
  return s;
}

State recentered(const State& s, const Masses& m) {
  State out = s;
  out.config = center({s.config.q1, s.config.q2, s.config.q3}, m);
  const Vec3 vcom = (m.m1 * s.v1 + m.m2 * s.v2 + m.m3 * s.v3) / m.total();
  out.v1 = s.v1 - vcom;
  out.v2 = s.v2 - vcom;
  out.v3 = s.v3 - vcom;
  return out;
}

// Quintic Hermite basis on [0, 1] and its derivative.
void hermite5(double s, double H[6], double dH[6]) {
  const double s2 = s * s, s3 = s2 * s, s4 = s3 * s, s5 = s4 * s;
  H[0] = 1.0 - 10.0 * s3 + 15.0 * s4 - 6.0 * s5;
  H[1] = s - 6.0 * s3 + 8.0 * s4 - 3.0 * s5;
  H[2] = 0.5 * s2 - 1.5 * s3 + 1.5 * s4 - 0.5 * s5;
  H[3] = 10.0 * s3 - 15.0 * s4 + 6.0 * s5;
  H[4] = -4.0 * s3 + 7.0 * s4 - 3.0 * s5;
  H[5] = 0.5 * s3 - s4 + 0.5 * s5;
  dH[0] = -30.0 * s2 + 60.0 * s3 - 30.0 * s4;
  dH[1] = 1.0 - 18.0 * s2 + 32.0 * s3 - 15.0 * s4;
  dH[2] = s - 4.5 * s2 + 6.0 * s3 - 2.5 * s4;
  dH[3] = 30.0 * s2 - 60.0 * s3 + 30.0 * s4;
  dH[4] = -12.0 * s2 + 28.0 * s3 - 15.0 * s4;
  dH[5] = 1.5 * s2 - 4.0 * s3 + 2.5 * s4;
}

Vec3 slerp_unit(const Vec3& a, const Vec3& b, double s) {
  const double d = std::clamp(a.dot(b), -1.0, 1.0);
  const double ang = std::acos(d);
  if (ang < 1e-8) return ((1.0 - s) * a + s * b).normalized();
  return (std::sin((1.0 - s) * ang) * a + std::sin(s * ang) * b).normalized() / 1.0;
}

}  // namespace

TrajectorySample sample_state(double t, const State& s, const Masses& m,
                              const PotentialSpec& pot) {
  TrajectorySample smp;
  smp.t = t;
  smp.state = s;
  smp.I = polar_moment(s.config, m);
  smp.E = kinetic_energy(s, m) + potential_energy(s.config, m, pot);
  smp.J = angular_momentum(s, m);
  return smp;
}

std::array<Vec3, 3> accelerations(const Configuration& q, const Masses& m,
                                  const PotentialSpec& spec) {
  const double p = spec.effective_exponent();
  std::array<Vec3, 3> force{Vec3::Zero(), Vec3::Zero(), Vec3::Zero()};
  for (const PairIdx& pr : kPairs) {
    const Vec3 r = q[pr.a] - q[pr.b];
    const double d = r.norm();
    if (spec.softening == 0.0 && d < spec.collision_floor) {
      raise(ErrorCode::BinaryCollision,
            "pairwise distance " + std::to_string(d) + " below floor");
    }
    const double d2 = d * d + spec.softening * spec.softening;
    double coef;  // F_a = coef * (q_a - q_b), coef = m_a m_b p d_eff^(p-2)
    if (p == -1.0) {
      coef = -m[pr.a] * m[pr.b] / (d2 * std::sqrt(d2));
    } else if (p == 0.0) {
      coef = 0.0;
    } else {
      coef = m[pr.a] * m[pr.b] * p * std::pow(d2, 0.5 * p - 1.0);
    }
    const Vec3 f = coef * r;
    force[pr.a] += f;
    force[pr.b] -= f;
  }
  return {force[0] / m.m1, force[1] / m.m2, force[2] / m.m3};
}

Trajectory::Trajectory(std::vector<TrajectorySample> samples, Masses m,
                       PotentialSpec pot, IntegratorConfig cfg)
    : samples_(std::move(samples)), m_(m), pot_(pot), cfg_(cfg) {
  if (samples_.empty()) raise(ErrorCode::PreconditionViolated, "empty trajectory");
  accel_.reserve(samples_.size());
  for (const TrajectorySample& s : samples_) {
    accel_.push_back(accelerations(s.state.config, m_, pot_));
  }
  const double E0 = samples_.front().E;
  const Vec3 J0 = samples_.front().J;
  const double Escale = std::max(std::abs(E0), 1.0);
  for (const TrajectorySample& s : samples_) {
    max_energy_drift_ = std::max(max_energy_drift_, std::abs(s.E - E0) / Escale);
    max_momentum_drift_ =
        std::max(max_momentum_drift_, (s.J - J0).norm() / (1.0 + J0.norm()));
  }
}

double Trajectory::sample_spacing() const {
  if (samples_.size() < 2) return cfg_.sample_spacing;
  return (t1() - t0()) / static_cast<double>(samples_.size() - 1);
}

bool Trajectory::within_drift_budgets() const {
  return max_energy_drift_ <= cfg_.energy_drift_budget &&
         max_momentum_drift_ <= cfg_.momentum_drift_budget;
}

std::size_t Trajectory::interval_of(double t) const {
  const double span = std::max(t1() - t0(), 1e-300);
  if (t < t0() - 1e-9 * span || t > t1() + 1e-9 * span) {
    raise(ErrorCode::PreconditionViolated,
          "trajectory evaluation outside [t0, t1]: t = " + std::to_string(t));
  }
  auto it = std::upper_bound(samples_.begin(), samples_.end(), t,
                             [](double v, const TrajectorySample& s) { return v < s.t; });
  std::size_t k = static_cast<std::size_t>(std::distance(samples_.begin(), it));
  if (k == 0) return 0;
  if (k >= samples_.size()) return samples_.size() - 2;
  return k - 1;
}

State Trajectory::state_at(double t) const {
  if (samples_.size() == 1) return samples_.front().state;
  const std::size_t k = interval_of(t);
  const TrajectorySample& s0 = samples_[k];
  const TrajectorySample& s1 = samples_[k + 1];
  const double h = s1.t - s0.t;
  const double s = std::clamp((t - s0.t) / h, 0.0, 1.0);
  double H[6], dH[6];
  hermite5(s, H, dH);
  State out;
  for (int a = 0; a < 3; ++a) {
    const Vec3& q0 = s0.state.config[a];
    const Vec3& q1 = s1.state.config[a];
    const Vec3& v0 = s0.state.velocity(a);
    const Vec3& v1 = s1.state.velocity(a);
    const Vec3& a0 = accel_[k][a];
    const Vec3& a1 = accel_[k + 1][a];
    out.config[a] = H[0] * q0 + H[1] * h * v0 + H[2] * h * h * a0 + H[3] * q1 +
                    H[4] * h * v1 + H[5] * h * h * a1;
    out.velocity(a) = (dH[0] * q0 + dH[1] * h * v0 + dH[2] * h * h * a0 + dH[3] * q1 +
                       dH[4] * h * v1 + dH[5] * h * h * a1) /
                      h;
  }
  return out;
}

Configuration Trajectory::configuration_at(double t) const {
  return state_at(t).config;
}

Trajectory Trajectory::resampled(double t_end, int min_samples) const {
  const double lo = t0();
  const double hi = std::min(std::max(t_end, lo), t1() + 1e-12 * (t1() - lo));
  const double span = hi - lo;
  if (span <= 0.0) raise(ErrorCode::PreconditionViolated, "resample span must be positive");
  const double h0 = sample_spacing();
  int n = static_cast<int>(std::ceil(span / h0 - 1e-9));
  n = std::max(n, min_samples - 1);
  const double h = span / n;
  std::vector<TrajectorySample> out;
  out.reserve(n + 1);
  for (int i = 0; i <= n; ++i) {
    const double t = (i == n) ? hi : lo + i * h;
    out.push_back(sample_state(t, state_at(t), m_, pot_));
  }
  return Trajectory(std::move(out), m_, pot_, cfg_);
}

Trajectory integrate(const State& s0_raw, double t1, const Masses& m,
                     const PotentialSpec& spec, const IntegratorConfig& cfg) {
  namespace odeint = boost::numeric::odeint;
  if (!(t1 > 0.0)) raise(ErrorCode::PreconditionViolated, "integration horizon must be > 0");
  if (!m.valid()) raise(ErrorCode::PreconditionViolated, "masses must be positive");

  const State s0 = recentered(s0_raw, m);
  const double I_start = polar_moment(s0.config, m);
  if (I_start <= 0.0) raise(ErrorCode::TripleCollision, "initial configuration has zero size");
  const double I_floor = cfg.triple_collision_floor * I_start;

  auto rhs = [&](const OdeState& y, OdeState& dydt, double /*t*/) {
    const State s = unpack(y);
    const auto acc = accelerations(s.config, m, spec);
    for (int a = 0; a < 3; ++a) {
      for (int i = 0; i < 3; ++i) {
        dydt[3 * a + i] = s.velocity(a)(i);
        dydt[9 + 3 * a + i] = acc[a](i);
      }
    }
  };

  const double spacing = std::min(cfg.sample_spacing, t1);
  const int n_samples = std::max(1, static_cast<int>(std::llround(t1 / spacing)));
  const double h_grid = t1 / n_samples;

  std::vector<TrajectorySample> samples;
  samples.reserve(n_samples + 1);
  samples.push_back(sample_state(0.0, s0, m, spec));

  auto check_floor = [&](double t, double I) {
    if (I < I_floor) {
      raise(ErrorCode::TripleCollisionApproach,
            "polar moment fell below the collision floor at t = " + std::to_string(t));
    }
  };

  if (cfg.method == IntegratorConfig::Method::Verlet) {
    const int sub = std::max(1, static_cast<int>(std::llround(h_grid / cfg.fixed_step)));
    const double h = h_grid / sub;
    State s = s0;
    auto acc = accelerations(s.config, m, spec);
    for (int kgrid = 1; kgrid <= n_samples; ++kgrid) {
      for (int j = 0; j < sub; ++j) {
        for (int a = 0; a < 3; ++a) {
          s.velocity(a) += 0.5 * h * acc[a];
          s.config[a] += h * s.velocity(a);
        }
        acc = accelerations(s.config, m, spec);
        for (int a = 0; a < 3; ++a) s.velocity(a) += 0.5 * h * acc[a];
      }
      const double t = kgrid * h_grid;
      samples.push_back(sample_state(t, s, m, spec));
      check_floor(t, samples.back().I);
    }
  } else {
    auto ctrl = odeint::make_controlled(cfg.abs_tol, cfg.rel_tol,
                                        odeint::runge_kutta_dopri5<OdeState>());
    OdeState y = pack(s0);
    double t = 0.0;
    double dt = std::min({cfg.max_step, h_grid, 1e-3});
    const double t_eps = 1e-13 * t1;
    for (int kgrid = 1; kgrid <= n_samples; ++kgrid) {
      const double t_target = (kgrid == n_samples) ? t1 : kgrid * h_grid;
      int rejections = 0;
      while (t < t_target - t_eps) {
        double step = std::min({dt, cfg.max_step, t_target - t});
        const double attempted = step;
        const auto result = ctrl.try_step(rhs, y, t, step);
        if (result == odeint::controlled_step_result::success) {
          dt = step;  // accepted; `step` now holds the suggested next size
          rejections = 0;
        } else {
          dt = step;
          if (++rejections > kMaxStepRejections || attempted < 1e-15 * t1) {
            raise(ErrorCode::StepFailure,
                  "step control stalled near t = " + std::to_string(t));
          }
        }
      }
      samples.push_back(sample_state(t_target, unpack(y), m, spec));
      check_floor(t_target, samples.back().I);
    }
  }

  return Trajectory(std::move(samples), m, spec, cfg);
}

OrientedTrajectory::OrientedTrajectory(Trajectory tr, std::vector<Vec3> normals)
    : tr_(std::move(tr)), normals_(std::move(normals)) {
  if (normals_.size() != tr_.samples().size()) {
    raise(ErrorCode::PreconditionViolated, "normal series length mismatch");
  }
}

Vec3 OrientedTrajectory::normal_at(double t) const {
  const auto& smp = tr_.samples();
  if (smp.size() == 1) return normals_[0];
  auto it = std::upper_bound(smp.begin(), smp.end(), t,
                             [](double v, const TrajectorySample& s) { return v < s.t; });
  std::size_t k = static_cast<std::size_t>(std::distance(smp.begin(), it));
  if (k == 0) return normals_.front();
  if (k >= smp.size()) return normals_.back();
  const double h = smp[k].t - smp[k - 1].t;
  const double s = std::clamp((t - smp[k - 1].t) / h, 0.0, 1.0);
  return slerp_unit(normals_[k - 1], normals_[k], s);
}

ShapePoint OrientedTrajectory::shape_at(double t) const {
  const Configuration q = tr_.configuration_at(t);
  return hopf_map(jacobi(q, masses()), normal_at(t), polar_moment(q, masses()));
}

ShapePoint OrientedTrajectory::shape_sample(std::size_t k) const {
  const Configuration& q = tr_.samples()[k].state.config;
  return hopf_map(jacobi(q, masses()), normals_[k], tr_.samples()[k].I);
}

OrientedConfiguration OrientedTrajectory::oriented_at(double t) const {
  return OrientedConfiguration{tr_.configuration_at(t), normal_at(t)};
}

OrientedTrajectory OrientedTrajectory::resampled(double t_end, int min_samples) const {
  Trajectory tr = tr_.resampled(t_end, min_samples);
  return orientation_lift(tr, normals_.front());
}

OrientedTrajectory orientation_lift(const Trajectory& tr, const Vec3& n0) {
  const Masses& m = tr.masses();
  const auto& smp = tr.samples();
  const std::size_t n = smp.size();

  const auto first_normal = principal_normal(smp[0].state.config, m);
  if (!first_normal) {
    raise(ErrorCode::PreconditionViolated, "orientation lift: initial configuration collinear");
  }
  const double align = n0.normalized().dot(*first_normal);
  if (std::abs(align) < 1.0 - 1e-6) {
    raise(ErrorCode::PreconditionViolated,
          "orientation lift: n0 is not normal to the initial plane");
  }

  std::vector<Vec3> normals(n);
  std::vector<bool> collinear(n, false);
  normals[0] = (align >= 0.0 ? 1.0 : -1.0) * (*first_normal);

  // Line direction of a (near-)collinear configuration: dominant axis of the
  // weighted second-moment matrix.
  auto line_axis = [&](const Configuration& q) {
    Mat3 M = Mat3::Zero();
    for (int a = 0; a < 3; ++a) M += m[a] * q[a] * q[a].transpose();
    Eigen::SelfAdjointEigenSolver<Mat3> es(M);
    return Vec3(es.eigenvectors().col(2));
  };

  std::size_t last_good = 0;
  for (std::size_t k = 1; k < n; ++k) {
    const Configuration& q = smp[k].state.config;
    const auto nk = principal_normal(q, m);
    if (!nk) {
      collinear[k] = true;
      if (k - last_good > kPersistentCollinearRun) {
        raise(ErrorCode::PersistentlyCollinear,
              "trajectory collinear over an extended interval near t = " +
                  std::to_string(smp[k].t));
      }
      continue;
    }
    Vec3 cand = *nk;
    const double d = cand.dot(normals[last_good]);
    if (std::abs(d) < 0.1) {
      raise(ErrorCode::StepFailure,
            "orientation lift: normal continuity lost (refine sampling) at t = " +
                std::to_string(smp[k].t));
    }
    if (d < 0.0) cand = -cand;
    normals[k] = cand;

    // Bridge any flagged gap by interpolation, re-orthogonalized to the line.
    if (k - last_good > 1) {
      for (std::size_t j = last_good + 1; j < k; ++j) {
        const double s = static_cast<double>(j - last_good) / static_cast<double>(k - last_good);
        Vec3 nj = slerp_unit(normals[last_good], normals[k], s);
        const Vec3 u = line_axis(smp[j].state.config);
        nj -= nj.dot(u) * u;
        if (nj.norm() < 1e-8) {
          raise(ErrorCode::StepFailure, "orientation lift: degenerate collinear bridge");
        }
        normals[j] = nj.normalized();
      }
    }
    last_good = k;
  }

  // Trailing collinear run: carry the last good normal, kept orthogonal to the line.
  for (std::size_t j = last_good + 1; j < n; ++j) {
    Vec3 nj = normals[last_good];
    const Vec3 u = line_axis(smp[j].state.config);
    nj -= nj.dot(u) * u;
    if (nj.norm() < 1e-8) {
      raise(ErrorCode::StepFailure, "orientation lift: degenerate trailing bridge");
    }
    normals[j] = nj.normalized();
  }

  return OrientedTrajectory(tr, std::move(normals));
}

std::vector<ShapeReturn> shape_returns(const OrientedTrajectory& otr, double tol) {
  const auto& smp = otr.trajectory().samples();
  const std::size_t n = smp.size();
  std::vector<ShapeReturn> out;
  if (n < 3) return out;

  const ShapePoint s0 = otr.shape_sample(0);
  std::vector<double> d(n);
  for (std::size_t k = 0; k < n; ++k) d[k] = shape_distance(otr.shape_sample(k), s0);

  const double spacing = otr.trajectory().sample_spacing();
  const double t_min = smp[0].t + 0.5 * spacing;

  auto polish = [&](std::size_t k) {
    const double lo = smp[k > 0 ? k - 1 : 0].t;
    const double hi = smp[std::min(k + 1, n - 1)].t;
    auto f = [&](double t) { return shape_distance(otr.shape_at(t), s0); };
    const auto r = boost::math::tools::brent_find_minima(f, lo, hi, 40);
    return ShapeReturn{r.first, r.second};
  };

  for (std::size_t k = 1; k < n; ++k) {
    const bool interior = k + 1 < n;
    const bool local_min = interior ? (d[k] <= d[k - 1] && d[k] <= d[k + 1])
                                    : (d[k] <= d[k - 1]);
    if (!local_min) continue;
    const double slope = interior
                             ? std::max(std::abs(d[k] - d[k - 1]), std::abs(d[k + 1] - d[k]))
                             : std::abs(d[k] - d[k - 1]);
    if (d[k] > 3.0 * tol + 2.0 * slope) continue;
    const ShapeReturn cand = polish(k);
    if (cand.distance < tol && cand.t > t_min) {
      if (!out.empty() && cand.t - out.back().t < 1.5 * spacing) {
        if (cand.distance < out.back().distance) out.back() = cand;
      } else {
        out.push_back(cand);
      }
    }
  }
  return out;
}

std::vector<double> detect_shape_return(const OrientedTrajectory& otr, double tol) {
  std::vector<double> times;
  for (const ShapeReturn& r : shape_returns(otr, tol)) times.push_back(r.t);
  return times;
}

}  // namespace shapephase
