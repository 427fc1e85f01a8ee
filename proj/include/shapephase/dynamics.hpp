#pragma once

#include <array>
#include <vector>

#include "shapephase/error.hpp"
#include "shapephase/shape.hpp"
#include "shapephase/triangle.hpp"
#include "shapephase/types.hpp"

namespace shapephase {

struct IntegratorConfig {
  enum class Method { AdaptiveRK, Verlet };
  Method method = Method::AdaptiveRK;
  double rel_tol = 1e-10;          // adaptive local error control
  double abs_tol = 1e-10;
  double max_step = 0.1;
  double fixed_step = 1e-3;        // Verlet step; samples land on multiples
  double sample_spacing = 0.01;    // stored sample grid spacing
  double energy_drift_budget = 1e-7;    // |dE|/max(|E0|, 1)
  double momentum_drift_budget = 1e-7;  // |dJ|/(1 + |J0|)
  double triple_collision_floor = 1e-12;  // abort when I < floor * I(0)
};

struct TrajectorySample {
  double t = 0.0;
  State state;
  double I = 0.0;  // polar moment
  double E = 0.0;  // total energy
  Vec3 J = Vec3::Zero();
};

// Builds a sample with its conservation diagnostics recomputed from the state.
TrajectorySample sample_state(double t, const State& s, const Masses& m,
                              const PotentialSpec& pot);

// a_a = -(1/m_a) grad_a V; weighted sum is zero exactly (pairwise assembly).
// Raises BinaryCollision below the unsoftened pair-distance floor.
std::array<Vec3, 3> accelerations(const Configuration& q, const Masses& m,
                                  const PotentialSpec& spec);

// Densely sampled solution of the three-body equations with per-sample
// conserved-quantity diagnostics and a smooth interpolant between samples.
class Trajectory {
 public:
  Trajectory(std::vector<TrajectorySample> samples, Masses m, PotentialSpec pot,
             IntegratorConfig cfg);

  const std::vector<TrajectorySample>& samples() const { return samples_; }
  const Masses& masses() const { return m_; }
  const PotentialSpec& potential() const { return pot_; }
  const IntegratorConfig& config() const { return cfg_; }
  double t0() const { return samples_.front().t; }
  double t1() const { return samples_.back().t; }
  double sample_spacing() const;

  // Quintic Hermite interpolation of positions (velocity = its derivative).
  State state_at(double t) const;
  Configuration configuration_at(double t) const;

  double max_energy_drift() const { return max_energy_drift_; }
  double max_momentum_drift() const { return max_momentum_drift_; }
  bool within_drift_budgets() const;

  // Uniformly resampled copy on [t0, t_end] with at least `min_samples`
  // samples (spacing close to the original one).
  Trajectory resampled(double t_end, int min_samples = 9) const;

 private:
  std::size_t interval_of(double t) const;

  std::vector<TrajectorySample> samples_;
  std::vector<std::array<Vec3, 3>> accel_;  // per sample, for the interpolant
  Masses m_;
  PotentialSpec pot_;
  IntegratorConfig cfg_;
  double max_energy_drift_ = 0.0;
  double max_momentum_drift_ = 0.0;
};

// Integrates Newton's equations on [0, t1] from s0 (re-centered exactly).
// Raises StepFailure, BinaryCollision, TripleCollisionApproach.
Trajectory integrate(const State& s0, double t1, const Masses& m,
                     const PotentialSpec& spec, const IntegratorConfig& cfg);

// Trajectory plus a continuous unit normal series (the oriented lift).
class OrientedTrajectory {
 public:
  OrientedTrajectory(Trajectory tr, std::vector<Vec3> normals);

  const Trajectory& trajectory() const { return tr_; }
  const std::vector<Vec3>& normals() const { return normals_; }
  const Masses& masses() const { return tr_.masses(); }

  Vec3 normal_at(double t) const;  // spherical interpolation between samples
  ShapePoint shape_at(double t) const;
  ShapePoint shape_sample(std::size_t k) const;
  OrientedConfiguration oriented_at(double t) const;

  OrientedTrajectory resampled(double t_end, int min_samples = 9) const;

 private:
  Trajectory tr_;
  std::vector<Vec3> normals_;
};

// Continuous oriented lift through isolated collinear instants (normal
// transported by interpolation across the flagged gap, then re-orthogonalized
// to the line). Raises PreconditionViolated for a collinear start and
// PersistentlyCollinear when an extended run of samples is collinear.
OrientedTrajectory orientation_lift(const Trajectory& tr, const Vec3& n0);

// Times t* > t0 where the oriented shape returns to its initial point within
// tol (great-circle radians); minima located on samples, then polished on the
// interpolant. Empty result allowed.
std::vector<double> detect_shape_return(const OrientedTrajectory& otr, double tol);

// Best (smallest-distance) return from detect_shape_return, with its distance.
struct ShapeReturn {
  double t = 0.0;
  double distance = 0.0;
};
std::vector<ShapeReturn> shape_returns(const OrientedTrajectory& otr, double tol);

}  // namespace shapephase
