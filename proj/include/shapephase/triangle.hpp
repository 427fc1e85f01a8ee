#pragma once

#include <array>
#include <optional>

#include "shapephase/error.hpp"
#include "shapephase/types.hpp"

namespace shapephase {

// A shape counts as collinear when the smallest inertia eigenvalue divided by
// the polar moment falls below this ratio (scale invariant).
inline constexpr double kCollinearEigenvalueRatio = 1e-10;

// Shift three raw positions so the weighted center of mass is exactly zero.
Configuration center(const std::array<Vec3, 3>& q_raw, const Masses& m);

// I = sum m_a |q_a|^2. Zero iff triple collision.
double polar_moment(const Configuration& q, const Masses& m);

// Inertia tensor about the origin: I * identity - sum m_a q_a q_a^T.
// Satisfies w^T M w = sum m_a |w x q_a|^2 for every w.
Mat3 inertia_tensor(const Configuration& q, const Masses& m);

// J = sum m_a q_a x v_a.
Vec3 angular_momentum(const State& s, const Masses& m);

// Pairwise-distance potential per PotentialSpec (natural units, G = 1).
// Raises BinaryCollision when an unsoftened pairwise distance is below the floor.
double potential_energy(const Configuration& q, const Masses& m,
                        const PotentialSpec& spec);

// (1/2) sum m_a |v_a|^2.
double kinetic_energy(const State& s, const Masses& m);

// Signed area (1/2) n . (q2 - q1) x (q3 - q1); flips sign with n.
double oriented_area(const OrientedConfiguration& oq);

// Scale-invariant collinearity measure: smallest inertia eigenvalue / I.
double collinearity_measure(const Configuration& q, const Masses& m);

// Unit normal to the plane spanned by the vertices (sign canonicalized:
// largest-magnitude component positive). nullopt when collinear.
// Raises TripleCollision when I = 0.
std::optional<Vec3> principal_normal(const Configuration& q, const Masses& m);

}  // namespace shapephase
