#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "shapephase/types.hpp"

namespace shapephase {

inline constexpr double kPi = 3.141592653589793238462643383279502884;

// Wrap to the half-open interval (-pi, pi].
inline double wrap_pi(double a) {
  double r = std::remainder(a, 2.0 * kPi);  // [-pi, pi], ties to even
  if (r <= -kPi) r += 2.0 * kPi;
  return r;
}

// Wrap to (-period/2, period/2].
inline double wrap_signed(double a, double period) {
  double r = std::remainder(a, period);
  if (r <= -0.5 * period) r += period;
  return r;
}

// Accumulates a continuous angle series from principal values, assuming the
// underlying angle moves by less than pi between consecutive inputs.
class AngleUnwrapper {
 public:
  double next(double raw) {
    if (first_) {
      first_ = false;
      value_ = raw;
    } else {
      value_ += wrap_pi(raw - value_);
    }
    return value_;
  }
  bool started() const { return !first_; }
  double value() const { return value_; }

 private:
  bool first_ = true;
  double value_ = 0.0;
};

// Deterministic RNG with explicit, platform-independent conversions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double uniform(double lo = 0.0, double hi = 1.0) {
    const double u = (gen_() >> 11) * 0x1.0p-53;  // [0, 1)
    return lo + (hi - lo) * u;
  }

  double normal() {
    // Box-Muller, fully deterministic (no library distribution objects).
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform(), u2 = uniform();
    while (u1 <= 1e-300) u1 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * kPi * u2);
    have_spare_ = true;
    return r * std::cos(2.0 * kPi * u2);
  }

  Vec3 vec3(double scale = 1.0) {
    const double x = normal(), y = normal(), z = normal();
    return scale * Vec3(x, y, z);
  }

  Vec3 unit_vec3() {
    Vec3 v = vec3();
    while (v.norm() < 1e-8) v = vec3();
    return v.normalized();
  }

  std::uint64_t raw() { return gen_(); }

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// FNV-1a 64-bit hash, used for configuration provenance.
inline std::uint64_t fnv1a64(const std::string& data) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

// Derivatives of a uniformly sampled series by 4th-order finite differences
// (5-point interior stencils, one-sided at the ends). Requires >= 5 samples.
std::vector<double> sampled_derivative(const std::vector<double>& f, double h);

// Composite Simpson integral of uniformly sampled values (3/8 rule patches an
// odd final interval). Also returns |S_h - S_2h|/15 as the error estimate.
struct QuadratureValue {
  double value = 0.0;
  double error = 0.0;
};
QuadratureValue simpson_sampled(const std::vector<double>& f, double h);

// Line integral sum_k of integrand f dg over a uniformly sampled pair of
// series: computed as Simpson of f(t) g'(t) with finite-difference g'.
QuadratureValue line_integral_sampled(const std::vector<double>& f,
                                      const std::vector<double>& g, double h);

}  // namespace shapephase
