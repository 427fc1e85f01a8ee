#include "shapephase/numeric.hpp"

#include <cstddef>

namespace shapephase {

std::vector<double> sampled_derivative(const std::vector<double>& f, double h) {
  const std::size_t n = f.size();
  std::vector<double> d(n, 0.0);
  if (n < 2) return d;
  if (n < 5) {
    d[0] = (f[1] - f[0]) / h;
    d[n - 1] = (f[n - 1] - f[n - 2]) / h;
    for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (f[i + 1] - f[i - 1]) / (2.0 * h);
    return d;
  }
  const double c = 1.0 / (12.0 * h);
  d[0] = (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]) * c;
  d[1] = (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]) * c;
  for (std::size_t i = 2; i + 2 < n; ++i) {
    d[i] = (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]) * c;
  }
  d[n - 2] = (3.0 * f[n - 1] + 10.0 * f[n - 2] - 18.0 * f[n - 3] + 6.0 * f[n - 4] - f[n - 5]) * c;
  d[n - 1] = (25.0 * f[n - 1] - 48.0 * f[n - 2] + 36.0 * f[n - 3] - 16.0 * f[n - 4] + 3.0 * f[n - 5]) * c;
  return d;
}

namespace {

double simpson_uniform(const std::vector<double>& f, std::size_t begin,
                       std::size_t end, double h) {
  // Integrates samples [begin, end] inclusive; (end - begin) intervals.
  const std::size_t m = end - begin;
  if (m == 0) return 0.0;
  if (m == 1) return 0.5 * h * (f[begin] + f[begin + 1]);
  if (m % 2 == 0) {
    double s = f[begin] + f[end];
    for (std::size_t i = begin + 1; i < end; ++i) s += (((i - begin) % 2) ? 4.0 : 2.0) * f[i];
    return s * h / 3.0;
  }
  if (m == 3) {
    return 3.0 * h / 8.0 * (f[begin] + 3.0 * f[begin + 1] + 3.0 * f[begin + 2] + f[end]);
  }
  // Odd interval count >= 5: Simpson on the front, 3/8 rule on the last three.
  return simpson_uniform(f, begin, end - 3, h) + simpson_uniform(f, end - 3, end, h);
}

}  // namespace

QuadratureValue simpson_sampled(const std::vector<double>& f, double h) {
  QuadratureValue out;
  const std::size_t n = f.size();
  if (n < 2) return out;
  out.value = simpson_uniform(f, 0, n - 1, h);
  if (n >= 5) {
    std::vector<double> coarse;
    coarse.reserve(n / 2 + 1);
    for (std::size_t i = 0; i < n; i += 2) coarse.push_back(f[i]);
    const std::size_t covered = 2 * (coarse.size() - 1);
    double s2 = simpson_uniform(coarse, 0, coarse.size() - 1, 2.0 * h);
    if (covered < n - 1) s2 += simpson_uniform(f, covered, n - 1, h);
    out.error = std::abs(out.value - s2) / 15.0;
  } else {
    double trap = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) trap += 0.5 * h * (f[i] + f[i + 1]);
    out.error = std::abs(out.value - trap);
  }
  return out;
}

QuadratureValue line_integral_sampled(const std::vector<double>& f,
                                      const std::vector<double>& g, double h) {
  const std::vector<double> dg = sampled_derivative(g, h);
  std::vector<double> integrand(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) integrand[i] = f[i] * dg[i];
  return simpson_sampled(integrand, h);
}

}  // namespace shapephase
