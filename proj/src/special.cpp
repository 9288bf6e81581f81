#include "vbr/special.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace vbr::special {

namespace {

constexpr double kAsymptoticThreshold = 10.0;

// Asymptotic expansions in 1/x^2 with Bernoulli-number coefficients.
double digamma_asymptotic(double x) {
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  // B2/2, B4/4, B6/6, B8/8, B10/10, B12/12, B14/14
  const double series =
      inv2 *
      (1.0 / 12 -
       inv2 * (1.0 / 120 -
               inv2 * (1.0 / 252 -
                       inv2 * (1.0 / 240 -
                               inv2 * (1.0 / 132 -
                                       inv2 * (691.0 / 32760 - inv2 / 12.0))))));
  return std::log(x) - 0.5 * inv - series;
}

double trigamma_asymptotic(double x) {
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  // 1/x + 1/(2x^2) + sum B_2k / x^(2k+1)
  const double series =
      inv * inv2 *
      (1.0 / 6 -
       inv2 * (1.0 / 30 -
               inv2 * (1.0 / 42 -
                       inv2 * (1.0 / 30 -
                               inv2 * (5.0 / 66 -
                                       inv2 * (691.0 / 2730 - inv2 * 7.0 / 6))))));
  return inv + 0.5 * inv2 + series;
}

} // namespace

double digamma(double x) {
  if (std::isnan(x)) {
    return x;
  }
  if (x <= 0.0) {
    if (x == std::floor(x)) {
      return std::numeric_limits<double>::quiet_NaN();
    }
    // reflection: psi(1-x) - psi(x) = pi cot(pi x)
    return digamma(1.0 - x) - std::numbers::pi / std::tan(std::numbers::pi * x);
  }
  double shift = 0.0;
  while (x < kAsymptoticThreshold) {
    shift += 1.0 / x;
    x += 1.0;
  }
  return digamma_asymptotic(x) - shift;
}

double trigamma(double x) {
  if (std::isnan(x)) {
    return x;
  }
  if (x <= 0.0) {
    if (x == std::floor(x)) {
      return std::numeric_limits<double>::infinity();
    }
    // psi'(1-x) + psi'(x) = pi^2 / sin^2(pi x)
    const double s = std::sin(std::numbers::pi * x);
    return -trigamma(1.0 - x) + std::numbers::pi * std::numbers::pi / (s * s);
  }
  double shift = 0.0;
  while (x < kAsymptoticThreshold) {
    shift += 1.0 / (x * x);
    x += 1.0;
  }
  return trigamma_asymptotic(x) + shift;
}

double log_beta(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

double log_multigamma(double x, int dim) {
  double result = 0.25 * dim * (dim - 1) * std::log(std::numbers::pi);
  for (int d = 1; d <= dim; ++d) {
    result += std::lgamma(x + 0.5 * (1 - d));
  }
  return result;
}

double multi_digamma(double x, int dim) {
  double result = 0.0;
  for (int d = 1; d <= dim; ++d) {
    result += digamma(x + 0.5 * (1 - d));
  }
  return result;
}

double softplus(double x) {
  if (x > 0.0) {
    return x + std::log1p(std::exp(-x));
  }
  return std::log1p(std::exp(x));
}

double log_sum_exp(std::span<const double> values) {
  if (values.empty()) {
    return -std::numeric_limits<double>::infinity();
  }
  const double top = *std::max_element(values.begin(), values.end());
  if (!std::isfinite(top)) {
    return top;
  }
  double sum = 0.0;
  for (double v : values) {
    sum += std::exp(v - top);
  }
  return top + std::log(sum);
}

} // namespace vbr::special
