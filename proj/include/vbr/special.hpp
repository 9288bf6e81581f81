#pragma once

#include <span>

namespace vbr::special {

/// psi(x) = d/dx log Gamma(x).
double digamma(double x);

/// psi'(x).
double trigamma(double x);

/// log B(a, b) for a, b > 0.
double log_beta(double a, double b);

/// log of the multivariate gamma function Gamma_D(x), x > (D-1)/2.
double log_multigamma(double x, int dim);

/// sum_{d=1}^{D} psi(x + (1-d)/2).
double multi_digamma(double x, int dim);

/// log(1 + e^x) without overflow.
double softplus(double x);

/// log(1 / (1 + e^-x)).
inline double log_sigmoid(double x) { return -softplus(-x); }

double log_sum_exp(std::span<const double> values);

} // namespace vbr::special
