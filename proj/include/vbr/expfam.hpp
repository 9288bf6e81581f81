#pragma once

// Exponential families in natural (lambda) and expectation (mu) coordinates.
//
// Flat layouts (matrix blocks are column-major D x D, stored full and kept symmetric):
//   Bernoulli        lambda = (log pi/(1-pi))            mu = (E z)
//   Beta             lambda = (alpha-1, beta-1)          mu = (E log z, E log(1-z))
//   Gaussian         lambda = (S m, -S/2)                mu = (E z, E z z^T)
//   Gaussian-Wishart lambda = ((nu-D)/2, -(W^-1 + gamma m m^T)/2, gamma m, -gamma/2)
//                    mu     = (E log|Z2|, E Z2, E Z2 z1, E z1^T Z2 z1)
//
// A Beta family may instead carry the Haldane base measure h(z) = 1/(z(1-z)), in
// which case lambda = (alpha, beta) and the density is h(z) exp(<T(z), lambda> - A).

#include "vbr/linalg.hpp"

#include <Eigen/Dense>
#include <string>

namespace vbr {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class FamilyKind { Bernoulli, Beta, Gaussian, GaussianWishart };

enum class BaseMeasure { Unit, Haldane };

struct FamilyDescriptor {
  FamilyKind kind = FamilyKind::Bernoulli;
  int dim = 1;
  BaseMeasure base = BaseMeasure::Unit;

  static FamilyDescriptor bernoulli() { return {FamilyKind::Bernoulli, 1, BaseMeasure::Unit}; }
  static FamilyDescriptor beta(BaseMeasure base = BaseMeasure::Unit) {
    return {FamilyKind::Beta, 1, base};
  }
  static FamilyDescriptor gaussian(int dim) { return {FamilyKind::Gaussian, dim, BaseMeasure::Unit}; }
  static FamilyDescriptor gaussian_wishart(int dim) {
    return {FamilyKind::GaussianWishart, dim, BaseMeasure::Unit};
  }

  /// Length of the flat natural / expectation vectors.
  [[nodiscard]] Eigen::Index size() const;

  /// Throws DomainError unless dim/base are consistent with kind.
  void validate() const;

  friend bool operator==(const FamilyDescriptor &, const FamilyDescriptor &) = default;
};

std::string to_string(FamilyKind kind);
std::string to_string(const FamilyDescriptor &family);

class NaturalParam {
public:
  /// Symmetrizes matrix blocks and validates the family domain; throws DomainError.
  NaturalParam(FamilyDescriptor family, Vector values);

  [[nodiscard]] const FamilyDescriptor &family() const noexcept { return family_; }
  [[nodiscard]] const Vector &values() const noexcept { return values_; }

private:
  FamilyDescriptor family_;
  Vector values_;
};

class ExpectationParam {
public:
  /// Validates moment realizability. Gaussian second moments may be degenerate
  /// (zero covariance), which is what the delta approximation produces.
  ExpectationParam(FamilyDescriptor family, Vector values);

  [[nodiscard]] const FamilyDescriptor &family() const noexcept { return family_; }
  [[nodiscard]] const Vector &values() const noexcept { return values_; }

private:
  FamilyDescriptor family_;
  Vector values_;
};

// Conventional parameterizations.

struct BetaShape {
  double alpha = 1.0;
  double beta = 1.0;
};

struct GaussianParams {
  Vector mean;
  Matrix precision;
};

struct GaussianWishartParams {
  Vector mean;   // m
  double gamma;  // precision scaling of the mean
  Matrix scale;  // W
  double dof;    // nu
};

NaturalParam bernoulli_natural(double prob);
double bernoulli_prob(const NaturalParam &lambda);

NaturalParam beta_natural(BetaShape shape, BaseMeasure base = BaseMeasure::Unit);
BetaShape beta_shape(const NaturalParam &lambda);

NaturalParam gaussian_natural(const GaussianParams &params);
GaussianParams gaussian_params(const NaturalParam &lambda);

NaturalParam gaussian_wishart_natural(const GaussianWishartParams &params);
GaussianWishartParams gaussian_wishart_params(const NaturalParam &lambda);

/// Moves a Beta natural parameter between base measures; the density is unchanged.
NaturalParam rebase(const NaturalParam &lambda, BaseMeasure base);

// Core maps.

ExpectationParam nat_to_mean(const NaturalParam &lambda);

/// Inverse of nat_to_mean. Beta and the Gaussian-Wishart dof are found by safeguarded
/// Newton iteration; throws NumericalError on non-convergence.
NaturalParam mean_to_nat(const ExpectationParam &mu);

/// A(lambda) with q(z) = h(z) exp(<T(z), lambda> - A(lambda)).
double log_partition(const NaturalParam &lambda);

/// E_q[log h(z)].
double expected_log_base_measure(const NaturalParam &lambda);

/// grad_mu E_q[log h(z)]; zero for unit base measures.
Vector base_measure_gradient(const FamilyDescriptor &family);

double entropy(const NaturalParam &lambda);

/// KL(q1 || q2) in Bregman form A(l2) - A(l1) - <l2 - l1, mu(l1)>.
double kl_divergence(const NaturalParam &lambda1, const NaturalParam &lambda2);

/// (E log|Z2|, E Z2, E Z2 z1, E z1^T Z2 z1) for a Gaussian-Wishart.
ExpectationParam gw_moments(const NaturalParam &lambda);

double inner(const NaturalParam &lambda, const ExpectationParam &mu);

// Block accessors on flat vectors.

inline Eigen::Map<const Matrix> gaussian_second(const Vector &flat, int dim) {
  return linalg::matrix_block(flat, dim, dim);
}

struct GwBlocks {
  double log_det;
  Matrix matrix;
  Vector vector;
  double quad;
};

GwBlocks gw_blocks(const Vector &flat, int dim);
Vector gw_flatten(double log_det, const Matrix &matrix, const Vector &vector, double quad);
Vector gaussian_flatten(const Vector &first, const Matrix &second);

} // namespace vbr
