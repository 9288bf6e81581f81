#pragma once

// Ground-truth computations for tests and acceptance checks. Nothing here calls the
// exponential-family or model code; only the plain data types are shared.

#include "vbr/models/data.hpp"

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <variant>

namespace vbr::oracle {

/// Bayes-rule posterior p(z = 1 | y).
double exact_simple_posterior(const SimpleMixtureData &data);

struct EnumerationResult {
  double log_evidence;
  Eigen::VectorXd marginal_means;
  Eigen::VectorXi joint_mode;
};

constexpr int kMaxEnumeration = 20;

/// Exact evidence and marginals of the two-level mixture by summing all 2^N indicator
/// configurations, with pi0 integrated out analytically.
EnumerationResult enumerate_two_level(const TwoLevelMixtureData &data);

struct BetaWeight {
  double alpha;
  double beta;
};

struct GaussianWeight {
  double mean;
  double variance;
};

using Weight = std::variant<BetaWeight, GaussianWeight>;

/// E[f(z)] under a Beta or Gaussian density. Throws if doubling `order` moves the
/// result by more than 1e-8 (relative to max(1, |value|)).
double quadrature_expect(const Weight &weight, const std::function<double(double)> &integrand,
                         int order = 64);

/// (sum a_i a_i^T + delta I)^-1 sum a_i t_i with rows a_i of `rows`.
Eigen::VectorXd ridge_solve(const Eigen::MatrixXd &rows, const Eigen::VectorXd &targets, double delta);

struct GwSampleParams {
  Eigen::VectorXd mean;
  double gamma;
  Eigen::MatrixXd scale;
  double dof;
};

/// Monte-Carlo means and standard errors of (log|Z2|, Z2, Z2 z1, z1^T Z2 z1), laid out
/// flat in the Gaussian-Wishart expectation order.
struct McMoments {
  Eigen::VectorXd mean;
  Eigen::VectorXd std_error;
};

McMoments mc_gw_moments(const GwSampleParams &params, std::size_t n_samples, std::uint64_t seed);

} // namespace vbr::oracle
