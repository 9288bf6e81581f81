#pragma once

// Invariant suites shared by `vbr check`, the unit tests and the acceptance binary,
// plus the seeded instance generators they run on.

#include "vbr/engine.hpp"
#include "vbr/models/data.hpp"

#include <optional>
#include <random>
#include <string>
#include <vector>

namespace vbr::checks {

/// Random point well inside the natural domain of `family`.
NaturalParam random_natural(const FamilyDescriptor &family, std::mt19937_64 &rng);

/// Observations from 0.3 N(2, 1) + 0.7 N(-2, 1), scored under both components.
TwoLevelMixtureData random_two_level(std::size_t n, std::uint64_t seed);

/// Two isotropic unit-variance clusters centred at +-(2.5, 2.5, 0, ...), i.e. about
/// 7 noise SDs apart. `labels` receives 1 for the first cluster.
GMMData separated_gmm(std::size_t n, int dim, std::uint64_t seed, Eigen::VectorXi *labels = nullptr);

/// Y = U V^T + 0.1 noise with standard normal factors.
MatrixFactorizationData random_matfac(int rows, int cols, int k, std::uint64_t seed);

/// True when no ELBO record drops by more than slack * max(1, |elbo|).
bool elbo_nondecreasing(const FitTrace &trace, double slack);

struct SuiteResult {
  std::string name;
  int passed = 0;
  int failed = 0;
  std::vector<std::string> failures;

  void expect(bool ok, const std::string &what);
  [[nodiscard]] bool ok() const { return failed == 0; }
};

/// One CAVI sweep on simple_mixture against the Bayes posterior (tol 1e-12).
SuiteResult check_bayes(std::uint64_t seed = 1, int cases = 100);

/// For every model and conjugate node: E_q[log p] restricted to node i is affine in mu_i
/// with slope equal to the read-off coefficient (tol 1e-9 relative to max(1, |E log p|)).
SuiteResult check_multilinearity(std::uint64_t seed = 2, int pairs = 50);

/// CAVI ELBO nondecreasing and final residual <= 1e-8 on two_level, gmm2 and matfac_vmp.
SuiteResult check_monotonicity(std::uint64_t seed = 3);

/// mean_to_nat(nat_to_mean(lambda)) == lambda for every family (tol 1e-8).
SuiteResult check_roundtrip(std::uint64_t seed = 4, int cases = 100);

/// Converged two_level ELBO never exceeds the enumerated log-evidence.
SuiteResult check_evidence(std::uint64_t seed = 5, int instances = 20);

const std::vector<std::string> &suite_names();

/// nullopt for an unknown suite name.
std::optional<SuiteResult> run_suite(const std::string &name);

} // namespace vbr::checks
