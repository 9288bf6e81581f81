#pragma once

#include "vbr/engine.hpp"
#include "vbr/models/data.hpp"

namespace vbr::models {

/// E_q[log N(y | m, S^-1)] = mu1/2 - tr(y y^T mu2)/2 + y^T mu3 - mu4/2 - D/2 log(2 pi),
/// where mu are the Gaussian-Wishart expectations of (m, S).
double expected_log_component(const ExpectationParam &component, const Eigen::VectorXd &y);

/// Nodes 0..N-1: indicators z_i (z_i = 1 selects component a); N: pi0; N+1: a; N+2: b.
class GMMProvider final : public CoefficientProvider {
public:
  explicit GMMProvider(GMMData data);

  [[nodiscard]] Vector coefficient(std::size_t node, const MeanSnapshot &moments) const override;
  [[nodiscard]] double expected_log_joint(const MeanSnapshot &moments) const override;

  [[nodiscard]] std::size_t pi_index() const noexcept { return n_; }
  [[nodiscard]] std::size_t a_index() const noexcept { return n_ + 1; }
  [[nodiscard]] std::size_t b_index() const noexcept { return n_ + 2; }
  [[nodiscard]] const NaturalParam &component_prior() const noexcept { return prior_; }

private:
  [[nodiscard]] Vector component_coefficient(const MeanSnapshot &moments, bool first) const;

  GMMData data_;
  std::size_t n_;
  NaturalParam prior_;
  double prior_log_partition_;
};

/// Indicators jittered around 0.5, pi0 and both components at the prior. The default
/// sweep visits the components and pi0 before the indicators so that the jitter reaches
/// the components before the (identical) components flatten the indicators back to 0.5.
ModelSpec make_gmm(const GMMData &data, std::uint64_t seed = 0);

/// Posterior probability of component a for each observation.
Eigen::VectorXd responsibilities(const State &state, std::size_t n);

} // namespace vbr::models
