#pragma once

#include "vbr/engine.hpp"
#include "vbr/models/data.hpp"

namespace vbr::models {

/// Nodes 0..N-1 are the Bernoulli indicators z_i, node N is the Beta node for pi0.
class TwoLevelProvider final : public CoefficientProvider {
public:
  TwoLevelProvider(TwoLevelMixtureData data, BaseMeasure global_base = BaseMeasure::Unit);

  [[nodiscard]] Vector coefficient(std::size_t node, const MeanSnapshot &moments) const override;
  [[nodiscard]] double expected_log_joint(const MeanSnapshot &moments) const override;
  [[nodiscard]] std::optional<Vector> base_measure_grad(std::size_t node) const override;

  [[nodiscard]] std::size_t global_index() const noexcept { return static_cast<std::size_t>(data_.size()); }
  [[nodiscard]] const TwoLevelMixtureData &data() const noexcept { return data_; }

private:
  TwoLevelMixtureData data_;
  BaseMeasure global_base_;
};

/// Locals start at mu = 0.5 +- U(0.05) (seeded); pi0 starts at its prior.
ModelSpec make_two_level(const TwoLevelMixtureData &data, std::uint64_t seed = 0,
                         BaseMeasure global_base = BaseMeasure::Unit);

/// Mixture-indicator coefficient shared by the mixture models:
/// (E log pi0 - E log(1-pi0)) + (log_a - log_b).
double indicator_coefficient(const ExpectationParam &pi0_moments, double log_a, double log_b);

/// E_q[log p(z_i | pi0)] + E_q[log p(y_i | z_i)] for one observation.
double indicator_log_joint(double mu_z, const ExpectationParam &pi0_moments, double log_a,
                           double log_b);

/// Bernoulli nodes z_0..z_{N-1} at 0.5 +- U(jitter).
State jittered_indicators(std::size_t n, std::uint64_t seed, double jitter = 0.05);

} // namespace vbr::models
