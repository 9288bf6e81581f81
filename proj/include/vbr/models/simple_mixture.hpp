#pragma once

#include "vbr/engine.hpp"
#include "vbr/models/data.hpp"

namespace vbr::models {

/// Single Bernoulli node z. E_q[log p(y, z)] = mu log(pi0 pa / ((1-pi0) pb)) + log((1-pi0) pb).
class SimpleMixtureProvider final : public CoefficientProvider {
public:
  explicit SimpleMixtureProvider(SimpleMixtureData data);

  [[nodiscard]] Vector coefficient(std::size_t node, const MeanSnapshot &moments) const override;
  [[nodiscard]] double expected_log_joint(const MeanSnapshot &moments) const override;

  [[nodiscard]] double log_odds() const noexcept { return log_odds_; }

private:
  SimpleMixtureData data_;
  double log_odds_;
  double offset_;
};

ModelSpec make_simple_mixture(const SimpleMixtureData &data, std::uint64_t seed = 0);

} // namespace vbr::models
