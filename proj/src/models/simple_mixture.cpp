#include "vbr/models/simple_mixture.hpp"

#include "vbr/models/two_level.hpp"

#include <cmath>

namespace vbr::models {

SimpleMixtureProvider::SimpleMixtureProvider(SimpleMixtureData data) : data_(data) {
  data_.validate();
  log_odds_ = std::log(data_.pi0) + std::log(data_.pa) - std::log1p(-data_.pi0) - std::log(data_.pb);
  offset_ = std::log1p(-data_.pi0) + std::log(data_.pb);
}

Vector SimpleMixtureProvider::coefficient(std::size_t /*node*/, const MeanSnapshot & /*moments*/) const {
  return Vector::Constant(1, log_odds_);
}

double SimpleMixtureProvider::expected_log_joint(const MeanSnapshot &moments) const {
  return moments.at(0).values()[0] * log_odds_ + offset_;
}

ModelSpec make_simple_mixture(const SimpleMixtureData &data, std::uint64_t seed) {
  ModelSpec spec;
  spec.name = "simple_mixture";
  spec.provider = std::make_shared<SimpleMixtureProvider>(data);
  spec.initial = jittered_indicators(1, seed);
  return spec;
}

} // namespace vbr::models
