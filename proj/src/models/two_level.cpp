#include "vbr/models/two_level.hpp"

#include "vbr/special.hpp"

#include <random>

namespace vbr::models {

double indicator_coefficient(const ExpectationParam &pi0_moments, double log_a, double log_b) {
  const auto &t = pi0_moments.values();
  return (t[0] + log_a) - (t[1] + log_b);
}

double indicator_log_joint(double mu_z, const ExpectationParam &pi0_moments, double log_a,
                           double log_b) {
  const auto &t = pi0_moments.values();
  return mu_z * (t[0] + log_a) + (1.0 - mu_z) * (t[1] + log_b);
}

State jittered_indicators(std::size_t n, std::uint64_t seed, double jitter) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> noise(-jitter, jitter);
  State nodes;
  nodes.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    nodes.emplace_back("z[" + std::to_string(i) + "]", bernoulli_natural(0.5 + noise(rng)),
                       NodeRole::Local);
  }
  return nodes;
}

TwoLevelProvider::TwoLevelProvider(TwoLevelMixtureData data, BaseMeasure global_base)
    : data_(std::move(data)), global_base_(global_base) {
  data_.validate();
}

Vector TwoLevelProvider::coefficient(std::size_t node, const MeanSnapshot &moments) const {
  const std::size_t n = global_index();
  if (node < n) {
    const auto i = static_cast<Eigen::Index>(node);
    return Vector::Constant(1, indicator_coefficient(moments[n], data_.log_pa[i], data_.log_pb[i]));
  }
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    total += moments[i].values()[0];
  }
  return Eigen::Vector2d(data_.alpha0 - 1.0 + total,
                         static_cast<double>(n) + data_.beta0 - 1.0 - total);
}

double TwoLevelProvider::expected_log_joint(const MeanSnapshot &moments) const {
  const std::size_t n = global_index();
  const auto &pi0 = moments[n];
  double value = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    value += indicator_log_joint(moments[i].values()[0], pi0, data_.log_pa[k], data_.log_pb[k]);
  }
  value += (data_.alpha0 - 1.0) * pi0.values()[0] + (data_.beta0 - 1.0) * pi0.values()[1] -
           special::log_beta(data_.alpha0, data_.beta0);
  return value;
}

std::optional<Vector> TwoLevelProvider::base_measure_grad(std::size_t node) const {
  if (node == global_index() && global_base_ != BaseMeasure::Unit) {
    return base_measure_gradient(FamilyDescriptor::beta(global_base_));
  }
  return std::nullopt;
}

ModelSpec make_two_level(const TwoLevelMixtureData &data, std::uint64_t seed,
                         BaseMeasure global_base) {
  ModelSpec spec;
  spec.name = "two_level";
  spec.provider = std::make_shared<TwoLevelProvider>(data, global_base);
  spec.initial = jittered_indicators(static_cast<std::size_t>(data.size()), seed);
  spec.initial.emplace_back("pi0", beta_natural({data.alpha0, data.beta0}, global_base),
                            NodeRole::Global);
  return spec;
}

} // namespace vbr::models
