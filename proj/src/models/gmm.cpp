#include "vbr/models/gmm.hpp"

#include "vbr/models/two_level.hpp"
#include "vbr/special.hpp"

#include <numbers>

namespace vbr::models {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

NaturalParam component_prior_of(const GMMData &data) {
  data.validate();
  const int d = data.dim();
  return gaussian_wishart_natural({Vector::Zero(d), data.gamma0, data.W0, data.nu0});
}

} // namespace

double expected_log_component(const ExpectationParam &component, const Eigen::VectorXd &y) {
  const int d = component.family().dim;
  const auto mu = gw_blocks(component.values(), d);
  return 0.5 * mu.log_det - 0.5 * y.dot(mu.matrix * y) + y.dot(mu.vector) - 0.5 * mu.quad -
         0.5 * d * kLog2Pi;
}

GMMProvider::GMMProvider(GMMData data)
    : data_(std::move(data)), n_(static_cast<std::size_t>(data_.Y.rows())),
      prior_(component_prior_of(data_)), prior_log_partition_(log_partition(prior_)) {}

Vector GMMProvider::component_coefficient(const MeanSnapshot &moments, bool first) const {
  const int d = data_.dim();
  double weight_sum = 0.0;
  Matrix scatter = Matrix::Zero(d, d);
  Vector weighted = Vector::Zero(d);
  for (std::size_t i = 0; i < n_; ++i) {
    const double r = moments[i].values()[0];
    const double w = first ? r : 1.0 - r;
    const Vector y = data_.Y.row(static_cast<Eigen::Index>(i)).transpose();
    weight_sum += w;
    scatter.noalias() += w * y * y.transpose();
    weighted += w * y;
  }
  return prior_.values() + gw_flatten(0.5 * weight_sum, -0.5 * scatter, weighted, -0.5 * weight_sum);
}

Vector GMMProvider::coefficient(std::size_t node, const MeanSnapshot &moments) const {
  if (node < n_) {
    const Vector y = data_.Y.row(static_cast<Eigen::Index>(node)).transpose();
    return Vector::Constant(1, indicator_coefficient(moments[pi_index()],
                                                     expected_log_component(moments[a_index()], y),
                                                     expected_log_component(moments[b_index()], y)));
  }
  if (node == pi_index()) {
    double total = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      total += moments[i].values()[0];
    }
    return Eigen::Vector2d(data_.alpha0 - 1.0 + total,
                           static_cast<double>(n_) + data_.beta0 - 1.0 - total);
  }
  return component_coefficient(moments, node == a_index());
}

double GMMProvider::expected_log_joint(const MeanSnapshot &moments) const {
  const auto &pi0 = moments[pi_index()];
  double value = 0.0;
  for (std::size_t i = 0; i < n_; ++i) {
    const Vector y = data_.Y.row(static_cast<Eigen::Index>(i)).transpose();
    value += indicator_log_joint(moments[i].values()[0], pi0,
                                 expected_log_component(moments[a_index()], y),
                                 expected_log_component(moments[b_index()], y));
  }
  value += (data_.alpha0 - 1.0) * pi0.values()[0] + (data_.beta0 - 1.0) * pi0.values()[1] -
           special::log_beta(data_.alpha0, data_.beta0);
  for (std::size_t c : {a_index(), b_index()}) {
    value += prior_.values().dot(moments[c].values()) - prior_log_partition_;
  }
  return value;
}

ModelSpec make_gmm(const GMMData &data, std::uint64_t seed) {
  auto provider = std::make_shared<GMMProvider>(data);
  const std::size_t n = static_cast<std::size_t>(data.Y.rows());
  ModelSpec spec;
  spec.name = "gmm2";
  spec.initial = jittered_indicators(n, seed);
  spec.initial.emplace_back("pi0", beta_natural({data.alpha0, data.beta0}), NodeRole::Global);
  spec.initial.emplace_back("a", provider->component_prior(), NodeRole::Global);
  spec.initial.emplace_back("b", provider->component_prior(), NodeRole::Global);
  spec.sweep_order = {provider->a_index(), provider->b_index(), provider->pi_index()};
  for (std::size_t i = 0; i < n; ++i) {
    spec.sweep_order.push_back(i);
  }
  spec.provider = std::move(provider);
  return spec;
}

Eigen::VectorXd responsibilities(const State &state, std::size_t n) {
  Eigen::VectorXd r(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    r[static_cast<Eigen::Index>(i)] = state.at(i).mu().values()[0];
  }
  return r;
}

} // namespace vbr::models
