#include "vbr/models/matfac.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace vbr::models {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

} // namespace

MatFacProvider::MatFacProvider(MatrixFactorizationData data) : data_(std::move(data)) {
  data_.validate();
}

Vector MatFacProvider::coefficient(std::size_t node, const MeanSnapshot &moments) const {
  const int k = data_.K;
  const std::size_t n = rows();
  const std::size_t d = cols();
  Vector first = Vector::Zero(k);
  Matrix second = Matrix::Zero(k, k);
  if (node < n) {
    const auto i = static_cast<Eigen::Index>(node);
    for (std::size_t j = 0; j < d; ++j) {
      const auto &v = moments[n + j].values();
      first += v.head(k) * data_.Y(i, static_cast<Eigen::Index>(j));
      second += gaussian_second(v, k);
    }
    second.diagonal().array() += data_.delta_u;
  } else {
    const auto j = static_cast<Eigen::Index>(node - n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto &u = moments[i].values();
      first += u.head(k) * data_.Y(static_cast<Eigen::Index>(i), j);
      second += gaussian_second(u, k);
    }
    second.diagonal().array() += data_.delta_v;
  }
  return gaussian_flatten(first, -0.5 * second);
}

double MatFacProvider::expected_log_joint(const MeanSnapshot &moments) const {
  const int k = data_.K;
  const std::size_t n = rows();
  const std::size_t d = cols();
  double value = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto &u = moments[i].values();
    const auto u2 = gaussian_second(u, k);
    for (std::size_t j = 0; j < d; ++j) {
      const auto &v = moments[n + j].values();
      const double y = data_.Y(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      // E[(y - u^T v)^2] = y^2 - 2 y E[u]^T E[v] + tr(E[u u^T] E[v v^T])
      const double sq = y * y - 2.0 * y * u.head(k).dot(v.head(k)) +
                        (u2.array() * gaussian_second(v, k).array()).sum();
      value += -0.5 * sq - 0.5 * kLog2Pi;
    }
    value += -0.5 * data_.delta_u * u2.trace() + 0.5 * k * (std::log(data_.delta_u) - kLog2Pi);
  }
  for (std::size_t j = 0; j < d; ++j) {
    const auto v2 = gaussian_second(moments[n + j].values(), k);
    value += -0.5 * data_.delta_v * v2.trace() + 0.5 * k * (std::log(data_.delta_v) - kLog2Pi);
  }
  return value;
}

ModelSpec make_matfac(const MatrixFactorizationData &data, MatFacVariant variant, std::uint64_t seed) {
  data.validate();
  const int k = data.K;
  const bool delta_u = variant == MatFacVariant::ALS;
  const bool delta_v = variant != MatFacVariant::VMP;

  ModelSpec spec;
  switch (variant) {
  case MatFacVariant::VMP:
    spec.name = "matfac_vmp";
    break;
  case MatFacVariant::PPCA:
    spec.name = "matfac_ppca";
    break;
  case MatFacVariant::ALS:
    spec.name = "matfac_als";
    break;
  }
  spec.provider = std::make_shared<MatFacProvider>(data);

  const Matrix prior_u = data.delta_u * Matrix::Identity(k, k);
  const Matrix prior_v = data.delta_v * Matrix::Identity(k, k);
  for (Eigen::Index i = 0; i < data.Y.rows(); ++i) {
    spec.initial.emplace_back("u[" + std::to_string(i) + "]",
                              gaussian_natural({Vector::Zero(k), prior_u}), NodeRole::Local, delta_u);
  }
  // A zero-mean start is a fixed point of every variant, so V starts at a prior draw.
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(data.delta_v));
  for (Eigen::Index j = 0; j < data.Y.cols(); ++j) {
    Vector mean(k);
    for (int c = 0; c < k; ++c) {
      mean[c] = normal(rng);
    }
    spec.initial.emplace_back("v[" + std::to_string(j) + "]", gaussian_natural({mean, prior_v}),
                              NodeRole::Global, delta_v);
  }
  return spec;
}

Eigen::MatrixXd factor_means(const State &state, std::size_t first, std::size_t count) {
  if (count == 0) {
    return {};
  }
  const int k = state.at(first).family().dim;
  Eigen::MatrixXd out(static_cast<Eigen::Index>(count), k);
  for (std::size_t r = 0; r < count; ++r) {
    out.row(static_cast<Eigen::Index>(r)) = state.at(first + r).mu().values().head(k).transpose();
  }
  return out;
}

double regularized_loss(const MatrixFactorizationData &data, const Eigen::MatrixXd &U,
                        const Eigen::MatrixXd &V) {
  const Eigen::MatrixXd resid = data.Y - U * V.transpose();
  return 0.5 * resid.squaredNorm() + 0.5 * data.delta_u * U.squaredNorm() +
         0.5 * data.delta_v * V.squaredNorm();
}

} // namespace vbr::models
