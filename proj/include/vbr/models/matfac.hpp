#pragma once

#include "vbr/engine.hpp"
#include "vbr/models/data.hpp"

namespace vbr::models {

/// Which factor nodes use the delta approximation E[x x^T] ~ m m^T.
enum class MatFacVariant {
  VMP,  // full Gaussian moments everywhere
  PPCA, // v_j deterministic
  ALS,  // u_i and v_j deterministic
};

/// Nodes 0..N-1 are the rows u_i of U (local), nodes N..N+D-1 the rows v_j of V (global),
/// all K-dimensional Gaussians.
class MatFacProvider final : public CoefficientProvider {
public:
  explicit MatFacProvider(MatrixFactorizationData data);

  [[nodiscard]] Vector coefficient(std::size_t node, const MeanSnapshot &moments) const override;
  [[nodiscard]] double expected_log_joint(const MeanSnapshot &moments) const override;

  [[nodiscard]] std::size_t rows() const noexcept { return static_cast<std::size_t>(data_.Y.rows()); }
  [[nodiscard]] std::size_t cols() const noexcept { return static_cast<std::size_t>(data_.Y.cols()); }

private:
  MatrixFactorizationData data_;
};

/// U at the prior; V means drawn from the prior with `seed`, precision delta_v I.
ModelSpec make_matfac(const MatrixFactorizationData &data, MatFacVariant variant,
                      std::uint64_t seed = 0);

/// Posterior means of U (N x K) and V (D x K).
Eigen::MatrixXd factor_means(const State &state, std::size_t first, std::size_t count);

/// 1/2 sum (y_ij - u_i^T v_j)^2 + delta_u/2 sum |u_i|^2 + delta_v/2 sum |v_j|^2.
double regularized_loss(const MatrixFactorizationData &data, const Eigen::MatrixXd &U,
                        const Eigen::MatrixXd &V);

} // namespace vbr::models
