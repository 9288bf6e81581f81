#pragma once

#include "vbr/engine.hpp"
#include "vbr/models/data.hpp"

#include <functional>

namespace vbr::models {

/// Log prior on pi0 split as <linear, (log pi0, log(1-pi0))> + term(logit pi0) + constant.
/// Only `term` is non-conjugate; its gradient enters through pseudo_prior.
struct PriorDecomposition {
  Eigen::Vector2d linear = Eigen::Vector2d::Zero();
  std::function<double(double)> term;
  double constant = 0.0;
};

/// log p(pi0) = -log(pi0 (1-pi0)) - (logit(pi0) - m)^2 / 2 - log(2 pi)/2.
PriorDecomposition logit_normal_prior(double m);

/// The whole log Beta(a0, b0) density routed through the non-conjugate path.
PriorDecomposition beta_density_prior(double a0, double b0);

constexpr int kPseudoPriorOrder = 200;

/// Beta expectations E_q[f(logit z)] by Gauss-Legendre on a sinh-stretched logit axis.
/// The rule is centred and scaled by the mean and spread of logit z under q.
struct BetaExpectation {
  double value;
  Eigen::Vector2d natural_gradient; // grad_mu E_q[f]
  Eigen::Matrix2d fisher;           // Cov_q(T, T)
};

BetaExpectation beta_expectation(const NaturalParam &beta_lambda,
                                 const std::function<double(double)> &term, int order);

/// grad_{mu0} E_q[term] = F^-1 Cov_q(T, term) for a Beta q. Throws NumericalError when
/// doubling the node count moves the result by more than 1e-6.
Eigen::Vector2d pseudo_prior(const NaturalParam &beta_lambda,
                             const std::function<double(double)> &term,
                             int order = kPseudoPriorOrder);

/// Two-level mixture with a non-conjugate pi0 prior. Node layout matches TwoLevelProvider.
class LogitNormalProvider final : public CoefficientProvider {
public:
  LogitNormalProvider(Eigen::VectorXd log_pa, Eigen::VectorXd log_pb, PriorDecomposition prior);

  [[nodiscard]] Vector coefficient(std::size_t node, const MeanSnapshot &moments) const override;
  [[nodiscard]] double expected_log_joint(const MeanSnapshot &moments) const override;
  [[nodiscard]] bool is_conjugate(std::size_t node) const override;

  [[nodiscard]] std::size_t global_index() const noexcept { return static_cast<std::size_t>(log_pa_.size()); }

private:
  Eigen::VectorXd log_pa_;
  Eigen::VectorXd log_pb_;
  PriorDecomposition prior_;
};

/// pi0 starts at Beta(1, 1).
ModelSpec make_logit_normal(const LogitNormalMixtureData &data, std::uint64_t seed = 0);

ModelSpec make_logit_normal(const LogitNormalMixtureData &data, PriorDecomposition prior,
                            std::uint64_t seed = 0);

} // namespace vbr::models
