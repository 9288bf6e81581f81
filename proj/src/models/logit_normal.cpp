#include "vbr/models/logit_normal.hpp"

#include "vbr/error.hpp"
#include "vbr/models/two_level.hpp"
#include "vbr/quadrature.hpp"
#include "vbr/special.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace vbr::models {

namespace {

constexpr double kShapeFloor = 1e-2;
constexpr double kDoublingTolerance = 1e-6;
// log-density drop covered on each side of the rule
constexpr double kTailDrop = 50.0;
constexpr double kMinSpreads = 12.0;

} // namespace

PriorDecomposition logit_normal_prior(double m) {
  PriorDecomposition prior;
  prior.linear = Eigen::Vector2d(-1.0, -1.0);
  prior.term = [m](double x) { return -0.5 * (x - m) * (x - m); };
  prior.constant = -0.5 * std::log(2.0 * std::numbers::pi);
  return prior;
}

PriorDecomposition beta_density_prior(double a0, double b0) {
  if (!(a0 > 0.0 && b0 > 0.0)) {
    throw DomainError("Beta prior requires a0, b0 > 0");
  }
  PriorDecomposition prior;
  const double log_norm = special::log_beta(a0, b0);
  prior.term = [a0, b0, log_norm](double x) {
    return (a0 - 1.0) * special::log_sigmoid(x) + (b0 - 1.0) * special::log_sigmoid(-x) - log_norm;
  };
  return prior;
}

BetaExpectation beta_expectation(const NaturalParam &beta_lambda,
                                 const std::function<double(double)> &term, int order) {
  if (beta_lambda.family().kind != FamilyKind::Beta) {
    throw DomainError("pseudo prior requires a Beta node");
  }
  const auto [alpha, beta] = beta_shape(beta_lambda);
  if (!(alpha >= kShapeFloor && beta >= kShapeFloor)) {
    throw DomainError("pseudo prior quadrature requires alpha, beta >= 0.01");
  }
  // x = logit z has mean psi(a) - psi(b) and variance psi'(a) + psi'(b).
  const double centre = special::digamma(alpha) - special::digamma(beta);
  const double spread = std::sqrt(special::trigamma(alpha) + special::trigamma(beta));
  const double t_lo = std::asinh(std::max(kTailDrop / (alpha * spread), kMinSpreads));
  const double t_hi = std::asinh(std::max(kTailDrop / (beta * spread), kMinSpreads));
  const auto rule = gauss_legendre(order, -t_lo, t_hi);
  const double log_norm = special::log_beta(alpha, beta);

  const Eigen::Index n = rule.nodes.size();
  Eigen::VectorXd w(n), f(n);
  Eigen::MatrixXd stats(n, 2);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double t = rule.nodes[k];
    const double x = centre + spread * std::sinh(t);
    const double log_z = special::log_sigmoid(x);
    const double log_1mz = special::log_sigmoid(-x);
    // density of x = logit z: z^a (1-z)^b / B(a, b); dx/dt = spread cosh t
    w[k] = rule.weights[k] * spread * std::cosh(t) *
           std::exp(alpha * log_z + beta * log_1mz - log_norm);
    stats(k, 0) = log_z;
    stats(k, 1) = log_1mz;
    f[k] = term(x);
  }
  w /= w.sum();
  const Eigen::RowVector2d mean_stats = w.transpose() * stats;
  const double mean_f = w.dot(f);
  const Eigen::MatrixXd centred = stats.rowwise() - mean_stats;
  const Eigen::VectorXd centred_f = f.array() - mean_f;

  BetaExpectation out;
  out.value = mean_f;
  out.fisher = centred.transpose() * w.asDiagonal() * centred;
  const Eigen::Vector2d cov = centred.transpose() * (w.array() * centred_f.array()).matrix();
  out.natural_gradient = out.fisher.ldlt().solve(cov);
  return out;
}

Eigen::Vector2d pseudo_prior(const NaturalParam &beta_lambda,
                             const std::function<double(double)> &term, int order) {
  const auto base = beta_expectation(beta_lambda, term, order);
  const auto doubled = beta_expectation(beta_lambda, term, 2 * order);
  const double change = (base.natural_gradient - doubled.natural_gradient).cwiseAbs().maxCoeff();
  if (!(change <= kDoublingTolerance)) {
    throw NumericalError("pseudo prior quadrature did not converge: doubling " +
                             std::to_string(order) + " nodes changed the result by " +
                             std::to_string(change),
                         change);
  }
  return base.natural_gradient;
}

LogitNormalProvider::LogitNormalProvider(Eigen::VectorXd log_pa, Eigen::VectorXd log_pb,
                                         PriorDecomposition prior)
    : log_pa_(std::move(log_pa)), log_pb_(std::move(log_pb)), prior_(std::move(prior)) {
  if (log_pa_.size() < 1 || log_pa_.size() != log_pb_.size()) {
    throw DomainError("logit-normal mixture needs N >= 1 matching log_pa/log_pb entries");
  }
  if (!prior_.term) {
    throw DomainError("non-conjugate prior term is missing");
  }
}

bool LogitNormalProvider::is_conjugate(std::size_t node) const { return node != global_index(); }

Vector LogitNormalProvider::coefficient(std::size_t node, const MeanSnapshot &moments) const {
  const std::size_t n = global_index();
  if (node < n) {
    const auto i = static_cast<Eigen::Index>(node);
    return Vector::Constant(1, indicator_coefficient(moments[n], log_pa_[i], log_pb_[i]));
  }
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    total += moments[i].values()[0];
  }
  const NaturalParam lambda0 = mean_to_nat(moments[n]);
  const Eigen::Vector2d pseudo = pseudo_prior(lambda0, prior_.term);
  return Eigen::Vector2d(total, static_cast<double>(n) - total) + prior_.linear + pseudo;
}

double LogitNormalProvider::expected_log_joint(const MeanSnapshot &moments) const {
  const std::size_t n = global_index();
  const auto &pi0 = moments[n];
  double value = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    value += indicator_log_joint(moments[i].values()[0], pi0, log_pa_[k], log_pb_[k]);
  }
  const NaturalParam lambda0 = mean_to_nat(pi0);
  value += prior_.linear.dot(pi0.values()) +
           beta_expectation(lambda0, prior_.term, kPseudoPriorOrder).value + prior_.constant;
  return value;
}

ModelSpec make_logit_normal(const LogitNormalMixtureData &data, std::uint64_t seed) {
  return make_logit_normal(data, logit_normal_prior(data.m), seed);
}

ModelSpec make_logit_normal(const LogitNormalMixtureData &data, PriorDecomposition prior,
                            std::uint64_t seed) {
  data.validate();
  ModelSpec spec;
  spec.name = "logitnormal";
  spec.provider = std::make_shared<LogitNormalProvider>(data.log_pa, data.log_pb, std::move(prior));
  spec.initial = jittered_indicators(static_cast<std::size_t>(data.log_pa.size()), seed);
  spec.initial.emplace_back("pi0", beta_natural({1.0, 1.0}), NodeRole::Global);
  return spec;
}

} // namespace vbr::models
