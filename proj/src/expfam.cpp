#include "vbr/expfam.hpp"

#include "vbr/error.hpp"
#include "vbr/special.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <numbers>
#include <sstream>

namespace vbr {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

std::string fmt_value(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

void require(bool ok, const std::string &what) {
  if (!ok) {
    throw DomainError(what);
  }
}

void require_size(const FamilyDescriptor &family, const Vector &values, const char *which) {
  if (values.size() != family.size()) {
    throw DomainError(std::string(which) + " for " + to_string(family) + " needs " +
                      std::to_string(family.size()) + " values, got " +
                      std::to_string(values.size()));
  }
  require(values.allFinite(), std::string(which) + " must be finite");
}

void symmetrize_blocks(const FamilyDescriptor &family, Vector &values) {
  const int d = family.dim;
  if (family.kind == FamilyKind::Gaussian) {
    auto block = linalg::matrix_block(values, d, d);
    block = linalg::symmetrize(block);
  } else if (family.kind == FamilyKind::GaussianWishart) {
    auto block = linalg::matrix_block(values, 1, d);
    block = linalg::symmetrize(block);
  }
}

double beta_offset(BaseMeasure base) { return base == BaseMeasure::Haldane ? 0.0 : 1.0; }

// Gaussian-Wishart conventional parameters without re-validating.
GaussianWishartParams gw_unpack(const FamilyDescriptor &family, const Vector &values) {
  const int d = family.dim;
  const auto blocks = gw_blocks(values, d);
  GaussianWishartParams p;
  p.gamma = -2.0 * blocks.quad;
  p.mean = blocks.vector / p.gamma;
  p.dof = 2.0 * blocks.log_det + d;
  const Matrix w_inv = -2.0 * blocks.matrix - p.gamma * p.mean * p.mean.transpose();
  p.scale = linalg::spd_inverse(w_inv, "Gaussian-Wishart W^-1");
  return p;
}

void validate_natural(const FamilyDescriptor &family, const Vector &values) {
  switch (family.kind) {
  case FamilyKind::Bernoulli:
    return;
  case FamilyKind::Beta: {
    const double off = beta_offset(family.base);
    require(values[0] + off > 0.0,
            "Beta natural parameter requires alpha > 0 (alpha = " + fmt_value(values[0] + off) + ")");
    require(values[1] + off > 0.0,
            "Beta natural parameter requires beta > 0 (beta = " + fmt_value(values[1] + off) + ")");
    return;
  }
  case FamilyKind::Gaussian: {
    const Matrix precision = -2.0 * gaussian_second(values, family.dim);
    linalg::spd_factor(precision, "Gaussian precision S");
    return;
  }
  case FamilyKind::GaussianWishart: {
    const int d = family.dim;
    const auto blocks = gw_blocks(values, d);
    const double gamma = -2.0 * blocks.quad;
    require(gamma > 0.0, "Gaussian-Wishart requires gamma > 0 (gamma = " + fmt_value(gamma) + ")");
    const double dof = 2.0 * blocks.log_det + d;
    require(dof > d - 1, "Gaussian-Wishart requires nu > D-1 (nu = " + fmt_value(dof) + ")");
    const Vector m = blocks.vector / gamma;
    linalg::spd_factor(-2.0 * blocks.matrix - gamma * m * m.transpose(), "Gaussian-Wishart W^-1");
    return;
  }
  }
}

void validate_mean(const FamilyDescriptor &family, const Vector &values) {
  switch (family.kind) {
  case FamilyKind::Bernoulli:
    require(values[0] > 0.0 && values[0] < 1.0,
            "Bernoulli mean must lie in (0, 1) (got " + fmt_value(values[0]) + ")");
    return;
  case FamilyKind::Beta:
    require(values[0] < 0.0 && values[1] < 0.0,
            "Beta expectations E[log z], E[log(1-z)] must both be negative");
    return;
  case FamilyKind::Gaussian: {
    const int d = family.dim;
    const Vector m = values.head(d);
    const Matrix cov = gaussian_second(values, d) - m * m.transpose();
    require(linalg::is_psd(cov), "Gaussian E[zz^T] - E[z]E[z]^T must be positive semi-definite");
    return;
  }
  case FamilyKind::GaussianWishart: {
    const int d = family.dim;
    const auto blocks = gw_blocks(values, d);
    const auto llt = linalg::spd_factor(blocks.matrix, "Gaussian-Wishart E[Z2]");
    const double slack = blocks.quad - blocks.vector.dot(llt.solve(blocks.vector));
    require(slack >= -1e-12 * std::max(1.0, std::abs(blocks.quad)),
            "Gaussian-Wishart E[z1^T Z2 z1] - E[Z2 z1]^T E[Z2]^-1 E[Z2 z1] must be >= 0");
    return;
  }
  }
}

NaturalParam beta_mean_to_nat(const ExpectationParam &mu) {
  const double t1 = mu.values()[0];
  const double t2 = mu.values()[1];
  const double p = std::exp(t1);
  const double r = std::exp(t2);
  if (!(p + r < 1.0)) {
    throw DomainError("Beta expectations are not realizable: exp(E log z) + exp(E log(1-z)) must be < 1");
  }
  // psi(x) ~ log(x - 1/2) gives a closed-form starting point.
  const double total = (1.0 - 0.5 * (p + r)) / (1.0 - p - r);
  Eigen::Vector2d log_shape(std::log(std::max(0.5 + p * (total - 0.5), 1e-3)),
                            std::log(std::max(0.5 + r * (total - 0.5), 1e-3)));

  auto residual = [&](const Eigen::Vector2d &ls) {
    const double a = std::exp(ls[0]);
    const double b = std::exp(ls[1]);
    const double common = special::digamma(a + b);
    return Eigen::Vector2d(special::digamma(a) - common - t1, special::digamma(b) - common - t2);
  };

  constexpr int kMaxIter = 200;
  constexpr double kTol = 1e-12;
  Eigen::Vector2d res = residual(log_shape);
  for (int iter = 0; iter < kMaxIter && res.cwiseAbs().maxCoeff() > kTol; ++iter) {
    const double a = std::exp(log_shape[0]);
    const double b = std::exp(log_shape[1]);
    const double common = special::trigamma(a + b);
    Eigen::Matrix2d jac;
    jac << (special::trigamma(a) - common) * a, -common * b, -common * a,
        (special::trigamma(b) - common) * b;
    const Eigen::Vector2d step = jac.partialPivLu().solve(res);
    double scale = 1.0;
    Eigen::Vector2d candidate = log_shape - step;
    Eigen::Vector2d cand_res = residual(candidate);
    while (!(cand_res.norm() < res.norm()) && scale > 1e-6) {
      scale *= 0.5;
      candidate = log_shape - scale * step;
      cand_res = residual(candidate);
    }
    if (!(cand_res.norm() < res.norm())) {
      break;
    }
    log_shape = candidate;
    res = cand_res;
  }
  const double err = res.cwiseAbs().maxCoeff();
  if (!(err <= kTol)) {
    throw NumericalError("Beta mean_to_nat did not converge (residual " + fmt_value(err) + ")", err);
  }
  return beta_natural({std::exp(log_shape[0]), std::exp(log_shape[1])}, mu.family().base);
}

// Solves sum_d psi((nu+1-d)/2) - D log(nu/2) = target for nu > D-1.
double solve_wishart_dof(double target, int d) {
  auto g = [d](double nu) { return special::multi_digamma(0.5 * nu, d) - d * std::log(0.5 * nu); };
  auto dg = [d](double nu) {
    double s = 0.0;
    for (int k = 1; k <= d; ++k) {
      s += special::trigamma(0.5 * (nu + 1 - k));
    }
    return 0.5 * s - d / nu;
  };
  double lo = d - 1;
  double hi = d + 1.0;
  while (g(hi) < target) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e300) {
      throw NumericalError("Wishart dof bracket overflow", target);
    }
  }
  double nu = 0.5 * (lo + hi);
  for (int iter = 0; iter < 500; ++iter) {
    const double f = g(nu) - target;
    if (f > 0) {
      hi = nu;
    } else {
      lo = nu;
    }
    if (std::abs(f) < 1e-14 * std::max(1.0, std::abs(target)) || (hi - lo) < 1e-15 * hi) {
      return nu;
    }
    double next = nu - f / dg(nu);
    if (!(next > lo && next < hi)) {
      next = 0.5 * (lo + hi);
    }
    nu = next;
  }
  const double err = std::abs(g(nu) - target);
  if (err < 1e-10) {
    return nu;
  }
  throw NumericalError("Wishart dof solve did not converge", err);
}

NaturalParam gw_mean_to_nat(const ExpectationParam &mu) {
  const int d = mu.family().dim;
  const auto blocks = gw_blocks(mu.values(), d);
  const auto llt = linalg::spd_factor(blocks.matrix, "Gaussian-Wishart E[Z2]");
  const Vector mean = llt.solve(blocks.vector);
  const double slack = blocks.quad - blocks.vector.dot(mean);
  if (!(slack > 0.0)) {
    throw DomainError("Gaussian-Wishart expectations are degenerate (zero mean-precision slack)");
  }
  const double target = blocks.log_det - linalg::log_det(llt);
  if (!(target < 0.0)) {
    throw DomainError("Gaussian-Wishart expectations are not realizable: E log|Z2| must be < log|E Z2|");
  }
  const double dof = solve_wishart_dof(target, d);
  GaussianWishartParams p;
  p.mean = mean;
  p.gamma = d / slack;
  p.dof = dof;
  p.scale = linalg::symmetrize(blocks.matrix / dof);
  return gaussian_wishart_natural(p);
}

} // namespace

Eigen::Index FamilyDescriptor::size() const {
  switch (kind) {
  case FamilyKind::Bernoulli:
    return 1;
  case FamilyKind::Beta:
    return 2;
  case FamilyKind::Gaussian:
    return dim + dim * dim;
  case FamilyKind::GaussianWishart:
    return 2 + dim + dim * dim;
  }
  return 0;
}

void FamilyDescriptor::validate() const {
  require(dim >= 1, "family dimension must be positive");
  if (kind == FamilyKind::Bernoulli || kind == FamilyKind::Beta) {
    require(dim == 1, to_string(kind) + " family must have dim = 1");
  }
  require(base == BaseMeasure::Unit || kind == FamilyKind::Beta,
          "the Haldane base measure is only defined for the Beta family");
}

std::string to_string(FamilyKind kind) {
  switch (kind) {
  case FamilyKind::Bernoulli:
    return "bernoulli";
  case FamilyKind::Beta:
    return "beta";
  case FamilyKind::Gaussian:
    return "gaussian";
  case FamilyKind::GaussianWishart:
    return "gaussian_wishart";
  }
  return "unknown";
}

std::string to_string(const FamilyDescriptor &family) {
  std::string s = to_string(family.kind);
  if (family.kind == FamilyKind::Gaussian || family.kind == FamilyKind::GaussianWishart) {
    s += "(" + std::to_string(family.dim) + ")";
  }
  if (family.base == BaseMeasure::Haldane) {
    s += "[haldane]";
  }
  return s;
}

NaturalParam::NaturalParam(FamilyDescriptor family, Vector values)
    : family_(family), values_(std::move(values)) {
  family_.validate();
  require_size(family_, values_, "natural parameter");
  symmetrize_blocks(family_, values_);
  validate_natural(family_, values_);
}

ExpectationParam::ExpectationParam(FamilyDescriptor family, Vector values)
    : family_(family), values_(std::move(values)) {
  family_.validate();
  require_size(family_, values_, "expectation parameter");
  symmetrize_blocks(family_, values_);
  validate_mean(family_, values_);
}

GwBlocks gw_blocks(const Vector &flat, int dim) {
  const Eigen::Index d2 = static_cast<Eigen::Index>(dim) * dim;
  return {flat[0], linalg::matrix_block(flat, 1, dim), flat.segment(1 + d2, dim), flat[1 + d2 + dim]};
}

Vector gw_flatten(double log_det, const Matrix &matrix, const Vector &vector, double quad) {
  const Eigen::Index d = vector.size();
  Vector flat(2 + d + d * d);
  flat[0] = log_det;
  flat.segment(1, d * d) = matrix.reshaped();
  flat.segment(1 + d * d, d) = vector;
  flat[1 + d * d + d] = quad;
  return flat;
}

Vector gaussian_flatten(const Vector &first, const Matrix &second) {
  const Eigen::Index d = first.size();
  Vector flat(d + d * d);
  flat.head(d) = first;
  flat.tail(d * d) = second.reshaped();
  return flat;
}

NaturalParam bernoulli_natural(double prob) {
  require(prob > 0.0 && prob < 1.0, "Bernoulli probability must lie in (0, 1)");
  return {FamilyDescriptor::bernoulli(), Vector::Constant(1, std::log(prob) - std::log1p(-prob))};
}

double bernoulli_prob(const NaturalParam &lambda) {
  return 1.0 / (1.0 + std::exp(-lambda.values()[0]));
}

NaturalParam beta_natural(BetaShape shape, BaseMeasure base) {
  const double off = beta_offset(base);
  return {FamilyDescriptor::beta(base), Eigen::Vector2d(shape.alpha - off, shape.beta - off)};
}

BetaShape beta_shape(const NaturalParam &lambda) {
  const double off = beta_offset(lambda.family().base);
  return {lambda.values()[0] + off, lambda.values()[1] + off};
}

NaturalParam gaussian_natural(const GaussianParams &params) {
  const Eigen::Index d = params.mean.size();
  require(params.precision.rows() == d && params.precision.cols() == d,
          "Gaussian precision must be D x D");
  return {FamilyDescriptor::gaussian(static_cast<int>(d)),
          gaussian_flatten(params.precision * params.mean, -0.5 * params.precision)};
}

GaussianParams gaussian_params(const NaturalParam &lambda) {
  const int d = lambda.family().dim;
  GaussianParams p;
  p.precision = -2.0 * gaussian_second(lambda.values(), d);
  const auto llt = linalg::spd_factor(p.precision, "Gaussian precision S");
  p.mean = llt.solve(Vector(lambda.values().head(d)));
  return p;
}

NaturalParam gaussian_wishart_natural(const GaussianWishartParams &params) {
  const Eigen::Index d = params.mean.size();
  require(params.scale.rows() == d && params.scale.cols() == d, "Gaussian-Wishart W must be D x D");
  require(params.gamma > 0.0, "Gaussian-Wishart requires gamma > 0");
  const Matrix w_inv = linalg::spd_inverse(params.scale, "Gaussian-Wishart W");
  return {FamilyDescriptor::gaussian_wishart(static_cast<int>(d)),
          gw_flatten(0.5 * (params.dof - static_cast<double>(d)),
                     -0.5 * (w_inv + params.gamma * params.mean * params.mean.transpose()),
                     params.gamma * params.mean, -0.5 * params.gamma)};
}

GaussianWishartParams gaussian_wishart_params(const NaturalParam &lambda) {
  return gw_unpack(lambda.family(), lambda.values());
}

NaturalParam rebase(const NaturalParam &lambda, BaseMeasure base) {
  require(lambda.family().kind == FamilyKind::Beta, "rebase is only defined for the Beta family");
  return beta_natural(beta_shape(lambda), base);
}

ExpectationParam gw_moments(const NaturalParam &lambda) {
  require(lambda.family().kind == FamilyKind::GaussianWishart,
          "gw_moments requires a Gaussian-Wishart natural parameter");
  const int d = lambda.family().dim;
  const auto p = gw_unpack(lambda.family(), lambda.values());
  const auto w_llt = linalg::spd_factor(p.scale, "Gaussian-Wishart W");
  const double e_log_det =
      special::multi_digamma(0.5 * p.dof, d) + d * std::numbers::ln2 + linalg::log_det(w_llt);
  const Matrix e_prec = p.dof * p.scale;
  const Vector e_prec_mean = e_prec * p.mean;
  const double e_quad = p.mean.dot(e_prec_mean) + d / p.gamma;
  return {lambda.family(), gw_flatten(e_log_det, e_prec, e_prec_mean, e_quad)};
}

ExpectationParam nat_to_mean(const NaturalParam &lambda) {
  const auto &family = lambda.family();
  switch (family.kind) {
  case FamilyKind::Bernoulli: {
    double p = bernoulli_prob(lambda);
    // keep the cache inside the open interval for extreme logits
    p = std::clamp(p, std::numeric_limits<double>::min(), 1.0 - std::numeric_limits<double>::epsilon() / 2);
    return {family, Vector::Constant(1, p)};
  }
  case FamilyKind::Beta: {
    const auto s = beta_shape(lambda);
    const double common = special::digamma(s.alpha + s.beta);
    return {family, Eigen::Vector2d(special::digamma(s.alpha) - common,
                                    special::digamma(s.beta) - common)};
  }
  case FamilyKind::Gaussian: {
    const auto p = gaussian_params(lambda);
    const Matrix cov = linalg::spd_inverse(p.precision, "Gaussian precision S");
    return {family, gaussian_flatten(p.mean, cov + p.mean * p.mean.transpose())};
  }
  case FamilyKind::GaussianWishart:
    return gw_moments(lambda);
  }
  throw DomainError("unknown family");
}

NaturalParam mean_to_nat(const ExpectationParam &mu) {
  const auto &family = mu.family();
  const Vector &v = mu.values();
  switch (family.kind) {
  case FamilyKind::Bernoulli:
    return bernoulli_natural(v[0]);
  case FamilyKind::Beta:
    return beta_mean_to_nat(mu);
  case FamilyKind::Gaussian: {
    const int d = family.dim;
    const Vector m = v.head(d);
    const Matrix cov = gaussian_second(v, d) - m * m.transpose();
    return gaussian_natural({m, linalg::spd_inverse(cov, "Gaussian covariance")});
  }
  case FamilyKind::GaussianWishart:
    return gw_mean_to_nat(mu);
  }
  throw DomainError("unknown family");
}

double log_partition(const NaturalParam &lambda) {
  const auto &family = lambda.family();
  const int d = family.dim;
  switch (family.kind) {
  case FamilyKind::Bernoulli:
    return special::softplus(lambda.values()[0]);
  case FamilyKind::Beta: {
    const auto s = beta_shape(lambda);
    return special::log_beta(s.alpha, s.beta);
  }
  case FamilyKind::Gaussian: {
    const auto p = gaussian_params(lambda);
    const auto llt = linalg::spd_factor(p.precision, "Gaussian precision S");
    return 0.5 * p.mean.dot(p.precision * p.mean) - 0.5 * linalg::log_det(llt) + 0.5 * d * kLog2Pi;
  }
  case FamilyKind::GaussianWishart: {
    const auto p = gw_unpack(family, lambda.values());
    const auto w_llt = linalg::spd_factor(p.scale, "Gaussian-Wishart W");
    return 0.5 * d * (kLog2Pi - std::log(p.gamma)) + 0.5 * p.dof * d * std::numbers::ln2 +
           0.5 * p.dof * linalg::log_det(w_llt) + special::log_multigamma(0.5 * p.dof, d);
  }
  }
  throw DomainError("unknown family");
}

Vector base_measure_gradient(const FamilyDescriptor &family) {
  Vector grad = Vector::Zero(family.size());
  if (family.base == BaseMeasure::Haldane) {
    // log h(z) = -log z - log(1-z) = -<T(z), (1, 1)>
    grad.setConstant(-1.0);
  }
  return grad;
}

double expected_log_base_measure(const NaturalParam &lambda) {
  const auto &family = lambda.family();
  if (family.base == BaseMeasure::Unit) {
    return 0.0;
  }
  return base_measure_gradient(family).dot(nat_to_mean(lambda).values());
}

double inner(const NaturalParam &lambda, const ExpectationParam &mu) {
  require(lambda.family() == mu.family(), "inner product requires matching families");
  return lambda.values().dot(mu.values());
}

double entropy(const NaturalParam &lambda) {
  const auto mu = nat_to_mean(lambda);
  return log_partition(lambda) - inner(lambda, mu) - expected_log_base_measure(lambda);
}

double kl_divergence(const NaturalParam &lambda1, const NaturalParam &lambda2) {
  require(lambda1.family() == lambda2.family(),
          "KL divergence requires matching families (" + to_string(lambda1.family()) + " vs " +
              to_string(lambda2.family()) + ")");
  const auto mu1 = nat_to_mean(lambda1);
  const double kl = log_partition(lambda2) - log_partition(lambda1) -
                    (lambda2.values() - lambda1.values()).dot(mu1.values());
  return std::max(kl, 0.0);
}

} // namespace vbr
