#include "vbr/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace vbr::oracle {

namespace {

double lbeta(double a, double b) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); }

double lse(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) {
    return b;
  }
  if (b == -std::numeric_limits<double>::infinity()) {
    return a;
  }
  const double top = std::max(a, b);
  return top + std::log(std::exp(a - top) + std::exp(b - top));
}

struct Rule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};

// Golub-Welsch: eigen-decomposition of the Jacobi matrix.
Rule golub_welsch(const Eigen::VectorXd &offdiag, double mass) {
  const Eigen::Index n = offdiag.size() + 1;
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index k = 0; k + 1 < n; ++k) {
    jacobi(k, k + 1) = offdiag[k];
    jacobi(k + 1, k) = offdiag[k];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
  Rule rule;
  rule.nodes = eig.eigenvalues();
  rule.weights = mass * eig.eigenvectors().row(0).array().square().transpose();
  return rule;
}

Rule legendre_rule(int n) {
  Eigen::VectorXd off(n - 1);
  for (int k = 1; k < n; ++k) {
    off[k - 1] = k / std::sqrt(4.0 * k * k - 1.0);
  }
  return golub_welsch(off, 2.0);
}

// Probabilists' Hermite: weight exp(-x^2/2) / sqrt(2 pi).
Rule hermite_rule(int n) {
  Eigen::VectorXd off(n - 1);
  for (int k = 1; k < n; ++k) {
    off[k - 1] = std::sqrt(static_cast<double>(k));
  }
  return golub_welsch(off, 1.0);
}

// log sigma(x) without overflow
double log_sig(double x) { return x > 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x)); }

double beta_expect(const BetaWeight &w, const std::function<double(double)> &f, int order) {
  // z = sigma(pi sinh t): double-exponential clustering at both endpoints. The upper end
  // stops at s = 36 because 1 - z is not representable beyond it, so integrands may use
  // log(1 - z) safely.
  const double s_lo = std::clamp(60.0 / w.alpha, 40.0, 700.0);
  const double s_hi = 36.0;
  const double log_norm = lbeta(w.alpha, w.beta);
  // tail masses beyond the cut-offs, from the density's exponential tails in s
  const double tail = std::exp(-w.alpha * s_lo - log_norm) / w.alpha + std::exp(-w.beta * s_hi - log_norm) / w.beta;
  if (tail > 1e-11) {
    std::ostringstream os;
    os << "Beta(" << w.alpha << ", " << w.beta << ") weight has tail mass " << tail
       << " outside the representable range";
    throw std::invalid_argument(os.str());
  }
  const double t_lo = -std::asinh(s_lo / std::numbers::pi);
  const double t_hi = std::asinh(s_hi / std::numbers::pi);
  const double mid = 0.5 * (t_hi + t_lo);
  const double half = 0.5 * (t_hi - t_lo);
  const Rule rule = legendre_rule(order);
  double sum = 0.0;
  for (Eigen::Index k = 0; k < rule.nodes.size(); ++k) {
    const double t = mid + half * rule.nodes[k];
    const double s = std::numbers::pi * std::sinh(t);
    const double jac = std::numbers::pi * std::cosh(t) * half;
    const double dens = std::exp(w.alpha * log_sig(s) + w.beta * log_sig(-s) - log_norm);
    if (dens == 0.0) {
      continue;
    }
    const double z = s > 0 ? 1.0 / (1.0 + std::exp(-s)) : std::exp(s) / (1.0 + std::exp(s));
    sum += rule.weights[k] * jac * dens * f(z);
  }
  return sum;
}

double gaussian_expect(const GaussianWeight &w, const std::function<double(double)> &f, int order) {
  const Rule rule = hermite_rule(order);
  const double sd = std::sqrt(w.variance);
  double sum = 0.0;
  for (Eigen::Index k = 0; k < rule.nodes.size(); ++k) {
    sum += rule.weights[k] * f(w.mean + sd * rule.nodes[k]);
  }
  return sum;
}

double expect_once(const Weight &weight, const std::function<double(double)> &f, int order) {
  if (const auto *b = std::get_if<BetaWeight>(&weight)) {
    return beta_expect(*b, f, order);
  }
  return gaussian_expect(std::get<GaussianWeight>(weight), f, order);
}

} // namespace

double exact_simple_posterior(const SimpleMixtureData &data) {
  const double a = data.pi0 * data.pa;
  const double b = (1.0 - data.pi0) * data.pb;
  return a / (a + b);
}

EnumerationResult enumerate_two_level(const TwoLevelMixtureData &data) {
  const auto n = static_cast<int>(data.log_pa.size());
  if (n < 1 || n > kMaxEnumeration || data.log_pb.size() != n) {
    throw std::invalid_argument("enumeration supports 1 <= N <= 20 observations");
  }
  const double prior_norm = lbeta(data.alpha0, data.beta0);
  std::vector<double> log_count(n + 1);
  for (int k = 0; k <= n; ++k) {
    log_count[k] = lbeta(data.alpha0 + k, data.beta0 + n - k) - prior_norm;
  }
  const double neg_inf = -std::numeric_limits<double>::infinity();
  double total = neg_inf;
  std::vector<double> on(n, neg_inf);
  double best = neg_inf;
  std::uint32_t best_config = 0;
  const std::uint32_t configs = 1u << n;
  for (std::uint32_t c = 0; c < configs; ++c) {
    double lp = 0.0;
    int k = 0;
    for (int i = 0; i < n; ++i) {
      if (c & (1u << i)) {
        lp += data.log_pa[i];
        ++k;
      } else {
        lp += data.log_pb[i];
      }
    }
    lp += log_count[k];
    total = lse(total, lp);
    for (int i = 0; i < n; ++i) {
      if (c & (1u << i)) {
        on[i] = lse(on[i], lp);
      }
    }
    if (lp > best) {
      best = lp;
      best_config = c;
    }
  }
  EnumerationResult out;
  out.log_evidence = total;
  out.marginal_means.resize(n);
  out.joint_mode.resize(n);
  for (int i = 0; i < n; ++i) {
    out.marginal_means[i] = std::exp(on[i] - total);
    out.joint_mode[i] = (best_config >> i) & 1u;
  }
  return out;
}

double quadrature_expect(const Weight &weight, const std::function<double(double)> &integrand,
                         int order) {
  if (order < 2) {
    throw std::invalid_argument("quadrature order must be >= 2");
  }
  const double coarse = expect_once(weight, integrand, order);
  const double fine = expect_once(weight, integrand, 2 * order);
  if (!(std::abs(fine - coarse) <= 1e-8 * std::max(1.0, std::abs(fine)))) {
    std::ostringstream os;
    os.precision(17);
    os << "quadrature did not converge: order " << order << " gives " << coarse << ", order "
       << 2 * order << " gives " << fine;
    throw std::runtime_error(os.str());
  }
  return fine;
}

Eigen::VectorXd ridge_solve(const Eigen::MatrixXd &rows, const Eigen::VectorXd &targets, double delta) {
  if (!(delta > 0.0) || rows.rows() != targets.size()) {
    throw std::invalid_argument("ridge_solve needs delta > 0 and one target per row");
  }
  const Eigen::Index k = rows.cols();
  Eigen::MatrixXd gram = Eigen::MatrixXd::Identity(k, k) * delta;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k);
  for (Eigen::Index r = 0; r < rows.rows(); ++r) {
    gram += rows.row(r).transpose() * rows.row(r);
    rhs += rows.row(r).transpose() * targets[r];
  }
  return gram.llt().solve(rhs);
}

McMoments mc_gw_moments(const GwSampleParams &params, std::size_t n_samples, std::uint64_t seed) {
  const Eigen::Index d = params.mean.size();
  if (n_samples < 2 || params.scale.rows() != d || !(params.dof > d - 1) || !(params.gamma > 0)) {
    throw std::invalid_argument("invalid Gaussian-Wishart sampling parameters");
  }
  const Eigen::MatrixXd chol = params.scale.llt().matrixL();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<std::chi_squared_distribution<double>> chi;
  for (Eigen::Index i = 0; i < d; ++i) {
    chi.emplace_back(params.dof - static_cast<double>(i));
  }

  const Eigen::Index len = 2 + d + d * d;
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(len);
  Eigen::VectorXd sum_sq = Eigen::VectorXd::Zero(len);
  Eigen::VectorXd draw(len);
  for (std::size_t s = 0; s < n_samples; ++s) {
    // Bartlett decomposition: Z2 = L A A^T L^T
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
      a(i, i) = std::sqrt(chi[i](rng));
      for (Eigen::Index j = 0; j < i; ++j) {
        a(i, j) = normal(rng);
      }
    }
    const Eigen::MatrixXd la = chol * a;
    const Eigen::MatrixXd z2 = la * la.transpose();
    // z1 = m + (gamma Z2)^-1/2 eps, using Z2 = (LA)(LA)^T
    Eigen::VectorXd eps(d);
    for (Eigen::Index i = 0; i < d; ++i) {
      eps[i] = normal(rng);
    }
    const Eigen::VectorXd z1 =
        params.mean + la.transpose().triangularView<Eigen::Upper>().solve(eps) / std::sqrt(params.gamma);
    double log_det = 0.0;
    for (Eigen::Index i = 0; i < d; ++i) {
      log_det += 2.0 * std::log(std::abs(la(i, i)));
    }
    draw[0] = log_det;
    draw.segment(1, d * d) = z2.reshaped();
    draw.segment(1 + d * d, d) = z2 * z1;
    draw[1 + d * d + d] = z1.dot(z2 * z1);
    sum += draw;
    sum_sq += draw.array().square().matrix();
  }
  const double n = static_cast<double>(n_samples);
  McMoments out;
  out.mean = sum / n;
  const Eigen::VectorXd var = ((sum_sq / n).array() - out.mean.array().square()) * (n / (n - 1.0));
  out.std_error = (var.array().max(0.0) / n).sqrt();
  return out;
}

} // namespace vbr::oracle
