#include "vbr/checks.hpp"

#include "vbr/models/gmm.hpp"
#include "vbr/models/logit_normal.hpp"
#include "vbr/models/matfac.hpp"
#include "vbr/models/simple_mixture.hpp"
#include "vbr/models/two_level.hpp"
#include "vbr/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>

namespace vbr::checks {

namespace {

Matrix random_spd(int dim, double floor, std::mt19937_64 &rng) {
  std::normal_distribution<double> n01;
  Matrix a(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) {
      a(i, j) = n01(rng);
    }
  }
  return a * a.transpose() / dim + floor * Matrix::Identity(dim, dim);
}

Vector random_vector(int dim, double sd, std::mt19937_64 &rng) {
  std::normal_distribution<double> n01;
  Vector v(dim);
  for (int i = 0; i < dim; ++i) {
    v[i] = sd * n01(rng);
  }
  return v;
}

double log_normal_pdf(double y, double mean) {
  return -0.5 * (y - mean) * (y - mean) - 0.5 * std::log(2.0 * std::numbers::pi);
}

std::string fmt(double v) {
  std::ostringstream out;
  out.precision(3);
  out << std::scientific << v;
  return out.str();
}

struct NamedModel {
  std::string name;
  ModelSpec spec;
};

std::vector<NamedModel> multilinearity_models(std::uint64_t seed) {
  std::vector<NamedModel> out;
  out.push_back({"simple_mixture", models::make_simple_mixture({0.3, 0.8, 0.2})});
  const auto two = random_two_level(6, seed);
  out.push_back({"two_level", models::make_two_level(two, seed)});
  out.push_back({"two_level_haldane", models::make_two_level(two, seed, BaseMeasure::Haldane)});
  out.push_back({"gmm2", models::make_gmm(separated_gmm(8, 2, seed), seed)});
  const auto mf = random_matfac(4, 3, 2, seed);
  out.push_back({"matfac_vmp", models::make_matfac(mf, models::MatFacVariant::VMP, seed)});
  out.push_back({"matfac_ppca", models::make_matfac(mf, models::MatFacVariant::PPCA, seed)});
  out.push_back({"matfac_als", models::make_matfac(mf, models::MatFacVariant::ALS, seed)});
  out.push_back({"logitnormal", models::make_logit_normal({two.log_pa, two.log_pb, 0.5}, seed)});
  return out;
}

} // namespace

NaturalParam random_natural(const FamilyDescriptor &family, std::mt19937_64 &rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  switch (family.kind) {
  case FamilyKind::Bernoulli:
    return bernoulli_natural(0.02 + 0.96 * u(rng));
  case FamilyKind::Beta:
    return beta_natural({0.5 + 5.0 * u(rng), 0.5 + 5.0 * u(rng)}, family.base);
  case FamilyKind::Gaussian:
    return gaussian_natural({random_vector(family.dim, 1.0, rng), random_spd(family.dim, 0.5, rng)});
  case FamilyKind::GaussianWishart: {
    const double dof = family.dim + 1.0 + 4.0 * u(rng);
    return gaussian_wishart_natural(
        {random_vector(family.dim, 1.0, rng), 0.5 + 2.5 * u(rng), random_spd(family.dim, 0.3, rng) / dof, dof});
  }
  }
  throw DomainError("unknown family");
}

TwoLevelMixtureData random_two_level(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution first(0.3);
  std::normal_distribution<double> noise;
  std::uniform_real_distribution<double> prior(0.5, 3.0);
  TwoLevelMixtureData data;
  data.log_pa.resize(static_cast<Eigen::Index>(n));
  data.log_pb.resize(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < data.log_pa.size(); ++i) {
    const double y = (first(rng) ? 2.0 : -2.0) + noise(rng);
    data.log_pa[i] = log_normal_pdf(y, 2.0);
    data.log_pb[i] = log_normal_pdf(y, -2.0);
  }
  data.alpha0 = prior(rng);
  data.beta0 = prior(rng);
  return data;
}

GMMData separated_gmm(std::size_t n, int dim, std::uint64_t seed, Eigen::VectorXi *labels) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise;
  GMMData data;
  data.Y.resize(static_cast<Eigen::Index>(n), dim);
  Eigen::VectorXi truth(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < truth.size(); ++i) {
    truth[i] = (i % 2 == 0) ? 1 : 0;
    const double centre = truth[i] ? 2.5 : -2.5;
    for (int d = 0; d < dim; ++d) {
      data.Y(i, d) = (d < 2 ? centre : 0.0) + noise(rng);
    }
  }
  data.alpha0 = 1.0;
  data.beta0 = 1.0;
  data.gamma0 = 0.1;
  data.nu0 = dim + 1.0;
  data.W0 = Matrix::Identity(dim, dim) / data.nu0;
  if (labels) {
    *labels = truth;
  }
  return data;
}

MatrixFactorizationData random_matfac(int rows, int cols, int k, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01;
  Matrix u(rows, k), v(cols, k), e(rows, cols);
  for (auto *m : {&u, &v, &e}) {
    for (Eigen::Index i = 0; i < m->size(); ++i) {
      m->data()[i] = n01(rng);
    }
  }
  MatrixFactorizationData data;
  data.Y = u * v.transpose() + 0.1 * e;
  data.K = k;
  data.delta_u = 1.0;
  data.delta_v = 1.0;
  return data;
}

bool elbo_nondecreasing(const FitTrace &trace, double slack) {
  for (std::size_t t = 1; t < trace.records.size(); ++t) {
    const double prev = trace.records[t - 1].elbo;
    if (trace.records[t].elbo < prev - slack * std::max(1.0, std::abs(prev))) {
      return false;
    }
  }
  return true;
}

void SuiteResult::expect(bool ok, const std::string &what) {
  if (ok) {
    ++passed;
  } else {
    ++failed;
    failures.push_back(what);
  }
}

SuiteResult check_bayes(std::uint64_t seed, int cases) {
  SuiteResult result{"bayes"};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> prob(0.01, 0.99);
  std::uniform_real_distribution<double> lik(0.01, 5.0);
  for (int c = 0; c < cases; ++c) {
    const SimpleMixtureData data{prob(rng), lik(rng), lik(rng)};
    const auto model = models::make_simple_mixture(data);
    const State state = cavi_sweep(model, model.initial);
    const double got = state[0].mu().values()[0];
    const double want = oracle::exact_simple_posterior(data);
    result.expect(std::abs(got - want) <= 1e-12,
                  "case " + std::to_string(c) + ": |q - posterior| = " + fmt(std::abs(got - want)));
  }
  return result;
}

SuiteResult check_multilinearity(std::uint64_t seed, int pairs) {
  SuiteResult result{"multilinearity"};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (const auto &[name, spec] : multilinearity_models(seed)) {
    const auto &provider = *spec.provider;
    for (std::size_t node = 0; node < spec.initial.size(); ++node) {
      if (!provider.is_conjugate(node)) {
        continue;
      }
      for (int p = 0; p < pairs; ++p) {
        MeanSnapshot moments;
        for (const auto &n : spec.initial) {
          moments.push_back(nat_to_mean(random_natural(n.family(), rng)));
        }
        const auto &family = spec.initial[node].family();
        const ExpectationParam mu_a = nat_to_mean(random_natural(family, rng));
        const ExpectationParam mu_b = nat_to_mean(random_natural(family, rng));
        const double t = unit(rng);
        const ExpectationParam mu_t(family, t * mu_a.values() + (1.0 - t) * mu_b.values());

        const Vector coef = provider.coefficient(node, moments);
        auto elj_at = [&](const ExpectationParam &mu) {
          moments[node] = mu;
          return provider.expected_log_joint(moments);
        };
        const double fa = elj_at(mu_a);
        const double fb = elj_at(mu_b);
        const double ft = elj_at(mu_t);
        const double scale = std::max({1.0, std::abs(fa), std::abs(fb)});
        const double slope_err = std::abs((fa - fb) - coef.dot(mu_a.values() - mu_b.values()));
        const double affine_err = std::abs(ft - (t * fa + (1.0 - t) * fb));
        const double err = std::max(slope_err, affine_err);
        result.expect(err <= 1e-9 * scale, name + " node " + spec.initial[node].id() + ": error " + fmt(err) +
                                               " at scale " + fmt(scale));
      }
    }
  }
  return result;
}

SuiteResult check_monotonicity(std::uint64_t seed) {
  SuiteResult result{"monotonicity"};
  const FitOptions options{1e-9, 20000, false};
  const Schedule cavi;
  auto run = [&](const std::string &name, const ModelSpec &model) {
    const FitTrace trace = fit(model, cavi, options);
    result.expect(elbo_nondecreasing(trace, 1e-10), name + ": ELBO decreased");
    const double residual = trace.records.back().residual;
    result.expect(residual <= 1e-8, name + ": final residual " + fmt(residual));
  };
  run("two_level", models::make_two_level(random_two_level(10, seed), seed));
  run("gmm2", models::make_gmm(separated_gmm(50, 2, seed), seed));
  run("matfac_vmp", models::make_matfac(random_matfac(6, 6, 2, seed), models::MatFacVariant::VMP, seed));
  return result;
}

SuiteResult check_roundtrip(std::uint64_t seed, int cases) {
  SuiteResult result{"roundtrip"};
  std::mt19937_64 rng(seed);
  const std::vector<FamilyDescriptor> families{
      FamilyDescriptor::bernoulli(),          FamilyDescriptor::beta(),
      FamilyDescriptor::beta(BaseMeasure::Haldane), FamilyDescriptor::gaussian(1),
      FamilyDescriptor::gaussian(3),          FamilyDescriptor::gaussian_wishart(1),
      FamilyDescriptor::gaussian_wishart(2),  FamilyDescriptor::gaussian_wishart(3)};
  for (const auto &family : families) {
    for (int c = 0; c < cases; ++c) {
      const NaturalParam lambda = random_natural(family, rng);
      const NaturalParam back = mean_to_nat(nat_to_mean(lambda));
      const double err = (back.values() - lambda.values()).cwiseAbs().maxCoeff();
      const double scale = std::max(1.0, lambda.values().cwiseAbs().maxCoeff());
      result.expect(err <= 1e-8 * scale, to_string(family) + " case " + std::to_string(c) + ": error " + fmt(err));
    }
  }
  return result;
}

SuiteResult check_evidence(std::uint64_t seed, int instances) {
  SuiteResult result{"evidence"};
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> size(2, 12);
  for (int k = 0; k < instances; ++k) {
    const auto data = random_two_level(size(rng), rng());
    const FitTrace trace = fit(models::make_two_level(data, seed), Schedule{}, {1e-10, 5000, false});
    const double bound = trace.records.back().elbo;
    const double log_z = oracle::enumerate_two_level(data).log_evidence;
    result.expect(trace.converged, "instance " + std::to_string(k) + ": CAVI did not converge");
    result.expect(log_z - bound >= 0.0, "instance " + std::to_string(k) + ": gap " + fmt(log_z - bound));
  }
  return result;
}

const std::vector<std::string> &suite_names() {
  static const std::vector<std::string> names{"bayes", "multilinearity", "monotonicity", "roundtrip", "evidence"};
  return names;
}

std::optional<SuiteResult> run_suite(const std::string &name) {
  if (name == "bayes") {
    return check_bayes();
  }
  if (name == "multilinearity") {
    return check_multilinearity();
  }
  if (name == "monotonicity") {
    return check_monotonicity();
  }
  if (name == "roundtrip") {
    return check_roundtrip();
  }
  if (name == "evidence") {
    return check_evidence();
  }
  return std::nullopt;
}

} // namespace vbr::checks
