#include "vbr/oracle.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <regex>
#include <set>
#include <sstream>

using namespace vbr;
using namespace vbr::oracle;

namespace {

double digamma_ref(double x) {
  // central difference of lgamma is plenty for a 4-SE comparison
  const double h = 1e-5;
  return (std::lgamma(x + h) - std::lgamma(x - h)) / (2 * h);
}

TwoLevelMixtureData instance(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.5);
  TwoLevelMixtureData d{Eigen::VectorXd(n), Eigen::VectorXd(n), 1.5, 0.8};
  for (int i = 0; i < n; ++i) {
    d.log_pa[i] = normal(rng);
    d.log_pb[i] = normal(rng);
  }
  return d;
}

} // namespace

TEST(ExactPosterior, KnownValues) {
  EXPECT_DOUBLE_EQ(exact_simple_posterior({0.5, 0.3, 0.3}), 0.5);
  EXPECT_NEAR(exact_simple_posterior({0.3, 0.8, 0.2}), 0.24 / 0.38, 1e-16);
  EXPECT_EQ(exact_simple_posterior({0.3, 0.0, 0.2}), 0.0);
}

TEST(Enumeration, SingleObservationUsesPriorMean) {
  const double a0 = 2.0, b0 = 3.0, pa = 0.6, pb = 0.1;
  const auto r = enumerate_two_level({Eigen::VectorXd::Constant(1, std::log(pa)),
                                      Eigen::VectorXd::Constant(1, std::log(pb)), a0, b0});
  const double w1 = a0 / (a0 + b0) * pa, w0 = b0 / (a0 + b0) * pb;
  EXPECT_NEAR(r.marginal_means[0], w1 / (w1 + w0), 1e-14);
  EXPECT_NEAR(r.log_evidence, std::log(w1 + w0), 1e-14);
  EXPECT_EQ(r.joint_mode[0], 1);
}

TEST(Enumeration, UninformativeDataGivesPriorMean) {
  const auto r = enumerate_two_level({Eigen::VectorXd::Constant(6, -2.0), Eigen::VectorXd::Constant(6, -2.0), 1.2, 3.4});
  for (int i = 0; i < 6; ++i) {
    EXPECT_NEAR(r.marginal_means[i], 1.2 / 4.6, 1e-13);
  }
  EXPECT_NEAR(r.log_evidence, -12.0, 1e-12);
}

TEST(Enumeration, MatchesIntegralOverMixingWeight) {
  const auto d = instance(4, 3);
  const double want = std::log(quadrature_expect(BetaWeight{d.alpha0, d.beta0}, [&](double p) {
    double prod = 1.0;
    for (int i = 0; i < 4; ++i) {
      prod *= p * std::exp(d.log_pa[i]) + (1 - p) * std::exp(d.log_pb[i]);
    }
    return prod;
  }));
  EXPECT_NEAR(enumerate_two_level(d).log_evidence, want, 1e-8);
}

TEST(Enumeration, PermutationInvariant) {
  auto d = instance(9, 7);
  const double base = enumerate_two_level(d).log_evidence;
  std::vector<int> perm(9);
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(1);
  std::shuffle(perm.begin(), perm.end(), rng);
  TwoLevelMixtureData p = d;
  for (int i = 0; i < 9; ++i) {
    p.log_pa[i] = d.log_pa[perm[i]];
    p.log_pb[i] = d.log_pb[perm[i]];
  }
  EXPECT_NEAR(enumerate_two_level(p).log_evidence, base, 1e-12);
}

TEST(Enumeration, RejectsLargeInputs) {
  EXPECT_THROW(enumerate_two_level(instance(21, 1)), std::invalid_argument);
}

TEST(Quadrature, KnownExpectations) {
  EXPECT_NEAR(quadrature_expect(BetaWeight{1.0, 1.0}, [](double z) { return std::log(z); }), -1.0, 1e-10);
  EXPECT_NEAR(quadrature_expect(BetaWeight{2.0, 2.0}, [](double) { return 1.0; }), 1.0, 1e-12);
  EXPECT_NEAR(quadrature_expect(GaussianWeight{0.0, 1.0}, [](double z) { return z * z; }), 1.0, 1e-12);
  EXPECT_NEAR(quadrature_expect(GaussianWeight{1.5, 0.25}, [](double z) { return z; }), 1.5, 1e-12);
  EXPECT_NEAR(quadrature_expect(BetaWeight{3.0, 5.0}, [](double z) { return z; }), 3.0 / 8.0, 1e-10);
}

TEST(Quadrature, DoublingCheckRejectsRoughIntegrands) {
  EXPECT_THROW(quadrature_expect(BetaWeight{1.0, 1.0}, [](double z) { return z < 0.37 ? 0.0 : 1.0; }, 16),
               std::runtime_error);
}

TEST(Quadrature, EndpointSafeIntegrands) {
  // log(1 - z) must stay finite on every node
  EXPECT_NEAR(quadrature_expect(BetaWeight{1.0, 1.0}, [](double z) { return std::log1p(-z); }), -1.0, 1e-10);
  EXPECT_NEAR(quadrature_expect(BetaWeight{0.2, 3.0}, [](double z) { return z; }), 0.2 / 3.2, 1e-10);
}

TEST(Quadrature, RejectsWeightsWithUnrepresentableTails) {
  EXPECT_THROW(quadrature_expect(BetaWeight{1.0, 0.3}, [](double) { return 1.0; }), std::invalid_argument);
}

TEST(Ridge, KnownValues) {
  EXPECT_NEAR(ridge_solve(Eigen::MatrixXd::Constant(1, 1, 1.0), Eigen::VectorXd::Constant(1, 2.0), 1.0)[0], 1.0,
              1e-15);
  const Eigen::MatrixXd a = Eigen::MatrixXd::Random(5, 3);
  EXPECT_EQ(ridge_solve(a, Eigen::VectorXd::Zero(5), 0.3), Eigen::VectorXd::Zero(3));
}

TEST(MonteCarlo, ZeroMeanCrossMoment) {
  const auto mc = mc_gw_moments({Eigen::VectorXd::Zero(2), 1.3, Eigen::MatrixXd::Identity(2, 2), 4.0}, 100000, 5);
  // layout: log|Z2|, Z2 (4 entries), Z2 z1 (2 entries), quad
  for (int k = 5; k < 7; ++k) {
    EXPECT_LE(std::abs(mc.mean[k]), 3.0 * mc.std_error[k]) << k;
  }
}

TEST(MonteCarlo, OneDimensionalGammaNormal) {
  const double nu = 3.0, w = 0.7, gamma = 2.0, m = 0.4;
  const auto mc = mc_gw_moments({Eigen::VectorXd::Constant(1, m), gamma, Eigen::MatrixXd::Constant(1, 1, w), nu},
                                200000, 9);
  // Z2 ~ Gamma(nu/2, scale 2w), z1 | Z2 ~ N(m, 1/(gamma Z2))
  const double e_log = digamma_ref(nu / 2) + std::log(2 * w);
  const double e_z2 = nu * w;
  const std::vector<double> want{e_log, e_z2, e_z2 * m, 1.0 / gamma + e_z2 * m * m};
  for (int k = 0; k < 4; ++k) {
    EXPECT_LE(std::abs(mc.mean[k] - want[k]), 4.0 * mc.std_error[k]) << k;
  }
}

TEST(MonteCarlo, SeedIsReproducible) {
  const GwSampleParams p{Eigen::VectorXd::Zero(1), 1.0, Eigen::MatrixXd::Identity(1, 1), 2.0};
  EXPECT_EQ(mc_gw_moments(p, 1000, 3).mean, mc_gw_moments(p, 1000, 3).mean);
}

TEST(Independence, OracleUsesOnlyDataTypes) {
  for (const char *file : {VBR_SOURCE_DIR "/src/oracle.cpp", VBR_SOURCE_DIR "/include/vbr/oracle.hpp",
                           VBR_SOURCE_DIR "/include/vbr/models/data.hpp"}) {
    std::ifstream in(file);
    ASSERT_TRUE(in) << file;
    std::stringstream text;
    text << in.rdbuf();
    const std::string src = text.str();
    const std::regex include("#include \"(vbr/[^\"]+)\"");
    const std::set<std::string> allowed{"vbr/oracle.hpp", "vbr/models/data.hpp", "vbr/error.hpp"};
    for (std::sregex_iterator it(src.begin(), src.end(), include), end; it != end; ++it) {
      EXPECT_TRUE(allowed.contains((*it)[1].str())) << file << " includes " << (*it)[1];
    }
  }
}
