#include "vbr/special.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

using namespace vbr::special;

TEST(Special, DigammaKnownValues) {
  const double euler = 0.57721566490153286061;
  EXPECT_NEAR(digamma(1.0), -euler, 1e-14);
  EXPECT_NEAR(digamma(0.5), -euler - 2.0 * std::log(2.0), 1e-14);
  EXPECT_NEAR(digamma(10.0), 2.251752589066721, 1e-14);
  EXPECT_NEAR(digamma(1e-3), -1000.5755719318103, 1e-9);
}

TEST(Special, DigammaRecurrence) {
  for (double x : {0.1, 0.7, 2.3, 5.9, 6.1, 40.0}) {
    EXPECT_NEAR(digamma(x + 1.0) - digamma(x), 1.0 / x, 1e-12 * std::max(1.0, 1.0 / x)) << x;
  }
}

TEST(Special, DigammaReflection) {
  for (double x : {0.3, 0.55, 1.7}) {
    EXPECT_NEAR(digamma(1.0 - x) - digamma(x), std::numbers::pi / std::tan(std::numbers::pi * x), 1e-11);
  }
}

TEST(Special, TrigammaKnownValues) {
  const double pi2 = std::numbers::pi * std::numbers::pi;
  EXPECT_NEAR(trigamma(1.0), pi2 / 6.0, 1e-14);
  EXPECT_NEAR(trigamma(0.5), pi2 / 2.0, 1e-13);
  for (double x : {0.2, 3.0, 6.5, 25.0}) {
    EXPECT_NEAR(trigamma(x) - trigamma(x + 1.0), 1.0 / (x * x), 1e-12 * std::max(1.0, 1.0 / (x * x)));
  }
}

TEST(Special, TrigammaIsDerivativeOfDigamma) {
  for (double x : {0.4, 1.3, 7.0, 50.0}) {
    const double h = 1e-5 * x;
    EXPECT_NEAR((digamma(x + h) - digamma(x - h)) / (2 * h), trigamma(x), 1e-7 * trigamma(x));
  }
}

TEST(Special, LogBeta) {
  EXPECT_NEAR(log_beta(1.0, 1.0), 0.0, 1e-15);
  EXPECT_NEAR(log_beta(2.0, 2.0), std::log(1.0 / 6.0), 1e-14);
  EXPECT_NEAR(log_beta(0.5, 0.5), std::log(std::numbers::pi), 1e-14);
}

TEST(Special, MultivariateGammaReducesInOneDimension) {
  EXPECT_NEAR(log_multigamma(3.2, 1), std::lgamma(3.2), 1e-14);
  EXPECT_NEAR(multi_digamma(3.2, 1), digamma(3.2), 1e-14);
  // Gamma_2(x) = sqrt(pi) Gamma(x) Gamma(x - 1/2)
  EXPECT_NEAR(log_multigamma(2.5, 2), 0.5 * std::log(std::numbers::pi) + std::lgamma(2.5) + std::lgamma(2.0), 1e-13);
  EXPECT_NEAR(multi_digamma(2.5, 2), digamma(2.5) + digamma(2.0), 1e-14);
}

TEST(Special, SoftplusIsStable) {
  EXPECT_NEAR(softplus(0.0), std::log(2.0), 1e-15);
  EXPECT_DOUBLE_EQ(softplus(800.0), 800.0);
  EXPECT_GT(softplus(-800.0), -1.0);
  EXPECT_NEAR(log_sigmoid(-800.0), -800.0, 1e-12);
}

TEST(Special, LogSumExp) {
  const std::vector<double> v{1000.0, 1000.0};
  EXPECT_NEAR(log_sum_exp(v), 1000.0 + std::log(2.0), 1e-12);
  const std::vector<double> small{-1.0, -2.0, -3.0};
  EXPECT_NEAR(log_sum_exp(small), std::log(std::exp(-1.0) + std::exp(-2.0) + std::exp(-3.0)), 1e-15);
}
