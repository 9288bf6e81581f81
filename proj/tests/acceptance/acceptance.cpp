// Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any fails.

#include "vbr/checks.hpp"
#include "vbr/models/gmm.hpp"
#include "vbr/models/logit_normal.hpp"
#include "vbr/models/matfac.hpp"
#include "vbr/models/two_level.hpp"
#include "vbr/oracle.hpp"
#include "vbr/special.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>

using namespace vbr;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

Outcome from_suite(const checks::SuiteResult &r) {
  std::ostringstream s;
  s << r.passed << " passed, " << r.failed << " failed";
  if (!r.failures.empty()) {
    s << " (first: " << r.failures.front() << ")";
  }
  return {r.ok(), s.str()};
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

double max_gap(const State &a, const State &b) {
  double g = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    g = std::max(g, (a[i].lambda().values() - b[i].lambda().values()).cwiseAbs().maxCoeff());
  }
  return g;
}

Outcome log_odds_identity() {
  double worst = 0.0;
  bool converged = true;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto data = checks::random_two_level(10, 500 + seed);
    const auto trace = fit(models::make_two_level(data, seed), Schedule{}, {1e-12, 10000, false});
    converged = converged && trace.converged;
    const State &s = trace.final_state;
    const auto shape = beta_shape(s.back().lambda());
    const double e_odds = special::digamma(shape.alpha) - special::digamma(shape.beta);
    double sum = 0.0;
    for (Eigen::Index i = 0; i < data.size(); ++i) {
      const auto &node = s[static_cast<std::size_t>(i)];
      worst = std::max(worst, std::abs(node.lambda().values()[0] - (e_odds + data.log_pa[i] - data.log_pb[i])));
      sum += node.mu().values()[0];
    }
    // global: log q(pi0) matches E[log p] in pi0 up to a constant
    worst = std::max(worst, std::abs(shape.alpha - (data.alpha0 + sum)));
    worst = std::max(worst, std::abs(shape.beta - (data.beta0 + static_cast<double>(data.size()) - sum)));
  }
  return {converged && worst <= 1e-8, "max deviation " + sci(worst) + " over 5 instances"};
}

Outcome svi_consistency() {
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const auto model = models::make_two_level(checks::random_two_level(10, 600 + seed), seed);
    const auto cavi = fit(model, Schedule{}, {1e-12, 10000, false});
    Schedule svi;
    svi.kind = ScheduleKind::SVI;
    svi.global_rate = {0.7, 1.0};
    svi.seed = seed;
    const auto trace = fit(model, svi, {1e-300, 2000, false});
    worst = std::max(worst, max_gap(trace.final_state, cavi.final_state));
  }
  return {worst <= 1e-4, "max |lambda_svi - lambda_cavi| " + sci(worst) + " after 2000 steps (3 seeds)"};
}

Outcome delta_chain() {
  double ridge_err = 0.0, subst_err = 0.0;
  bool monotone = true;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto data = checks::random_matfac(6, 5, 2, 700 + seed);
    const auto als = models::make_matfac(data, models::MatFacVariant::ALS, seed);
    State s = als.initial;
    double prev = models::regularized_loss(data, models::factor_means(s, 0, 6), models::factor_means(s, 6, 5));
    for (int it = 0; it < 50; ++it) {
      const Matrix v_old = models::factor_means(s, 6, 5);
      std::vector<std::size_t> u_half{0, 1, 2, 3, 4, 5}, v_half{6, 7, 8, 9, 10};
      s = cavi_sweep(als, s, u_half);
      const Matrix u = models::factor_means(s, 0, 6);
      for (Eigen::Index i = 0; i < 6; ++i) {
        const Vector want = oracle::ridge_solve(v_old, data.Y.row(i).transpose(), data.delta_u);
        ridge_err = std::max(ridge_err, (u.row(i).transpose() - want).cwiseAbs().maxCoeff());
      }
      double loss = models::regularized_loss(data, u, v_old);
      monotone = monotone && loss <= prev * (1 + 1e-12);
      prev = loss;
      s = cavi_sweep(als, s, v_half);
      const Matrix v = models::factor_means(s, 6, 5);
      for (Eigen::Index j = 0; j < 5; ++j) {
        const Vector want = oracle::ridge_solve(u, data.Y.col(j), data.delta_v);
        ridge_err = std::max(ridge_err, (v.row(j).transpose() - want).cwiseAbs().maxCoeff());
      }
      loss = models::regularized_loss(data, u, v);
      monotone = monotone && loss <= prev * (1 + 1e-12);
      prev = loss;
    }

    const auto vmp = models::make_matfac(data, models::MatFacVariant::VMP, seed);
    const auto ppca = models::make_matfac(data, models::MatFacVariant::PPCA, seed);
    const State sv = cavi_sweep(vmp, vmp.initial);
    State sp;
    Matrix cov = Matrix::Zero(2, 2);
    for (std::size_t i = 0; i < sv.size(); ++i) {
      sp.emplace_back(sv[i].id(), sv[i].lambda(), sv[i].role(), ppca.initial[i].delta_mode());
      if (i >= 6) {
        cov += gaussian_params(sv[i].lambda()).precision.inverse();
      }
    }
    const auto mv = effective_moments(sv);
    const auto mp = effective_moments(sp);
    for (std::size_t i = 0; i < 6; ++i) {
      const Vector diff = ppca.provider->coefficient(i, mp) - vmp.provider->coefficient(i, mv);
      subst_err = std::max(subst_err, diff.head(2).cwiseAbs().maxCoeff());
      subst_err = std::max(subst_err, (gaussian_second(diff, 2) - 0.5 * cov).cwiseAbs().maxCoeff());
    }
  }
  return {ridge_err <= 1e-10 && monotone && subst_err <= 1e-10,
          "ridge error " + sci(ridge_err) + ", loss monotone " + (monotone ? "yes" : "no") +
              ", PPCA/VMP substitution error " + sci(subst_err)};
}

Outcome pseudo_prior() {
  double beta_err = 0.0, sym_err = 0.0;
  for (auto [a0, b0] : {std::pair{2.0, 3.0}, {0.6, 1.7}, {8.0, 4.0}}) {
    const auto prior = models::beta_density_prior(a0, b0);
    for (auto [a, b] : {std::pair{1.0, 1.0}, {3.5, 2.0}, {0.8, 6.0}, {40.0, 25.0}}) {
      const auto p = models::pseudo_prior(beta_natural({a, b}), prior.term);
      beta_err = std::max({beta_err, std::abs(p[0] - (a0 - 1)), std::abs(p[1] - (b0 - 1))});
    }
  }
  const auto ln = models::logit_normal_prior(0.0);
  for (double a : {0.5, 1.0, 2.0, 7.5, 30.0}) {
    const auto p = models::pseudo_prior(beta_natural({a, a}), ln.term);
    sym_err = std::max(sym_err, std::abs(p[0] - p[1]));
  }
  return {beta_err <= 1e-8 && sym_err <= 1e-8,
          "Beta-density error " + sci(beta_err) + ", symmetric component gap " + sci(sym_err)};
}

Outcome base_measure() {
  double worst = 0.0, shift_err = 0.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto data = checks::random_two_level(10, 800 + seed);
    const auto unit = fit(models::make_two_level(data, seed, BaseMeasure::Unit), Schedule{}, {1e-12, 10000, false});
    const auto hal = fit(models::make_two_level(data, seed, BaseMeasure::Haldane), Schedule{}, {1e-12, 10000, false});
    if (!unit.converged || !hal.converged) {
      return {false, "a run did not converge"};
    }
    for (std::size_t i = 0; i < unit.final_state.size(); ++i) {
      const auto &a = unit.final_state[i].lambda();
      const auto &b = hal.final_state[i].lambda();
      const bool beta = a.family().kind == FamilyKind::Beta;
      worst = std::max(worst, kl_divergence(a, beta ? rebase(b, BaseMeasure::Unit) : b));
      const Vector shift = beta ? Vector::Ones(2) : Vector::Zero(1);
      shift_err = std::max(shift_err, (b.values() - a.values() - shift).cwiseAbs().maxCoeff());
    }
  }
  return {worst <= 1e-10, "max KL between representations " + sci(worst) + ", max |lambda_h - lambda_u - shift| " +
                              sci(shift_err)};
}

Outcome gmm_sanity() {
  Eigen::VectorXi labels;
  const auto data = checks::separated_gmm(100, 2, 2024, &labels);
  const auto trace = fit(models::make_gmm(data, 2024), Schedule{}, {1e-10, 5000, false});
  const Vector r = models::responsibilities(trace.final_state, 100);
  int agree = 0;
  for (int i = 0; i < 100; ++i) {
    agree += (r[i] > 0.5) == (labels[i] == 1);
  }
  agree = std::max(agree, 100 - agree);
  return {trace.converged && agree >= 98, std::to_string(agree) + "/100 consistent with generating labels"};
}

} // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"Bayes-rule recovery (simple_mixture, 100 cases, 1e-12)", [] { return from_suite(checks::check_bayes(1001, 100)); }},
      {"multilinearity (every model, 50 pairs per node, 1e-9)",
       [] { return from_suite(checks::check_multilinearity(1002, 50)); }},
      {"CAVI monotonicity and residual <= 1e-8", [] { return from_suite(checks::check_monotonicity(1003)); }},
      {"evidence bound (20 instances, N <= 12)", [] { return from_suite(checks::check_evidence(1004, 20)); }},
      {"fixed-point log-odds identity (1e-8)", log_odds_identity},
      {"SVI consistency (1e-4 within 2000 steps)", svi_consistency},
      {"delta-method chain (ALS = ridge, monotone loss, PPCA substitution)", delta_chain},
      {"non-conjugate pseudo-prior", pseudo_prior},
      {"base-measure extension (KL <= 1e-10)", base_measure},
      {"GMM separated clusters (>= 98%)", gmm_sanity},
  };
  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception &e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failures += o.pass ? 0 : 1;
    std::printf("criterion %2zu: %s  %s: %s [%.2fs]\n", k + 1, o.pass ? "PASS" : "FAIL", criteria[k].first.c_str(),
                o.detail.c_str(), secs);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
