#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "helpers.hpp"
#include "synthreg/logit.hpp"
#include "synthreg/pmse.hpp"
#include "synthreg/simulate.hpp"

using namespace synthreg;
using testing::entity;

namespace {

double log_lik(double a, double b, const std::vector<double>& x, const std::vector<double>& y) {
  double ll = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = a + b * x[i];
    ll += y[i] * e - std::log1p(std::exp(e));
  }
  return ll;
}

Register sim(int per_industry, std::uint64_t seed) {
  SimConfig c;
  c.n_industries = 2;
  c.entities_per_industry = per_industry;
  c.seed = seed;
  return simulate_register(c);
}

}  // namespace

TEST_CASE("IRLS matches a brute-force grid MLE") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  std::vector<double> x, y;
  for (int i = 0; i < 200; ++i) {
    x.push_back(nd(rng));
    y.push_back(std::uniform_real_distribution<double>()(rng) < 1.0 / (1.0 + std::exp(-(0.3 + 0.8 * x.back()))) ? 1.0
                                                                                                              : 0.0);
  }
  Eigen::MatrixXd xm(200, 2);
  Eigen::VectorXd ym(200);
  for (int i = 0; i < 200; ++i) {
    xm(i, 0) = 1.0;
    xm(i, 1) = x[static_cast<std::size_t>(i)];
    ym(i) = y[static_cast<std::size_t>(i)];
  }
  const auto fit = fit_logit(xm, ym, {"const", "x"});
  CHECK(fit.converged);
  CHECK_FALSE(fit.separated);

  // Zooming grid search around the best cell; the likelihood is concave.
  double ca = 0.0, cb = 0.0, half = 4.0;
  for (int round = 0; round < 60; ++round) {
    double best = -1e300, ba = ca, bb = cb;
    for (int i = -10; i <= 10; ++i) {
      for (int j = -10; j <= 10; ++j) {
        const double a = ca + half * i / 10.0, b = cb + half * j / 10.0;
        const double ll = log_lik(a, b, x, y);
        if (ll > best) best = ll, ba = a, bb = b;
      }
    }
    ca = ba;
    cb = bb;
    half *= 0.3;
  }
  CHECK(std::abs(fit.coef(0) - ca) < 1e-6);
  CHECK(std::abs(fit.coef(1) - cb) < 1e-6);
}

TEST_CASE("separable data are flagged") {
  Eigen::MatrixXd x(2, 2);
  x << 1, 0, 1, 1;
  Eigen::VectorXd y(2);
  y << 0, 1;
  const auto fit = fit_logit(x, y, {"const", "x"});
  CHECK(fit.separated);
  for (Eigen::Index i = 0; i < 2; ++i) CHECK((fit.fitted(i) >= 1e-12 && fit.fitted(i) <= 1.0 - 1e-12));
}

TEST_CASE("singular designs name the collinear columns") {
  Eigen::MatrixXd x(4, 3);
  x << 1, 1, 2, 1, 2, 4, 1, 3, 6, 1, 4, 8;
  Eigen::VectorXd y(4);
  y << 0, 1, 0, 1;
  try {
    fit_logit(x, y, {"const", "a", "twice_a"});
    FAIL("expected NumericalError");
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("twice_a") != std::string::npos);
  }
}

TEST_CASE("combined panel bookkeeping") {
  const auto r = sim(100, 1);
  const auto p = build_combined(r, r);
  CHECK(p.c() == 0.5);
  CHECK(p.total() == p.n1 + p.n2);
  CHECK(p.rows.size() == p.total());

  std::vector<PanelRow> rows(4000);
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i].source = i < 3000 ? Source::original : Source::synthetic;
  CHECK(combine_rows(rows).c() == 0.25);

  CHECK_THROWS_AS(build_combined(r, make_register({}, r.window)), DataError);
  auto shifted = r;
  shifted.window.last += 1;
  CHECK_THROWS_AS(build_combined(r, shifted), DataError);
}

TEST_CASE("intercept-only propensity equals c") {
  const auto a = sim(60, 2);
  const auto b = sim(20, 3);
  const auto p = build_combined(a, b);
  PropensityOptions none;
  none.continuous = none.age = none.year_effects = none.industry_effects = false;
  const auto fit = fit_propensity(p, none);
  for (double v : fit.p_hat) CHECK(v == doctest::Approx(p.c()).epsilon(1e-12));
  CHECK(pmse(fit.p_hat, p.c()) < 1e-20);
}

TEST_CASE("pmse arithmetic and null moments") {
  const std::vector<double> p = {0.5, 0.5, 1.0, 0.0};
  CHECK(pmse(p, 0.5) == doctest::Approx(0.125));
  CHECK_THROWS_AS(pmse(std::vector<double>{}, 0.5), DataError);

  const auto m = pmse_null_moments(2, 0.5, 1000);
  CHECK(m.mean == doctest::Approx(1.25e-4).epsilon(1e-12));
  CHECK(m.sd == doctest::Approx(std::sqrt(2.0) * 1.25e-4).epsilon(1e-12));
  CHECK(pmse_null_moments(3, 0.5, 1000).mean == doctest::Approx(2.0 * m.mean));
  CHECK(pmse_null_moments(2, 1e-9, 1000).mean < 1e-11);
  CHECK_THROWS_AS(pmse_null_moments(1, 0.5, 1000), DataError);
  CHECK_THROWS_AS(pmse_null_moments(2, 1.0, 1000), DataError);

  // Published row: pMSE 0.0041 with ratio 656.88.
  CHECK(0.0041 / 656.88 == doctest::Approx(6.242e-6).epsilon(1e-3));
}

TEST_CASE("report ratio and standardized form") {
  const auto r = sim(150, 4);
  const auto syn = sim(150, 5);
  const auto panel = build_combined(r, syn);
  const auto fit = fit_propensity(panel);
  CHECK(fit.converged);
  const int k = predictor_count(fit, KConvention::synthesized);
  const auto rep = pmse_report(fit, panel, k);
  const auto nm = pmse_null_moments(k, panel.c(), panel.total());
  CHECK(rep.ratio == doctest::Approx(rep.pmse / nm.mean));
  CHECK(rep.standardized == doctest::Approx((rep.pmse - nm.mean) / nm.sd));
  CHECK(predictor_count(fit, KConvention::parameters) == static_cast<int>(fit.terms.size()));
}

TEST_CASE("synthesized predictor count covers continuous and age terms") {
  const auto r = sim(200, 6);
  const auto fit = fit_propensity(build_combined(r, sim(200, 7)));
  int age_terms = 0;
  for (const auto& t : fit.terms) age_terms += t.rfind("Age ", 0) == 0;
  CHECK(age_terms == 4);
  CHECK(fit.synthesized_predictors == 2 + age_terms);
  CHECK(fit.terms[0] == "const");
}

TEST_CASE("pmse is invariant to row order and to swapping sources") {
  const auto a = sim(120, 8);
  const auto b = sim(80, 9);
  const auto p = build_combined(a, b);
  const double base = pmse(fit_propensity(p).p_hat, p.c());

  const auto swapped = build_combined(b, a);
  CHECK(pmse(fit_propensity(swapped).p_hat, swapped.c()) == doctest::Approx(base).epsilon(1e-8));

  auto rows = p.rows;
  std::mt19937_64 rng(4);
  std::shuffle(rows.begin(), rows.end(), rng);
  const auto shuffled = combine_rows(rows);
  CHECK(pmse(fit_propensity(shuffled).p_hat, shuffled.c()) == doctest::Approx(base).epsilon(1e-8));
}

TEST_CASE("random labels: N*pMSE/(c(1-c)) averages to k-1 over parameters") {
  const auto rows = to_long(sim(150, 10));
  std::mt19937_64 rng(12);
  std::vector<std::size_t> order(rows.size());
  double acc = 0.0;
  int k = 0;
  const int reps = 60;
  for (int rep = 0; rep < reps; ++rep) {
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    auto labelled = rows;
    for (std::size_t j = 0; j < order.size(); ++j) {
      labelled[order[j]].source = j < order.size() / 2 ? Source::synthetic : Source::original;
    }
    const auto panel = combine_rows(std::move(labelled));
    const auto fit = fit_propensity(panel);
    k = fit.parameter_count();
    acc += pmse(fit.p_hat, panel.c()) * static_cast<double>(panel.total()) / (panel.c() * (1.0 - panel.c()));
  }
  // chi-square(k-1) mean, Monte-Carlo sd sqrt(2(k-1)/reps)
  const double mean = acc / reps;
  CHECK(std::abs(mean - (k - 1)) < 4.0 * std::sqrt(2.0 * (k - 1) / reps));
}

TEST_CASE("confidence interval overlap") {
  CHECK(cio({0, 2}, {0, 2}) == 1.0);
  CHECK(cio({0, 1}, {2, 3}) == 0.0);
  CHECK(cio({0, 2}, {1, 3}) == doctest::Approx(0.5));
  CHECK(cio({0, 4}, {1, 2}) == doctest::Approx(0.5 * (0.25 + 1.0)));
  CHECK_THROWS_AS(cio({1, 1}, {0, 2}), DataError);
  CHECK_THROWS_AS(cio({2, 1}, {0, 2}), DataError);
  const auto ci = confidence_interval(1.0, 0.5);
  CHECK(ci.lo == doctest::Approx(1.0 - 1.959964 * 0.5).epsilon(1e-6));
}
