#include "synthreg/pmse.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>

#include <fmt/format.h>

#include "synthreg/kde_transform.hpp"

namespace synthreg {

CombinedPanel build_combined(const Register& conf, const Register& syn) {
  if (conf.entities.empty() || syn.entities.empty()) throw DataError("build_combined: one source is empty");
  if (!(conf.window == syn.window)) {
    throw DataError(fmt::format("build_combined: windows differ ({}-{} vs {}-{})", conf.window.first,
                                conf.window.last, syn.window.first, syn.window.last));
  }
  CombinedPanel panel;
  panel.rows = to_long(conf, Source::original);
  panel.n1 = panel.rows.size();
  auto syn_rows = to_long(syn, Source::synthetic);
  panel.n2 = syn_rows.size();
  panel.rows.insert(panel.rows.end(), std::make_move_iterator(syn_rows.begin()),
                    std::make_move_iterator(syn_rows.end()));
  return panel;
}

CombinedPanel combine_rows(std::vector<PanelRow> rows) {
  CombinedPanel panel;
  for (const auto& r : rows) (r.source == Source::synthetic ? panel.n2 : panel.n1) += 1;
  if (panel.n1 == 0 || panel.n2 == 0) throw DataError("combine_rows: one source is empty");
  panel.rows = std::move(rows);
  return panel;
}

PropensityFit fit_propensity(const CombinedPanel& panel, const PropensityOptions& options) {
  if (panel.n1 == 0 || panel.n2 == 0) throw DataError("fit_propensity: need rows from both sources");
  const auto n = static_cast<Eigen::Index>(panel.rows.size());

  // Column layout.
  std::vector<std::string> terms{"const"};
  int synthesized = 0;
  Eigen::Index emp_col = -1, pay_col = -1;
  if (options.continuous) {
    emp_col = static_cast<Eigen::Index>(terms.size());
    terms.push_back("log_employment");
    pay_col = static_cast<Eigen::Index>(terms.size());
    terms.push_back("log_payroll");
    synthesized += 2;
  }
  std::map<int, Eigen::Index> age_cols;
  if (options.age) {
    std::array<bool, kAgeClassCount> present{};
    for (const auto& r : panel.rows) present[static_cast<std::size_t>(r.age_class)] = true;
    for (int a = 1; a < kAgeClassCount; ++a) {
      if (!present[static_cast<std::size_t>(a)]) continue;
      age_cols[a] = static_cast<Eigen::Index>(terms.size());
      terms.push_back(age_class_label(static_cast<AgeClass>(a)));
      ++synthesized;
    }
  }
  std::map<int, Eigen::Index> year_cols;
  if (options.year_effects) {
    std::map<int, bool> years;
    for (const auto& r : panel.rows) years[r.year] = true;
    for (auto it = std::next(years.begin()); it != years.end(); ++it) {
      year_cols[it->first] = static_cast<Eigen::Index>(terms.size());
      terms.push_back(fmt::format("year:{}", it->first));
    }
  }
  std::map<std::string, Eigen::Index> industry_cols;
  if (options.industry_effects) {
    std::map<std::string, bool> codes;
    for (const auto& r : panel.rows) codes[r.industry] = true;
    for (auto it = std::next(codes.begin()); it != codes.end(); ++it) {
      industry_cols[it->first] = static_cast<Eigen::Index>(terms.size());
      terms.push_back("industry:" + it->first);
    }
  }

  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(terms.size()));
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = panel.rows[static_cast<std::size_t>(i)];
    x(i, 0) = 1.0;
    if (emp_col >= 0) {
      x(i, emp_col) = r.log_employment;
      x(i, pay_col) = r.log_payroll;
    }
    if (auto it = age_cols.find(static_cast<int>(r.age_class)); it != age_cols.end()) x(i, it->second) = 1.0;
    if (auto it = year_cols.find(r.year); it != year_cols.end()) x(i, it->second) = 1.0;
    if (auto it = industry_cols.find(r.industry); it != industry_cols.end()) x(i, it->second) = 1.0;
    y(i) = r.source == Source::synthetic ? 1.0 : 0.0;
  }

  const auto lf = fit_logit(x, y, terms, options.logit);
  PropensityFit fit;
  fit.terms = std::move(terms);
  fit.coef = lf.coef;
  fit.std_error = lf.std_error;
  fit.p_hat.assign(lf.fitted.data(), lf.fitted.data() + lf.fitted.size());
  fit.iterations = lf.iterations;
  fit.converged = lf.converged;
  fit.separated = lf.separated;
  fit.synthesized_predictors = synthesized;

  const double c = panel.c();
  const double null_ll = static_cast<double>(panel.n2) * std::log(c) + static_cast<double>(panel.n1) * std::log1p(-c);
  fit.pseudo_r2 = null_ll < 0.0 ? 1.0 - lf.log_likelihood / null_ll : 0.0;
  return fit;
}

double pmse(std::span<const double> p_hat, double c) {
  if (p_hat.empty()) throw DataError("pmse: no propensity scores");
  double s = 0.0;
  for (double p : p_hat) {
    if (!(p >= 0.0 && p <= 1.0)) throw DataError("pmse: propensity score outside [0,1]");
    s += (p - c) * (p - c);
  }
  return s / static_cast<double>(p_hat.size());
}

NullMoments pmse_null_moments(int k, double c, std::size_t n) {
  if (k < 2) throw DataError("pmse_null_moments: k must be at least 2");
  if (n < 1) throw DataError("pmse_null_moments: N must be positive");
  if (!(c > 0.0 && c < 1.0)) throw DataError("pmse_null_moments: c must lie in (0,1)");
  const double scale = (1.0 - c) * (1.0 - c) * c / static_cast<double>(n);
  return {(k - 1) * scale, std::sqrt(2.0 * (k - 1)) * scale};
}

int predictor_count(const PropensityFit& fit, KConvention convention) {
  return convention == KConvention::synthesized ? fit.synthesized_predictors : fit.parameter_count();
}

PmseReport pmse_report(const PropensityFit& fit, const CombinedPanel& panel, int k) {
  PmseReport rep;
  rep.c = panel.c();
  rep.n = panel.total();
  rep.k = k;
  rep.pmse = pmse(fit.p_hat, rep.c);
  rep.flagged = !fit.converged || fit.separated;
  if (k >= 2) {
    const auto m = pmse_null_moments(k, rep.c, rep.n);
    rep.e_null = m.mean;
    rep.sd_null = m.sd;
    rep.ratio = rep.pmse / m.mean;
    rep.standardized = (rep.pmse - m.mean) / m.sd;
  } else {
    rep.e_null = rep.sd_null = rep.ratio = rep.standardized = std::numeric_limits<double>::quiet_NaN();
  }
  return rep;
}

Interval confidence_interval(double estimate, double std_error, double level) {
  const double z = probit(0.5 + 0.5 * level);
  return {estimate - z * std_error, estimate + z * std_error};
}

double cio(Interval conf, Interval syn) {
  if (conf.lo > conf.hi || syn.lo > syn.hi) throw DataError("cio: interval with lo > hi");
  const double len_conf = conf.hi - conf.lo;
  const double len_syn = syn.hi - syn.lo;
  if (len_conf <= 0.0 || len_syn <= 0.0) throw DataError("cio: zero-length interval");
  const double overlap = std::max(0.0, std::min(conf.hi, syn.hi) - std::max(conf.lo, syn.lo));
  return 0.5 * (overlap / len_conf + overlap / len_syn);
}

}  // namespace synthreg
