#include "synthreg/synthesizer.hpp"

#include <cmath>

#include <fmt/format.h>

#include "least_squares.hpp"

namespace synthreg {

namespace {

struct LaggedObs {
  int year;
  double z_emp;
  double z_emp_lag;
  double z_pay;
  double z_pay_lag;
};

RegressionFit fit_regression(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, std::vector<std::string> terms,
                             const std::string& context) {
  const auto ls = detail::least_squares(x, y, terms, context);
  RegressionFit fit;
  fit.terms = std::move(terms);
  fit.coef = ls.coef;
  fit.n = static_cast<std::size_t>(x.rows());
  const auto dof = std::max<Eigen::Index>(x.rows() - x.cols(), 1);
  fit.residual_sd = std::sqrt(ls.ssr / static_cast<double>(dof));
  return fit;
}

// Groups consecutive years into strata with at least the minimum number of
// lagged observations; a short tail joins the preceding stratum.
std::vector<YearRange> form_strata(const YearRange& years, const std::map<int, std::size_t>& counts) {
  std::vector<YearRange> strata;
  std::vector<std::size_t> sizes;
  int start = years.first;
  std::size_t acc = 0;
  for (int y = years.first; y <= years.last; ++y) {
    const auto it = counts.find(y);
    acc += it == counts.end() ? 0 : it->second;
    if (acc >= kMinStratumObservations) {
      strata.push_back({start, y});
      sizes.push_back(acc);
      start = y + 1;
      acc = 0;
    }
  }
  if (start <= years.last) {
    if (strata.empty()) {
      if (acc > 0) {
        throw DataError(fmt::format("only {} lagged entity-years in {}-{}; at least {} required", acc, years.first,
                                    years.last, kMinStratumObservations));
      }
    } else {
      strata.back().last = years.last;
    }
  }
  return strata;
}

// Year dummies for years with data in the stratum; the first such year is
// the reference.
std::vector<int> dummy_years(const YearRange& stratum, const std::map<int, std::size_t>& counts) {
  std::vector<int> years;
  bool reference_taken = false;
  for (int y = stratum.first; y <= stratum.last; ++y) {
    const auto it = counts.find(y);
    if (it == counts.end() || it->second == 0) continue;
    if (!reference_taken) {
      reference_taken = true;
      continue;
    }
    years.push_back(y);
  }
  return years;
}

double predict(const RegressionFit& fit, std::initializer_list<double> leading, int year,
               const std::vector<int>& dummies) {
  Eigen::Index j = 0;
  double v = 0.0;
  for (double x : leading) v += fit.coef(j++) * x;
  for (int d : dummies) {
    if (d == year) v += fit.coef(j);
    ++j;
  }
  return v;
}

std::vector<int> dummies_of(const RegressionFit& fit, std::size_t leading) {
  std::vector<int> years;
  for (std::size_t k = leading; k < fit.terms.size(); ++k) years.push_back(std::stoi(fit.terms[k].substr(5)));
  return years;
}

}  // namespace

double RegressionFit::coefficient(const std::string& term) const {
  for (std::size_t k = 0; k < terms.size(); ++k) {
    if (terms[k] == term) return coef(static_cast<Eigen::Index>(k));
  }
  return 0.0;
}

LifespanModel fit_lifespan_model(const Register& slice, double prior_alpha) {
  if (slice.entities.empty()) throw DataError("fit_lifespan_model: empty slice");
  if (!(prior_alpha > 0.0)) throw DataError("fit_lifespan_model: prior_alpha must be positive");
  LifespanModel m;
  m.window = slice.window;
  const int years = slice.window.length();
  m.first_year_alpha.assign(static_cast<std::size_t>(years), prior_alpha);
  m.last_year_alpha.resize(static_cast<std::size_t>(years));
  for (int f = 0; f < years; ++f) m.last_year_alpha[static_cast<std::size_t>(f)].assign(static_cast<std::size_t>(years - f), prior_alpha);
  for (const auto& e : slice.entities) {
    const auto f = static_cast<std::size_t>(e.lifespan.first - slice.window.first);
    const auto k = static_cast<std::size_t>(e.lifespan.last - e.lifespan.first);
    m.first_year_alpha[f] += 1.0;
    m.last_year_alpha[f][k] += 1.0;
  }
  return m;
}

std::vector<Lifespan> sample_lifespans(const LifespanModel& model, std::size_t n, Rng& rng) {
  const auto first_probs = draw_dirichlet(model.first_year_alpha, rng);
  std::vector<std::vector<double>> last_probs;
  last_probs.reserve(model.last_year_alpha.size());
  for (const auto& alpha : model.last_year_alpha) last_probs.push_back(draw_dirichlet(alpha, rng));

  std::vector<Lifespan> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto f = draw_categorical(first_probs, rng);
    const auto k = draw_categorical(last_probs[f], rng);
    const int first = model.window.first + static_cast<int>(f);
    out.push_back({first, first + static_cast<int>(k)});
  }
  return out;
}

std::vector<Lifespan> sample_lifespans(const LifespanModel& model, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  return sample_lifespans(model, n, rng);
}

IndustryTransforms build_transforms(const Register& slice) {
  std::vector<double> emp, pay, initial;
  emp.reserve(slice.entity_years());
  pay.reserve(slice.entity_years());
  for (const auto& e : slice.entities) {
    for (std::size_t k = 0; k < e.employment.size(); ++k) {
      emp.push_back(std::log(e.employment[k]));
      pay.push_back(std::log(e.payroll[k]));
    }
    initial.push_back(std::log(e.employment.front()));
  }
  return {KdeTransform::build(emp), KdeTransform::build(pay), KdeTransform::build(initial)};
}

const PathStratum* PathModel::stratum_for(int year) const {
  for (const auto& s : strata) {
    if (s.years.contains(year)) return &s;
  }
  return nullptr;
}

PathModel fit_path_models(const Register& slice, const IndustryTransforms& t) {
  PathModel model;

  // Initial-year payroll given employment.
  {
    const auto n = static_cast<Eigen::Index>(slice.entities.size());
    Eigen::MatrixXd x(n, 2);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& e = slice.entities[static_cast<std::size_t>(i)];
      x(i, 0) = 1.0;
      x(i, 1) = t.employment.forward(std::log(e.employment.front()));
      y(i) = t.payroll.forward(std::log(e.payroll.front()));
    }
    model.initial_payroll = fit_regression(x, y, {"const", "z_emp"}, "initial-year payroll model");
  }

  std::vector<LaggedObs> obs;
  std::map<int, std::size_t> counts;
  for (const auto& e : slice.entities) {
    for (std::size_t k = 1; k < e.employment.size(); ++k) {
      const int year = e.lifespan.first + static_cast<int>(k);
      obs.push_back({year, t.employment.forward(std::log(e.employment[k])),
                     t.employment.forward(std::log(e.employment[k - 1])), t.payroll.forward(std::log(e.payroll[k])),
                     t.payroll.forward(std::log(e.payroll[k - 1]))});
      ++counts[year];
    }
  }
  if (obs.empty() || slice.window.length() < 2) return model;

  const auto ranges = form_strata({slice.window.first + 1, slice.window.last}, counts);
  for (const auto& range : ranges) {
    const auto dummies = dummy_years(range, counts);
    std::vector<const LaggedObs*> rows;
    for (const auto& o : obs) {
      if (range.contains(o.year)) rows.push_back(&o);
    }
    const auto n = static_cast<Eigen::Index>(rows.size());
    const auto nd = static_cast<Eigen::Index>(dummies.size());
    Eigen::MatrixXd xe = Eigen::MatrixXd::Zero(n, 2 + nd);
    Eigen::MatrixXd xp = Eigen::MatrixXd::Zero(n, 3 + nd);
    Eigen::VectorXd ye(n), yp(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& o = *rows[static_cast<std::size_t>(i)];
      xe(i, 0) = 1.0;
      xe(i, 1) = o.z_emp_lag;
      xp(i, 0) = 1.0;
      xp(i, 1) = o.z_pay_lag;
      xp(i, 2) = o.z_emp;
      for (Eigen::Index d = 0; d < nd; ++d) {
        if (dummies[static_cast<std::size_t>(d)] == o.year) {
          xe(i, 2 + d) = 1.0;
          xp(i, 3 + d) = 1.0;
        }
      }
      ye(i) = o.z_emp;
      yp(i) = o.z_pay;
    }
    std::vector<std::string> emp_terms{"const", "z_emp_lag"};
    std::vector<std::string> pay_terms{"const", "z_pay_lag", "z_emp"};
    for (int d : dummies) {
      emp_terms.push_back(fmt::format("year:{}", d));
      pay_terms.push_back(fmt::format("year:{}", d));
    }
    const std::string label = fmt::format("stratum {}-{}", range.first, range.last);
    model.strata.push_back({range, fit_regression(xe, ye, std::move(emp_terms), label + " employment"),
                            fit_regression(xp, yp, std::move(pay_terms), label + " payroll")});
  }
  return model;
}

Register synthesize_industry(const Register& slice, std::uint64_t seed) {
  if (slice.entities.empty()) throw DataError("synthesize_industry: empty slice");
  const std::string& industry = slice.entities.front().industry;
  Rng rng(seed);

  const auto lifespan_model = fit_lifespan_model(slice);
  const auto lifespans = sample_lifespans(lifespan_model, slice.entities.size(), rng);
  const auto transforms = build_transforms(slice);
  const auto paths = fit_path_models(slice, transforms);

  std::vector<std::vector<int>> emp_dummies, pay_dummies;
  for (const auto& s : paths.strata) {
    emp_dummies.push_back(dummies_of(s.employment, 2));
    pay_dummies.push_back(dummies_of(s.payroll, 3));
  }

  const auto& ip = paths.initial_payroll;
  std::vector<EntityHistory> entities;
  entities.reserve(lifespans.size());
  for (std::size_t i = 0; i < lifespans.size(); ++i) {
    EntityHistory e;
    e.entity_id = fmt::format("{}-S{:06d}", industry, i + 1);
    e.industry = industry;
    e.lifespan = {lifespans[i].first_year, lifespans[i].last_year};
    const auto len = static_cast<std::size_t>(e.lifespan.length());
    e.employment.resize(len);
    e.payroll.resize(len);

    double z_emp = 0.0;
    double z_pay = 0.0;
    for (std::size_t k = 0; k < len; ++k) {
      const int year = e.lifespan.first + static_cast<int>(k);
      const PathStratum* s = k == 0 ? nullptr : paths.stratum_for(year);
      double log_emp;
      if (s == nullptr) {
        // First year, or no path model: draw from the initial-year marginal.
        log_emp = transforms.initial_employment.inverse(standard_normal(rng));
        z_emp = transforms.employment.forward(log_emp);
        z_pay = ip.coef(0) + ip.coef(1) * z_emp + ip.residual_sd * standard_normal(rng);
      } else {
        const auto si = static_cast<std::size_t>(s - paths.strata.data());
        z_emp = predict(s->employment, {1.0, z_emp}, year, emp_dummies[si]) +
                s->employment.residual_sd * standard_normal(rng);
        z_pay = predict(s->payroll, {1.0, z_pay, z_emp}, year, pay_dummies[si]) +
                s->payroll.residual_sd * standard_normal(rng);
        log_emp = transforms.employment.inverse(z_emp);
      }
      const double log_pay = transforms.payroll.inverse(z_pay);
      e.employment[k] = std::exp(log_emp);
      e.payroll[k] = std::exp(log_pay);
      // Keep the lag on the scale actually realized after inversion.
      z_emp = transforms.employment.forward(log_emp);
      z_pay = transforms.payroll.forward(log_pay);
    }
    entities.push_back(std::move(e));
  }
  return make_register(std::move(entities), slice.window);
}

SynthesisResult synthesize_register(const Register& r, std::uint64_t seed) {
  SynthesisResult result;
  result.flagged_year = r.window.last;
  std::vector<EntityHistory> entities;
  for (const auto& code : r.industry_codes) {
    const auto slice = r.industry_slice(code);
    IndustryReport rep;
    rep.industry = code;
    rep.n_entities = slice.entities.size();
    rep.observations = slice.entity_years();
    try {
      auto syn = synthesize_industry(slice, sub_seed(seed, "synthesize:" + code));
      for (auto& e : syn.entities) {
        if (e.lifespan.contains(result.flagged_year)) ++result.flagged_rows;
        entities.push_back(std::move(e));
      }
      rep.synthesized = true;
    } catch (const std::exception& ex) {
      rep.failure_reason = ex.what();
    }
    result.industries.push_back(std::move(rep));
  }
  result.synthetic = make_register(std::move(entities), r.window);
  return result;
}

}  // namespace synthreg
