#include "synthreg/panel_gmm.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <tuple>

#include <Eigen/Dense>
#include <boost/math/distributions/chi_squared.hpp>
#include <fmt/format.h>

#include "least_squares.hpp"

namespace synthreg {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

// Level-form regressor layout shared by OLS and GMM.
struct Layout {
  std::vector<std::string> names;
  std::map<int, Index> age;
  std::map<int, Index> year;
  std::map<std::string, Index> industry;
  Index const_col = -1;
  Index first_exogenous = 2;  // columns >= this are exogenous (age, year, const)

  Layout(const PanelDesign& d, bool with_const, bool with_industry) {
    names = {kLagTerm, kPayTerm};
    for (int a : d.age_classes) {
      age[a] = static_cast<Index>(names.size());
      names.push_back(age_class_label(static_cast<AgeClass>(a)));
    }
    for (int y : d.years) {
      if (y == d.year_reference) continue;
      year[y] = static_cast<Index>(names.size());
      names.push_back(fmt::format("year:{}", y));
    }
    if (with_const) {
      const_col = static_cast<Index>(names.size());
      names.push_back("const");
    }
    if (with_industry) {
      for (const auto& code : d.industries) {
        if (code == d.industry_reference) continue;
        industry[code] = static_cast<Index>(names.size());
        names.push_back("industry:" + code);
      }
    }
  }

  Index size() const { return static_cast<Index>(names.size()); }

  // Regressors of the level equation for period s >= 1 of entity e.
  void fill_level(const PanelSeries& e, std::size_t s, Eigen::Ref<Eigen::RowVectorXd, 0, Eigen::InnerStride<>> row) const {
    row.setZero();
    row(0) = e.log_employment[s - 1];
    row(1) = e.log_payroll[s];
    if (auto it = age.find(e.age_class[s]); it != age.end()) row(it->second) = 1.0;
    if (auto it = year.find(e.first_year + static_cast<int>(s)); it != year.end()) row(it->second) = 1.0;
    if (const_col >= 0) row(const_col) = 1.0;
    if (auto it = industry.find(e.industry); it != industry.end()) row(it->second) = 1.0;
  }
};

struct PseudoInverse {
  MatrixXd matrix;
  Index rank = 0;
};

PseudoInverse pinv_symmetric(const MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(m);
  const VectorXd& ev = es.eigenvalues();
  const double cutoff = std::max(ev.cwiseAbs().maxCoeff(), 1e-300) * 1e-12 * static_cast<double>(m.rows());
  VectorXd inv = VectorXd::Zero(ev.size());
  PseudoInverse out;
  for (Index i = 0; i < ev.size(); ++i) {
    if (ev(i) > cutoff) {
      inv(i) = 1.0 / ev(i);
      ++out.rank;
    }
  }
  out.matrix = es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
  return out;
}

MatrixXd solve_normal(const MatrixXd& m, const MatrixXd& rhs, const std::vector<std::string>& names,
                      const std::string& model) {
  Eigen::ColPivHouseholderQR<MatrixXd> qr(m);
  qr.setThreshold(1e-12);
  if (qr.rank() < m.cols()) {
    throw NumericalError(fmt::format("{}: parameters not identified (collinear: {})", model,
                                     detail::join(detail::collinear_columns(m, names))));
  }
  return qr.solve(rhs);
}

// Which lags and equations feed the GMM-style instruments.
struct InstrumentSpec {
  std::string model;
  bool system = false;
  int emp_min = 2;
  int emp_max = 4;
  int pay_min = 1;
  int pay_max = 4;
  bool collapse = true;
};

enum InstrumentKind { kDiffEmp = 0, kDiffPay = 1, kLevelEmp = 2, kLevelPay = 3 };
using InstrumentKey = std::tuple<int, int, int>;  // kind, equation year (0 if collapsed), lag

struct EntityBlock {
  MatrixXd z;
  MatrixXd x;
  VectorXd y;
  Index diff_rows = 0;  // leading rows are difference equations
};

class GmmProblem {
 public:
  GmmProblem(const PanelDesign& d, InstrumentSpec spec)
      : spec_(std::move(spec)), layout_(d, spec_.system, false) {
    for (const auto& e : d.entities) {
      if (e.periods() >= 3) {
        usable_.push_back(&e);
      } else if (e.periods() == 2) {
        ++dropped_;
      }
    }
    if (usable_.empty()) throw DataError(spec_.model + ": no entity has three consecutive periods");
    enumerate_instruments();
  }

  FitReport fit() {
    const Index k = layout_.size();
    const Index l = n_instruments_;
    MatrixXd zx = MatrixXd::Zero(l, k);
    VectorXd zy = VectorXd::Zero(l);
    MatrixXd zhz = MatrixXd::Zero(l, l);
    std::size_t n_obs = 0;
    for (const auto* e : usable_) {
      const auto b = block(*e);
      zx.noalias() += b.z.transpose() * b.x;
      zy.noalias() += b.z.transpose() * b.y;
      zhz.noalias() += b.z.transpose() * h_times(b, b.z);
      n_obs += static_cast<std::size_t>(b.y.size());
    }

    const auto w1 = pinv_symmetric(zhz);
    const Index effective = w1.rank;
    if (effective < k) {
      throw NumericalError(fmt::format("{}: {} instruments for {} parameters; model is underidentified",
                                       spec_.model, effective, k));
    }
    if (static_cast<std::size_t>(effective) >= usable_.size()) {
      throw NumericalError(fmt::format("{}: {} instruments for {} entities; use a smaller max_lag_depth", spec_.model,
                                       effective, usable_.size()));
    }

    const MatrixXd aw = zx.transpose() * w1.matrix;  // K x L
    const MatrixXd m = aw * zx;
    const MatrixXd proj = solve_normal(m, aw, layout_.names, spec_.model);  // M^-1 A'W1
    const VectorXd beta = proj * zy;

    // Residual pass: robust covariance ingredients and m2 pieces.
    MatrixXd s = MatrixXd::Zero(l, l);
    VectorXd q = VectorXd::Zero(k);
    std::vector<VectorXd> moment_contrib;
    std::vector<double> m2_contrib;
    moment_contrib.reserve(usable_.size());
    m2_contrib.reserve(usable_.size());
    std::size_t m2_pairs = 0;
    for (const auto* e : usable_) {
      const auto b = block(*e);
      const VectorXd u = b.y - b.x * beta;
      const VectorXd g = b.z.transpose() * u;
      s.noalias() += g * g.transpose();
      // Second-order autocorrelation of differenced residuals.
      double a = 0.0;
      for (Index r = 2; r < b.diff_rows; ++r) {
        a += u(r - 2) * u(r);
        q.noalias() += b.x.row(r).transpose() * u(r - 2);
        ++m2_pairs;
      }
      moment_contrib.push_back(g);
      m2_contrib.push_back(a);
    }

    const MatrixXd cov = proj * s * proj.transpose();
    FitReport rep;
    rep.model = spec_.model;
    rep.n_obs = n_obs;
    rep.n_entities = usable_.size();
    rep.n_instruments = static_cast<std::size_t>(effective);
    rep.dropped_entities = dropped_;
    for (Index j = 0; j < k; ++j) {
      rep.coefficients.push_back({layout_.names[static_cast<std::size_t>(j)], beta(j), std::sqrt(std::max(cov(j, j), 0.0))});
    }

    if (m2_pairs > 0) {
      const VectorXd c = proj.transpose() * q;
      double num = 0.0, var = 0.0;
      for (std::size_t i = 0; i < usable_.size(); ++i) {
        num += m2_contrib[i];
        const double se = m2_contrib[i] - c.dot(moment_contrib[i]);
        var += se * se;
      }
      if (var > 0.0) rep.m2 = num / std::sqrt(var);
    }

    // Two-step weighting for the overidentification statistic.
    const auto w2 = pinv_symmetric(s);
    const MatrixXd aw2 = zx.transpose() * w2.matrix;
    const VectorXd beta2 = solve_normal(aw2 * zx, aw2 * zy, layout_.names, spec_.model);
    const VectorXd gbar = zy - zx * beta2;
    const double j_stat = gbar.dot(w2.matrix * gbar);
    rep.sargan = sargan_test(j_stat, static_cast<int>(w2.rank), static_cast<int>(k));
    return rep;
  }

 private:
  // Diff rows: periods s >= 2. Level rows (system): periods s >= 1.
  template <typename Fn>
  void for_each_instrument(const PanelSeries& e, Fn&& fn) const {
    const auto periods = e.periods();
    for (std::size_t s = 2; s < periods; ++s) {
      const int year = spec_.collapse ? 0 : e.first_year + static_cast<int>(s);
      for (int lag = spec_.emp_min; lag <= spec_.emp_max; ++lag) {
        if (static_cast<int>(s) - lag >= 0) fn(true, s, InstrumentKey{kDiffEmp, year, lag}, e.log_employment[s - static_cast<std::size_t>(lag)]);
      }
      for (int lag = spec_.pay_min; lag <= spec_.pay_max; ++lag) {
        if (static_cast<int>(s) - lag >= 0) fn(true, s, InstrumentKey{kDiffPay, year, lag}, e.log_payroll[s - static_cast<std::size_t>(lag)]);
      }
    }
    if (!spec_.system) return;
    for (std::size_t s = 1; s < periods; ++s) {
      const int year = spec_.collapse ? 0 : e.first_year + static_cast<int>(s);
      // Differences dated one period after the shallowest difference-equation lag.
      const int emp_lag = spec_.emp_min - 1;
      if (static_cast<int>(s) - emp_lag - 1 >= 0) {
        const auto t = s - static_cast<std::size_t>(emp_lag);
        fn(false, s, InstrumentKey{kLevelEmp, year, emp_lag}, e.log_employment[t] - e.log_employment[t - 1]);
      }
      const int pay_lag = spec_.pay_min - 1;
      if (static_cast<int>(s) - pay_lag - 1 >= 0) {
        const auto t = s - static_cast<std::size_t>(pay_lag);
        fn(false, s, InstrumentKey{kLevelPay, year, pay_lag}, e.log_payroll[t] - e.log_payroll[t - 1]);
      }
    }
  }

  void enumerate_instruments() {
    std::set<InstrumentKey> keys;
    for (const auto* e : usable_) {
      for_each_instrument(*e, [&](bool, std::size_t, const InstrumentKey& key, double) { keys.insert(key); });
    }
    Index col = 0;
    for (const auto& key : keys) gmm_cols_[key] = col++;
    // IV-style: the exogenous regressors instrument themselves.
    exog_offset_ = col;
    n_instruments_ = col + (layout_.size() - layout_.first_exogenous);
  }

  EntityBlock block(const PanelSeries& e) const {
    const auto periods = static_cast<Index>(e.periods());
    const Index diff_rows = periods - 2;
    const Index level_rows = spec_.system ? periods - 1 : 0;
    const Index rows = diff_rows + level_rows;
    const Index k = layout_.size();
    EntityBlock b;
    b.diff_rows = diff_rows;
    b.z = MatrixXd::Zero(rows, n_instruments_);
    b.x.resize(rows, k);
    b.y.resize(rows);

    Eigen::RowVectorXd cur(k), prev(k);
    for (Index r = 0; r < diff_rows; ++r) {
      const auto s = static_cast<std::size_t>(r + 2);
      layout_.fill_level(e, s, cur);
      layout_.fill_level(e, s - 1, prev);
      b.x.row(r) = cur - prev;
      b.y(r) = e.log_employment[s] - e.log_employment[s - 1];
    }
    for (Index r = 0; r < level_rows; ++r) {
      const auto s = static_cast<std::size_t>(r + 1);
      layout_.fill_level(e, s, cur);
      b.x.row(diff_rows + r) = cur;
      b.y(diff_rows + r) = e.log_employment[s];
    }
    for_each_instrument(e, [&](bool diff, std::size_t s, const InstrumentKey& key, double v) {
      const Index row = diff ? static_cast<Index>(s) - 2 : diff_rows + static_cast<Index>(s) - 1;
      b.z(row, gmm_cols_.at(key)) = v;
    });
    const Index n_exog = k - layout_.first_exogenous;
    b.z.block(0, exog_offset_, rows, n_exog) = b.x.block(0, layout_.first_exogenous, rows, n_exog);
    return b;
  }

  // H * m for the one-step weight: MA(1) structure of differenced errors in
  // the difference block, identity in the level block.
  static MatrixXd h_times(const EntityBlock& b, const MatrixXd& m) {
    MatrixXd out = m;
    const Index d = b.diff_rows;
    for (Index r = 0; r < d; ++r) {
      out.row(r) = 2.0 * m.row(r);
      if (r > 0) out.row(r) -= m.row(r - 1);
      if (r + 1 < d) out.row(r) -= m.row(r + 1);
    }
    return out;
  }

  InstrumentSpec spec_;
  Layout layout_;
  std::vector<const PanelSeries*> usable_;
  std::size_t dropped_ = 0;
  std::map<InstrumentKey, Index> gmm_cols_;
  Index exog_offset_ = 0;
  Index n_instruments_ = 0;
};

InstrumentSpec make_spec(std::string model, bool system, int deepen, const GmmOptions& o) {
  if (o.max_lag_depth < 1) throw DataError("max_lag_depth must be at least 1");
  InstrumentSpec spec;
  spec.model = std::move(model);
  spec.system = system;
  spec.collapse = o.collapse;
  spec.emp_min = 2 + deepen;
  spec.pay_min = 1 + deepen;
  spec.emp_max = o.max_lag_depth;
  spec.pay_max = o.pay_max_lag_depth.value_or(o.max_lag_depth);
  if (spec.emp_max < spec.emp_min) {
    throw DataError(fmt::format("{}: max_lag_depth {} is shallower than the first valid lag {}", spec.model,
                                spec.emp_max, spec.emp_min));
  }
  if (spec.pay_max < spec.pay_min) {
    throw DataError(fmt::format("{}: payroll lag depth {} is shallower than the first valid lag {}", spec.model,
                                spec.pay_max, spec.pay_min));
  }
  return spec;
}

}  // namespace

std::size_t PanelDesign::dummy_columns() const {
  return (years.empty() ? 0 : years.size() - 1) + (industries.empty() ? 0 : industries.size() - 1) +
         age_classes.size();
}

PanelDesign build_design(const Register& r) {
  PanelDesign d;
  std::set<int> years;
  std::set<int> ages;
  std::set<std::string> industries;
  for (const auto& e : r.entities) {
    PanelSeries s;
    s.entity_id = e.entity_id;
    s.industry = e.industry;
    s.first_year = e.lifespan.first;
    for (std::size_t k = 0; k < e.employment.size(); ++k) {
      if (!(e.employment[k] > 0.0) || !(e.payroll[k] > 0.0)) {
        throw DataError(fmt::format("build_design: non-positive value for {}", e.entity_id));
      }
      s.log_employment.push_back(std::log(e.employment[k]));
      s.log_payroll.push_back(std::log(e.payroll[k]));
      s.age_class.push_back(static_cast<int>(age_class_of(static_cast<int>(k))));
      if (k >= 1) {
        years.insert(e.lifespan.first + static_cast<int>(k));
        if (s.age_class.back() > 0) ages.insert(s.age_class.back());
        industries.insert(e.industry);
        ++d.estimation_rows;
      }
    }
    if (s.periods() == 1) ++d.single_period_entities;
    d.entities.push_back(std::move(s));
  }
  if (years.size() < 2) throw DataError("build_design: fewer than 2 usable years");
  d.years.assign(years.begin(), years.end());
  d.age_classes.assign(ages.begin(), ages.end());
  d.industries.assign(industries.begin(), industries.end());
  d.year_reference = d.years.front();
  d.industry_reference = d.industries.front();
  return d;
}

const Coefficient& FitReport::coefficient(const std::string& term) const {
  for (const auto& c : coefficients) {
    if (c.term == term) return c;
  }
  throw DataError(fmt::format("{}: no coefficient '{}'", model, term));
}

bool FitReport::has(const std::string& term) const {
  return std::ranges::any_of(coefficients, [&](const Coefficient& c) { return c.term == term; });
}

FitReport ols_fit(const PanelDesign& d) {
  const Layout layout(d, true, true);
  const auto n = static_cast<Index>(d.estimation_rows);
  const Index k = layout.size();
  MatrixXd x(n, k);
  VectorXd y(n);
  Index row = 0;
  for (const auto& e : d.entities) {
    for (std::size_t s = 1; s < e.periods(); ++s) {
      layout.fill_level(e, s, x.row(row));
      y(row) = e.log_employment[s];
      ++row;
    }
  }
  if (n <= k) throw NumericalError("OLS: fewer observations than parameters");
  const auto ls = detail::least_squares(x, y, layout.names, "OLS");
  const double sigma2 = ls.ssr / static_cast<double>(n - k);
  MatrixXd xtx = MatrixXd::Zero(k, k);
  xtx.selfadjointView<Eigen::Lower>().rankUpdate(x.transpose());
  xtx = xtx.selfadjointView<Eigen::Lower>();
  const MatrixXd cov = sigma2 * xtx.ldlt().solve(MatrixXd::Identity(k, k));

  FitReport rep;
  rep.model = "OLS";
  rep.n_obs = static_cast<std::size_t>(n);
  rep.n_entities = d.entities.size() - d.single_period_entities;
  for (Index j = 0; j < k; ++j) {
    rep.coefficients.push_back({layout.names[static_cast<std::size_t>(j)], ls.coef(j), std::sqrt(std::max(cov(j, j), 0.0))});
  }
  const double sst = (y.array() - y.mean()).square().sum();
  rep.r_squared = sst > 0.0 ? 1.0 - ls.ssr / sst : 1.0;
  return rep;
}

FitReport diff_gmm_fit(const PanelDesign& d, const GmmOptions& o) {
  return GmmProblem(d, make_spec("GMM", false, 0, o)).fit();
}

FitReport system_gmm_fit(const PanelDesign& d, const GmmOptions& o) {
  return GmmProblem(d, make_spec("System GMM", true, 0, o)).fit();
}

FitReport system_gmm_ma_fit(const PanelDesign& d, const GmmOptions& o) {
  return GmmProblem(d, make_spec("System GMM MA", true, 1, o)).fit();
}

SarganResult sargan_test(double statistic, int instruments, int parameters) {
  SarganResult r;
  r.df = std::max(instruments - parameters, 0);
  if (r.df == 0) {
    r.degenerate = true;
    return r;
  }
  r.statistic = std::max(statistic, 0.0);
  r.p_value = chi_square_upper(r.statistic, r.df);
  return r;
}

double m2_test(const FitReport& fit) {
  if (!fit.m2) throw DataError(fit.model + ": m2 needs at least one entity with five periods");
  return *fit.m2;
}

double chi_square_upper(double statistic, int df) {
  if (df <= 0) return 1.0;
  if (statistic <= 0.0) return 1.0;
  return boost::math::cdf(boost::math::complement(boost::math::chi_squared(df), statistic));
}

double long_run_elasticity(double theta, double eta) {
  if (std::abs(1.0 - theta) < 1e-9) throw NumericalError("long-run elasticity undefined for theta = 1");
  return eta / (1.0 - theta);
}

StrategyResult strategy_run(const Register& conf, const Register& syn, const GmmOptions& options) {
  const auto dc = build_design(conf);
  const auto ds = build_design(syn);
  StrategyResult out;
  using Fit = FitReport (*)(const PanelDesign&, const GmmOptions&);
  const Fit gmm_models[] = {diff_gmm_fit, system_gmm_fit, system_gmm_ma_fit};
  out.conf.push_back(ols_fit(dc));
  out.syn.push_back(ols_fit(ds));
  for (auto fit : gmm_models) {
    out.conf.push_back(fit(dc, options));
    out.syn.push_back(fit(ds, options));
  }
  for (std::size_t i = 0; i < out.conf.size(); ++i) {
    const auto& c = out.conf[i];
    const auto& s = out.syn[i];
    BiasRow row;
    row.model = c.model;
    row.theta_conf = c.theta();
    row.theta_syn = s.theta();
    row.eta_conf = c.eta();
    row.eta_syn = s.eta();
    row.theta_bias = row.theta_syn - row.theta_conf;
    row.eta_bias = row.eta_syn - row.eta_conf;
    row.bias_sum = row.theta_bias + row.eta_bias;
    row.long_run_conf = long_run_elasticity(row.theta_conf, row.eta_conf);
    row.long_run_syn = long_run_elasticity(row.theta_syn, row.eta_syn);
    out.bias.push_back(row);
  }
  return out;
}

}  // namespace synthreg
