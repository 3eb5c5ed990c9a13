#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "synthreg/register.hpp"

namespace synthreg {

// Entity time series in log form, years contiguous.
struct PanelSeries {
  std::string entity_id;
  std::string industry;
  int first_year = 0;
  std::vector<double> log_employment;
  std::vector<double> log_payroll;
  std::vector<int> age_class;

  std::size_t periods() const { return log_employment.size(); }
};

// Dynamic employment equation
//   Emp_et = b0 + theta*Emp_e,t-1 + eta*Pay_et + Age_et'beta + lambda_t (+ gamma_i | alpha_e) + eps_et
// Rows without a lag are not estimation rows.
struct PanelDesign {
  std::vector<PanelSeries> entities;
  std::vector<int> age_classes;          // non-reference classes with estimation rows
  std::vector<int> years;                // estimation years, sorted
  std::vector<std::string> industries;   // sorted
  int year_reference = 0;                // earliest estimation year by default
  std::string industry_reference;        // smallest code by default
  std::size_t estimation_rows = 0;
  std::size_t single_period_entities = 0;

  // (#years - 1) + (#industries - 1) + #age dummies
  std::size_t dummy_columns() const;
};

PanelDesign build_design(const Register& r);

struct Coefficient {
  std::string term;
  double estimate = 0.0;
  double std_error = 0.0;
};

struct SarganResult {
  double statistic = 0.0;
  int df = 0;
  double p_value = 1.0;
  bool degenerate = false;  // exactly identified
};

inline constexpr const char* kLagTerm = "lag_employment";
inline constexpr const char* kPayTerm = "log_payroll";

struct FitReport {
  std::string model;
  std::vector<Coefficient> coefficients;
  std::size_t n_obs = 0;
  std::size_t n_entities = 0;
  std::size_t n_instruments = 0;
  std::size_t dropped_entities = 0;
  std::optional<SarganResult> sargan;
  std::optional<double> m2;
  std::optional<double> r_squared;

  const Coefficient& coefficient(const std::string& term) const;
  bool has(const std::string& term) const;
  double theta() const { return coefficient(kLagTerm).estimate; }
  double eta() const { return coefficient(kPayTerm).estimate; }
};

struct GmmOptions {
  int max_lag_depth = 4;
  bool collapse = true;
  // Deepest payroll lag; defaults to max_lag_depth.
  std::optional<int> pay_max_lag_depth;
};

FitReport ols_fit(const PanelDesign& design);
FitReport diff_gmm_fit(const PanelDesign& design, const GmmOptions& options = {});
FitReport system_gmm_fit(const PanelDesign& design, const GmmOptions& options = {});
// Instruments deepened by one lag; valid under MA(1) disturbances.
FitReport system_gmm_ma_fit(const PanelDesign& design, const GmmOptions& options = {});

// Overidentification test from the minimized two-step criterion. With no
// surplus instruments the result is degenerate: statistic 0, p = 1.
SarganResult sargan_test(double statistic, int instruments, int parameters);

// Second-order serial correlation z-score of differenced residuals. Throws
// when the fit had no entity with at least five periods.
double m2_test(const FitReport& fit);

// Upper-tail chi-square probability.
double chi_square_upper(double statistic, int df);

double long_run_elasticity(double theta, double eta);

struct BiasRow {
  std::string model;
  double theta_conf = 0.0;
  double theta_syn = 0.0;
  double eta_conf = 0.0;
  double eta_syn = 0.0;
  double theta_bias = 0.0;
  double eta_bias = 0.0;
  double bias_sum = 0.0;
  double long_run_conf = 0.0;
  double long_run_syn = 0.0;
};

struct StrategyResult {
  std::vector<FitReport> conf;  // OLS, GMM, System GMM, System GMM MA
  std::vector<FitReport> syn;
  std::vector<BiasRow> bias;
};

StrategyResult strategy_run(const Register& conf, const Register& syn, const GmmOptions& options = {});

}  // namespace synthreg
