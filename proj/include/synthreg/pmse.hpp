#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "synthreg/logit.hpp"
#include "synthreg/register.hpp"

namespace synthreg {

// Long-format rows of both sources; source == synthetic is the indicator
// I_et = 1.
struct CombinedPanel {
  std::vector<PanelRow> rows;
  std::size_t n1 = 0;  // original rows
  std::size_t n2 = 0;  // synthetic rows

  std::size_t total() const { return n1 + n2; }
  double c() const { return static_cast<double>(n2) / static_cast<double>(total()); }
};

CombinedPanel build_combined(const Register& conf, const Register& syn);

// Wraps already-labelled rows (e.g. random splits of one register).
CombinedPanel combine_rows(std::vector<PanelRow> rows);

struct PropensityOptions {
  bool continuous = true;  // log employment and log payroll
  bool age = true;
  bool year_effects = true;
  bool industry_effects = true;
  LogitOptions logit;
};

struct PropensityFit {
  std::vector<std::string> terms;
  Eigen::VectorXd coef;
  Eigen::VectorXd std_error;
  std::vector<double> p_hat;
  int iterations = 0;
  bool converged = false;
  bool separated = false;
  double pseudo_r2 = 0.0;  // McFadden
  // Non-intercept columns built from synthesized variables (employment,
  // payroll, age dummies).
  int synthesized_predictors = 0;

  int parameter_count() const { return static_cast<int>(coef.size()); }
};

// Reference categories: age 0-2, earliest year, smallest industry code.
PropensityFit fit_propensity(const CombinedPanel& panel, const PropensityOptions& options = {});

double pmse(std::span<const double> p_hat, double c);

struct NullMoments {
  double mean = 0.0;
  double sd = 0.0;
};

NullMoments pmse_null_moments(int k, double c, std::size_t n);

// How k is counted for the null moments. synthesized: employment, payroll
// and each age dummy. parameters: every estimated coefficient including the
// intercept and the fixed effects.
enum class KConvention { synthesized, parameters };

int predictor_count(const PropensityFit& fit, KConvention convention);

struct PmseReport {
  double pmse = 0.0;
  double e_null = 0.0;
  double sd_null = 0.0;
  double ratio = 0.0;
  double standardized = 0.0;
  int k = 0;
  std::size_t n = 0;
  double c = 0.0;
  bool flagged = false;  // fit did not converge or separated
};

PmseReport pmse_report(const PropensityFit& fit, const CombinedPanel& panel, int k);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

Interval confidence_interval(double estimate, double std_error, double level = 0.95);

// Confidence interval overlap: mean of the overlap's share of each interval.
double cio(Interval conf, Interval syn);

}  // namespace synthreg
