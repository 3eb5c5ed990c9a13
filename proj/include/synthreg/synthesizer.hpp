#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "synthreg/kde_transform.hpp"
#include "synthreg/random.hpp"
#include "synthreg/register.hpp"

namespace synthreg {

// Dirichlet posterior parameters for (first year, last year | first year).
struct LifespanModel {
  YearRange window;
  std::vector<double> first_year_alpha;  // index: year - window.first
  // last_year_alpha[f][k] is the parameter for last year = first + k, where
  // first = window.first + f.
  std::vector<std::vector<double>> last_year_alpha;
};

LifespanModel fit_lifespan_model(const Register& slice, double prior_alpha = 1.0);

struct Lifespan {
  int first_year;
  int last_year;
  bool operator==(const Lifespan&) const = default;
};

// One probability vector is drawn from each posterior, then n categories.
std::vector<Lifespan> sample_lifespans(const LifespanModel& model, std::size_t n, Rng& rng);
std::vector<Lifespan> sample_lifespans(const LifespanModel& model, std::size_t n, std::uint64_t seed);

// Per-industry transforms, all on the log scale so that inverse draws are
// positive after exponentiation.
struct IndustryTransforms {
  KdeTransform employment;          // all entity-years
  KdeTransform payroll;             // all entity-years
  KdeTransform initial_employment;  // first lifespan year only
};

IndustryTransforms build_transforms(const Register& slice);

struct RegressionFit {
  std::vector<std::string> terms;
  Eigen::VectorXd coef;
  double residual_sd = 0.0;
  std::size_t n = 0;

  double coefficient(const std::string& term) const;
};

// One block of consecutive years sharing a regression.
struct PathStratum {
  YearRange years;
  RegressionFit employment;  // 1, z_emp_lag, year dummies
  RegressionFit payroll;     // 1, z_pay_lag, z_emp, year dummies
};

struct PathModel {
  RegressionFit initial_payroll;   // 1, z_emp on first lifespan years
  std::vector<PathStratum> strata;  // empty when no entity-year has a lag

  const PathStratum* stratum_for(int year) const;
};

inline constexpr std::size_t kMinStratumObservations = 10;

PathModel fit_path_models(const Register& slice, const IndustryTransforms& transforms);

// Synthesizes one industry. Throws DataError or NumericalError when fitting
// fails.
Register synthesize_industry(const Register& slice, std::uint64_t seed);

struct IndustryReport {
  std::string industry;
  std::size_t n_entities = 0;
  std::size_t observations = 0;  // confidential entity-years
  bool synthesized = false;
  std::string failure_reason;
};

struct SynthesisResult {
  Register synthetic;
  std::vector<IndustryReport> industries;
  // Values in the last window year are known to be of lower quality.
  int flagged_year = 0;
  std::size_t flagged_rows = 0;
};

SynthesisResult synthesize_register(const Register& r, std::uint64_t seed);

}  // namespace synthreg
