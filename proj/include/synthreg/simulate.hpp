#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "synthreg/register.hpp"

namespace synthreg {

// Ground-truth register generator. Every industry gets its own random stream
// derived from (seed, industry code).
struct SimConfig {
  int n_industries = 5;
  int entities_per_industry = 2000;
  YearRange window{1991, 2015};
  // Yearly entrant mass relative to the stock alive at the window start.
  double entry_rate = 0.08;
  double exit_hazard = 0.08;
  double ar1_rho = 0.8;
  double size_mean = 1.6;  // mean log employment
  double size_sigma = 1.0;
  double wage_level = 3.5;  // mean log wage; industries are spread around it
  double wage_sigma = 0.25;
  std::optional<int> structural_break_year;
  double break_share = 0.1;  // injected cohort size per industry, relative
  std::uint64_t seed = 20240101;
};

void validate_sim_config(const SimConfig& cfg);

// Industry code of the j-th simulated industry (4 digits; two-digit prefixes
// are shared by pairs so that share tables can aggregate).
std::string sim_industry_code(int j);

Register simulate_register(const SimConfig& cfg);

// Parameter sidecar for test harnesses: (name, value) pairs.
std::vector<std::pair<std::string, double>> sim_truth(const SimConfig& cfg);

// Data-generating process of the dynamic employment equation:
//   y_et = c + theta*y_e,t-1 + eta*p_et + age_et'beta + lambda_t + alpha_e + u_et
// with u_et = eps_et (+ eps_e,t-1 when ma1_errors). Pay follows a persistent
// AR(1) whose mean loads on alpha_e; pay_feedback > 0 makes pay respond to the
// current shock, which invalidates lagged-pay instruments.
struct DynamicPanelConfig {
  double theta = 0.5;
  double eta = 0.4;
  int n = 2000;
  int t = 10;
  std::uint64_t seed = 7;
  double intercept = 1.0;
  double noise_sd = 0.2;
  double effect_sd = 0.4;
  double pay_mean = 3.0;
  double pay_persistence = 0.6;
  double pay_effect_loading = 0.5;
  double pay_noise_sd = 0.3;
  double pay_feedback = 0.0;
  bool ma1_errors = false;
  // Effects of age classes 3-4, 5-7, 8-12, 13+ relative to 0-2.
  std::array<double, 4> age_effects{-0.04, -0.07, -0.09, -0.11};
  double year_effect_sd = 0.05;
  int n_industries = 3;
  int max_entry_offset = 4;  // first years staggered over [start, start+offset]
  int start_year = 2000;
  int burn_in = 50;
};

Register simulate_dynamic_panel(const DynamicPanelConfig& cfg);
Register simulate_dynamic_panel(double theta, double eta, int n, int t, std::uint64_t seed);

}  // namespace synthreg
