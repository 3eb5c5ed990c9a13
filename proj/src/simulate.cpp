#include "synthreg/simulate.hpp"

#include <cmath>

#include <fmt/format.h>

#include "synthreg/random.hpp"

namespace synthreg {

namespace {

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

int draw_last_year(int first, int window_last, double hazard, Rng& rng) {
  int last = first;
  if (hazard <= 0.0) return window_last;
  while (last < window_last && uniform01(rng) >= hazard) ++last;
  return last;
}

// Log employment path: stationary AR(1) around the industry mean.
void fill_paths(EntityHistory& e, double mean, double rho, double sigma, double wage, double wage_sigma,
                Rng& rng) {
  const int len = e.lifespan.length();
  const double innovation_sd = sigma * std::sqrt(1.0 - rho * rho);
  e.employment.resize(static_cast<std::size_t>(len));
  e.payroll.resize(static_cast<std::size_t>(len));
  double x = mean + sigma * standard_normal(rng);
  for (int k = 0; k < len; ++k) {
    if (k > 0) x = mean + rho * (x - mean) + innovation_sd * standard_normal(rng);
    const double log_pay = x + wage + wage_sigma * standard_normal(rng);
    e.employment[static_cast<std::size_t>(k)] = std::exp(x);
    e.payroll[static_cast<std::size_t>(k)] = std::exp(log_pay);
  }
}

double industry_wage(const SimConfig& cfg, int j) {
  return cfg.wage_level + 0.15 * ((j % 5) - 2);
}

double industry_size(const SimConfig& cfg, int j) { return cfg.size_mean + 0.2 * ((j % 3) - 1); }

}  // namespace

void validate_sim_config(const SimConfig& cfg) {
  if (cfg.n_industries < 1 || cfg.entities_per_industry < 1)
    throw DataError("simulation needs at least one industry and one entity per industry");
  if (cfg.window.first > cfg.window.last || cfg.window.length() > kMaxRangeLength)
    throw DataError("simulation window is empty or longer than 200 years");
  if (!is_probability(cfg.entry_rate) || !is_probability(cfg.exit_hazard) || !is_probability(cfg.break_share))
    throw DataError("entry_rate, exit_hazard and break_share must lie in [0,1]");
  if (!(cfg.ar1_rho > 0.0 && cfg.ar1_rho < 1.0)) throw DataError("ar1_rho must lie in (0,1)");
  if (cfg.size_sigma < 0.0 || cfg.wage_sigma < 0.0) throw DataError("standard deviations must be non-negative");
  if (cfg.structural_break_year && !cfg.window.contains(*cfg.structural_break_year))
    throw DataError("structural_break_year outside the window");
}

std::string sim_industry_code(int j) { return fmt::format("{}{}0", 11 + 10 * (j / 2), j % 2); }

Register simulate_register(const SimConfig& cfg) {
  validate_sim_config(cfg);
  const int years = cfg.window.length();
  // P(first year = window start) carries the left-censored stock.
  const double start_mass = 1.0 / (1.0 + cfg.entry_rate * (years - 1));

  std::vector<EntityHistory> entities;
  entities.reserve(static_cast<std::size_t>(cfg.n_industries) *
                   static_cast<std::size_t>(cfg.entities_per_industry));
  for (int j = 0; j < cfg.n_industries; ++j) {
    const std::string code = sim_industry_code(j);
    Rng rng(sub_seed(cfg.seed, "industry:" + code));
    const double wage = industry_wage(cfg, j);
    const double size = industry_size(cfg, j);
    for (int i = 0; i < cfg.entities_per_industry; ++i) {
      EntityHistory e;
      e.entity_id = fmt::format("{}-{:06d}", code, i + 1);
      e.industry = code;
      int first = cfg.window.first;
      if (years > 1 && uniform01(rng) >= start_mass) {
        first = cfg.window.first + 1 + static_cast<int>(uniform01(rng) * (years - 1));
        first = std::min(first, cfg.window.last);
      }
      e.lifespan = {first, draw_last_year(first, cfg.window.last, cfg.exit_hazard, rng)};
      fill_paths(e, size, cfg.ar1_rho, cfg.size_sigma, wage, cfg.wage_sigma, rng);
      entities.push_back(std::move(e));
    }
    if (cfg.structural_break_year) {
      // Cohort whose records appear before their size is known.
      Rng brng(sub_seed(cfg.seed, "break:" + code));
      const int n_break = static_cast<int>(std::lround(cfg.break_share * cfg.entities_per_industry));
      const int first = *cfg.structural_break_year;
      for (int i = 0; i < n_break; ++i) {
        EntityHistory e;
        e.entity_id = fmt::format("{}-B{:05d}", code, i + 1);
        e.industry = code;
        e.lifespan = {first, draw_last_year(first, cfg.window.last, cfg.exit_hazard, brng)};
        e.missing_years_before = std::min(2, first - cfg.window.first);
        fill_paths(e, size, cfg.ar1_rho, cfg.size_sigma, wage, cfg.wage_sigma, brng);
        entities.push_back(std::move(e));
      }
    }
  }
  return make_register(std::move(entities), cfg.window);
}

std::vector<std::pair<std::string, double>> sim_truth(const SimConfig& cfg) {
  std::vector<std::pair<std::string, double>> out = {
      {"n_industries", cfg.n_industries},
      {"entities_per_industry", cfg.entities_per_industry},
      {"first_year", cfg.window.first},
      {"last_year", cfg.window.last},
      {"entry_rate", cfg.entry_rate},
      {"exit_hazard", cfg.exit_hazard},
      {"ar1_rho", cfg.ar1_rho},
      {"size_sigma", cfg.size_sigma},
      {"wage_sigma", cfg.wage_sigma},
      {"left_censored_share", 1.0 / (1.0 + cfg.entry_rate * (cfg.window.length() - 1))},
      {"seed", static_cast<double>(cfg.seed)},
  };
  if (cfg.structural_break_year) {
    out.emplace_back("structural_break_year", *cfg.structural_break_year);
    out.emplace_back("break_share", cfg.break_share);
  }
  for (int j = 0; j < cfg.n_industries; ++j) {
    const auto code = sim_industry_code(j);
    out.emplace_back("size_mean:" + code, industry_size(cfg, j));
    out.emplace_back("wage_level:" + code, industry_wage(cfg, j));
  }
  return out;
}

Register simulate_dynamic_panel(const DynamicPanelConfig& cfg) {
  if (!(std::abs(cfg.theta) < 1.0)) throw DataError("dynamic panel requires |theta| < 1");
  if (cfg.n < 1 || cfg.t < 1 || cfg.n_industries < 1) throw DataError("dynamic panel needs n, t >= 1");
  if (cfg.max_entry_offset < 0) throw DataError("max_entry_offset must be non-negative");

  Rng rng(sub_seed(cfg.seed, "dynamic-panel"));
  const YearRange window{cfg.start_year, cfg.start_year + cfg.max_entry_offset + cfg.t - 1};
  std::vector<double> year_effect(static_cast<std::size_t>(window.length()));
  for (double& v : year_effect) v = cfg.year_effect_sd * standard_normal(rng);

  std::vector<EntityHistory> entities;
  entities.reserve(static_cast<std::size_t>(cfg.n));
  const double pay_sd = cfg.pay_noise_sd / std::sqrt(1.0 - cfg.pay_persistence * cfg.pay_persistence);
  for (int i = 0; i < cfg.n; ++i) {
    const int industry = i % cfg.n_industries;
    const double alpha = 0.2 * industry + cfg.effect_sd * standard_normal(rng);
    const int offset = static_cast<int>(uniform01(rng) * (cfg.max_entry_offset + 1));
    const int first = window.first + std::min(offset, cfg.max_entry_offset);

    const double pay_center = cfg.pay_mean + cfg.pay_effect_loading * alpha;
    double pay = pay_center + pay_sd * standard_normal(rng);
    double y = (cfg.intercept + cfg.eta * pay_center + alpha) / (1.0 - cfg.theta);
    double prev_eps = 0.0;

    EntityHistory e;
    e.entity_id = fmt::format("d{:06d}", i + 1);
    e.industry = sim_industry_code(industry);
    e.lifespan = {first, first + cfg.t - 1};
    for (int s = -cfg.burn_in; s < cfg.t; ++s) {
      const double eps = cfg.noise_sd * standard_normal(rng);
      const double shock = eps + (cfg.ma1_errors ? prev_eps : 0.0);
      pay = pay_center + cfg.pay_persistence * (pay - pay_center) + cfg.pay_noise_sd * standard_normal(rng) +
            cfg.pay_feedback * eps;
      double systematic = cfg.intercept + cfg.theta * y + cfg.eta * pay + alpha;
      if (s >= 0) {
        const auto cls = static_cast<int>(age_class_of(s));
        if (cls > 0) systematic += cfg.age_effects[static_cast<std::size_t>(cls - 1)];
        systematic += year_effect[static_cast<std::size_t>(first + s - window.first)];
      }
      y = systematic + shock;
      prev_eps = eps;
      if (s >= 0) {
        e.employment.push_back(std::exp(y));
        e.payroll.push_back(std::exp(pay));
      }
    }
    entities.push_back(std::move(e));
  }
  return make_register(std::move(entities), window);
}

Register simulate_dynamic_panel(double theta, double eta, int n, int t, std::uint64_t seed) {
  DynamicPanelConfig cfg;
  cfg.theta = theta;
  cfg.eta = eta;
  cfg.n = n;
  cfg.t = t;
  cfg.seed = seed;
  return simulate_dynamic_panel(cfg);
}

}  // namespace synthreg
