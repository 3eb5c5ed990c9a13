#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "synthreg/pipeline.hpp"

int main(int argc, char** argv) {
  using namespace synthreg;
  PipelineConfig cfg;
  std::string k_convention = "synthesized";
  std::string input, synthetic, out = ".";

  CLI::App app{"Synthetic business register toolkit"};
  app.set_config("--config", "", "TOML configuration file; command-line flags take precedence");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.require_subcommand(1, 1);

  app.add_option("--out", out, "Output directory (must exist)");
  app.add_option("--input", input, "Confidential register CSV (default OUT/register.csv)");
  app.add_option("--synthetic", synthetic, "Synthetic register CSV (default OUT/synthetic.csv)");
  app.add_option("--seed", cfg.seed, "Master seed");
  app.add_option("--trim_first", cfg.trim_first, "Drop the first window year before evaluation");
  app.add_option("--trim_last", cfg.trim_last, "Drop the last window year before evaluation");
  app.add_option("--industry_digits", cfg.industry_digits, "Industry code digits for share tables (0 = full code)");
  app.add_option("--pmse_age", cfg.pmse_age, "Age-class dummies in the propensity model");
  app.add_option("--pmse_year_effects", cfg.pmse_year_effects, "Year fixed effects in the propensity model");
  app.add_option("--pmse_industry_effects", cfg.pmse_industry_effects, "Industry fixed effects in the propensity model");
  app.add_option("--pmse_k", k_convention, "k for the null moments: synthesized or parameters");
  app.add_option("--gmm_max_lag_depth", cfg.gmm_max_lag_depth, "Deepest instrument lag");
  app.add_option("--gmm_collapse", cfg.gmm_collapse, "Collapse the GMM instrument matrix");

  auto& sim = cfg.sim;
  app.add_option("--sim_n_industries", sim.n_industries);
  app.add_option("--sim_entities_per_industry", sim.entities_per_industry);
  app.add_option("--sim_first_year", sim.window.first);
  app.add_option("--sim_last_year", sim.window.last);
  app.add_option("--sim_entry_rate", sim.entry_rate);
  app.add_option("--sim_exit_hazard", sim.exit_hazard);
  app.add_option("--sim_ar1_rho", sim.ar1_rho);
  app.add_option("--sim_size_mean", sim.size_mean);
  app.add_option("--sim_size_sigma", sim.size_sigma);
  app.add_option("--sim_wage_level", sim.wage_level);
  app.add_option("--sim_wage_sigma", sim.wage_sigma);
  app.add_option("--sim_break_year", sim.structural_break_year);
  app.add_option("--sim_break_share", sim.break_share);

  auto* simulate = app.add_subcommand("simulate", "Generate a register and its parameter sidecar");
  auto* synthesize = app.add_subcommand("synthesize", "Synthesize employment, payroll and lifespans");
  auto* evaluate = app.add_subcommand("evaluate", "Descriptive and propensity-score utility reports");
  auto* panel = app.add_subcommand("panel", "Dynamic employment models on both registers");
  auto* disclosure = app.add_subcommand("disclosure", "Birth-year concordance tables");
  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    cfg.out = out;
    cfg.input = input;
    cfg.synthetic = synthetic;
    cfg.pmse_k = parse_k_convention(k_convention);
    if (simulate->parsed()) cmd_simulate(cfg);
    if (synthesize->parsed()) cmd_synthesize(cfg);
    if (evaluate->parsed()) cmd_evaluate(cfg);
    if (panel->parsed()) cmd_panel(cfg);
    if (disclosure->parsed()) cmd_disclosure(cfg);
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
