#include "synthreg/pipeline.hpp"

#include <fmt/format.h>

#include "synthreg/csv_io.hpp"
#include "synthreg/disclosure.hpp"
#include "synthreg/flows.hpp"
#include "synthreg/panel_gmm.hpp"
#include "synthreg/synthesizer.hpp"

namespace synthreg {

namespace fs = std::filesystem;

namespace {

void require_out_dir(const PipelineConfig& c) {
  if (!fs::is_directory(c.out)) throw DataError(fmt::format("output directory {} does not exist", c.out.string()));
}

std::uint64_t require_seed(const PipelineConfig& c, const char* stage) {
  if (!c.seed) throw DataError(fmt::format("{}: a seed is required", stage));
  return *c.seed;
}

Register load(const fs::path& path, const PipelineConfig& c) {
  auto r = read_register_csv(path);
  if (c.trim_first || c.trim_last) r = trim_boundary_years(r, c.trim_first, c.trim_last);
  return r;
}

std::string optional_cell(const std::optional<double>& v) { return v ? format_number(*v) : std::string("NA"); }

void write_series(CsvWriter& w, const char* metric, const char* source, const YearSeries& s) {
  for (const auto& [year, value] : s.values) w.row(metric, year, source, value);
}

void write_all_series(CsvWriter& w, const char* source, const Register& r) {
  write_series(w, "gross_employment", source, gross_series(r, Variable::employment));
  write_series(w, "gross_payroll", source, gross_series(r, Variable::payroll));
  const auto flows = job_flow_rates(r);
  write_series(w, "job_creation", source, flows.creation);
  write_series(w, "job_destruction", source, flows.destruction);
  const auto ee = entry_exit_rates(r);
  write_series(w, "entry_rate", source, ee.entry);
  write_series(w, "exit_rate", source, ee.exit);
}

std::string model_file(const std::string& model) {
  std::string name;
  for (char ch : model) name += ch == ' ' ? '_' : static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return "model_" + name + ".csv";
}

}  // namespace

fs::path PipelineConfig::input_path() const { return input.empty() ? out / "register.csv" : input; }
fs::path PipelineConfig::synthetic_path() const { return synthetic.empty() ? out / "synthetic.csv" : synthetic; }

KConvention parse_k_convention(const std::string& name) {
  if (name == "synthesized") return KConvention::synthesized;
  if (name == "parameters") return KConvention::parameters;
  throw DataError(fmt::format("unknown pmse_k '{}' (expected synthesized or parameters)", name));
}

void cmd_simulate(const PipelineConfig& config) {
  require_out_dir(config);
  SimConfig sim = config.sim;
  sim.seed = require_seed(config, "simulate");
  const auto r = simulate_register(sim);
  write_register_csv(config.out / "register.csv", r);
  CsvWriter truth(config.out / "truth.csv", {"name", "value"});
  for (const auto& [name, value] : sim_truth(sim)) truth.row(name, value);
}

void cmd_synthesize(const PipelineConfig& config) {
  require_out_dir(config);
  const auto seed = require_seed(config, "synthesize");
  const auto conf = read_register_csv(config.input_path());
  const auto result = synthesize_register(conf, seed);
  write_register_csv(config.out / "synthetic.csv", result.synthetic);

  CsvWriter report(config.out / "synthesis_report.csv", {"industry", "n_entities", "status", "failure_reason"});
  std::size_t done = 0, failed = 0;
  for (const auto& ind : result.industries) {
    report.row(ind.industry, ind.n_entities, ind.synthesized ? "synthesized" : "failed", ind.failure_reason);
    (ind.synthesized ? done : failed) += ind.observations;
  }
  CsvWriter counts(config.out / "synthesized_observations.csv", {"category", "observations", "percentage"});
  const double total = static_cast<double>(done + failed);
  counts.row("Synthesized", done, total > 0 ? 100.0 * static_cast<double>(done) / total : 0.0);
  counts.row("Not synthesized", failed, total > 0 ? 100.0 * static_cast<double>(failed) / total : 0.0);

  CsvWriter meta(config.out / "synthesis_meta.csv", {"key", "value"});
  meta.row("seed", std::to_string(seed));
  meta.row("flagged_year", result.flagged_year);
  meta.row("flagged_rows", result.flagged_rows);
}

void cmd_evaluate(const PipelineConfig& config) {
  require_out_dir(config);
  const auto conf = load(config.input_path(), config);
  const auto syn = load(config.synthetic_path(), config);

  {
    CsvWriter series(config.out / "series.csv", {"metric", "year", "source", "value"});
    write_all_series(series, "confidential", conf);
    write_all_series(series, "synthetic", syn);
  }

  for (auto v : {ShareVariable::entities, ShareVariable::employment, ShareVariable::payroll}) {
    const std::string name = share_variable_name(v);
    CsvWriter w(config.out / ("shares_" + name + ".csv"), {"industry", "year", "x_conf", "x_syn"});
    for (const auto& p : paired_share_table(conf, syn, v, config.industry_digits)) {
      w.row(p.industry, p.year, p.x_conf, p.x_syn);
    }
  }

  PropensityOptions opts;
  opts.age = config.pmse_age;
  opts.year_effects = config.pmse_year_effects;
  opts.industry_effects = config.pmse_industry_effects;
  CsvWriter report(config.out / "pmse.csv",
                   {"sector", "pmse", "pmse_ratio", "standardized_pmse", "k", "n", "c", "flagged"});
  auto emit = [&](const std::string& sector, const CombinedPanel& panel, const PropensityOptions& o,
                  CsvWriter* coef_out) {
    const auto fit = fit_propensity(panel, o);
    const auto rep = pmse_report(fit, panel, predictor_count(fit, config.pmse_k));
    report.row(sector, rep.pmse, rep.ratio, rep.standardized, rep.k, rep.n, rep.c, rep.flagged ? 1 : 0);
    if (coef_out) {
      for (std::size_t j = 0; j < fit.terms.size(); ++j) {
        const auto i = static_cast<Eigen::Index>(j);
        coef_out->row(fit.terms[j], fit.coef(i), fit.std_error(i));
      }
    }
  };
  {
    CsvWriter coefs(config.out / "propensity.csv", {"term", "estimate", "std_error"});
    emit("All", build_combined(conf, syn), opts, &coefs);
  }
  auto per_industry = opts;
  per_industry.industry_effects = false;
  for (const auto& code : conf.industry_codes) {
    if (!std::ranges::binary_search(syn.industry_codes, code)) continue;
    emit(code, build_combined(conf.industry_slice(code), syn.industry_slice(code)), per_industry, nullptr);
  }

  const auto ols_conf = ols_fit(build_design(conf));
  const auto ols_syn = ols_fit(build_design(syn));
  CsvWriter cio_out(config.out / "cio.csv", {"estimand", "conf_lo", "conf_hi", "syn_lo", "syn_hi", "cio"});
  for (const char* term : {kLagTerm, kPayTerm}) {
    const auto& a = ols_conf.coefficient(term);
    const auto& b = ols_syn.coefficient(term);
    const auto ia = confidence_interval(a.estimate, a.std_error);
    const auto ib = confidence_interval(b.estimate, b.std_error);
    cio_out.row(fmt::format("OLS {}", term), ia.lo, ia.hi, ib.lo, ib.hi, cio(ia, ib));
  }
}

void cmd_panel(const PipelineConfig& config) {
  require_out_dir(config);
  const auto conf = load(config.input_path(), config);
  const auto syn = load(config.synthetic_path(), config);
  GmmOptions options;
  options.max_lag_depth = config.gmm_max_lag_depth;
  options.collapse = config.gmm_collapse;
  const auto result = strategy_run(conf, syn, options);

  for (std::size_t i = 0; i < result.conf.size(); ++i) {
    CsvWriter w(config.out / model_file(result.conf[i].model), {"source", "term", "estimate", "std_error"});
    for (const auto& c : result.conf[i].coefficients) w.row("confidential", c.term, c.estimate, c.std_error);
    for (const auto& c : result.syn[i].coefficients) w.row("synthetic", c.term, c.estimate, c.std_error);
  }

  CsvWriter bias(config.out / "bias.csv",
                 {"model", "theta_conf", "theta_syn", "eta_conf", "eta_syn", "theta_bias", "eta_bias", "bias_sum",
                  "long_run_conf", "long_run_syn"});
  for (const auto& b : result.bias) {
    bias.row(b.model, b.theta_conf, b.theta_syn, b.eta_conf, b.eta_syn, b.theta_bias, b.eta_bias, b.bias_sum,
             b.long_run_conf, b.long_run_syn);
  }

  CsvWriter tests(config.out / "tests.csv", {"model", "test", "confidential", "synthetic"});
  for (std::size_t i = 0; i < result.conf.size(); ++i) {
    const auto& c = result.conf[i];
    const auto& s = result.syn[i];
    tests.row(c.model, "observations", c.n_obs, s.n_obs);
    tests.row(c.model, "entities", c.n_entities, s.n_entities);
    if (c.r_squared || s.r_squared) tests.row(c.model, "r_squared", optional_cell(c.r_squared), optional_cell(s.r_squared));
    if (c.sargan || s.sargan) {
      auto stat = [](const FitReport& f) { return f.sargan ? std::optional<double>(f.sargan->statistic) : std::nullopt; };
      auto df = [](const FitReport& f) { return f.sargan ? std::optional<double>(f.sargan->df) : std::nullopt; };
      auto p = [](const FitReport& f) { return f.sargan ? std::optional<double>(f.sargan->p_value) : std::nullopt; };
      tests.row(c.model, "instruments", c.n_instruments, s.n_instruments);
      tests.row(c.model, "sargan", optional_cell(stat(c)), optional_cell(stat(s)));
      tests.row(c.model, "sargan_df", optional_cell(df(c)), optional_cell(df(s)));
      tests.row(c.model, "sargan_p", optional_cell(p(c)), optional_cell(p(s)));
      tests.row(c.model, "m2", optional_cell(c.m2), optional_cell(s.m2));
    }
  }
}

void cmd_disclosure(const PipelineConfig& config) {
  require_out_dir(config);
  // Birth years are compared on the untrimmed registers.
  const auto conf = read_register_csv(config.input_path());
  const auto syn = read_register_csv(config.synthetic_path());
  const auto table = birthyear_concordance(conf, syn, Pairing::by_rank);
  {
    CsvWriter w(config.out / "concordance.csv", {"year", "industry", "probability", "count"});
    for (const auto& r : table.rows) w.row(r.year, r.industry, r.probability, r.count);
  }
  CsvWriter w(config.out / "concordance_summary.csv", {"synthetic_year", "actual_year", "min", "mean", "max"});
  for (const auto& s : summarize_concordance(table)) w.row(s.year, s.year, s.min, s.mean, s.max);
}

}  // namespace synthreg
