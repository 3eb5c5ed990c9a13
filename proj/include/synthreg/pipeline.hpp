#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "synthreg/pmse.hpp"
#include "synthreg/simulate.hpp"

namespace synthreg {

struct PipelineConfig {
  std::filesystem::path out = ".";
  // Confidential and synthetic registers; default to register.csv and
  // synthetic.csv inside out.
  std::filesystem::path input;
  std::filesystem::path synthetic;
  std::optional<std::uint64_t> seed;
  bool trim_first = false;
  bool trim_last = false;
  int industry_digits = 2;
  bool pmse_age = true;
  bool pmse_year_effects = true;
  bool pmse_industry_effects = true;
  KConvention pmse_k = KConvention::synthesized;
  int gmm_max_lag_depth = 4;
  bool gmm_collapse = true;
  SimConfig sim;

  std::filesystem::path input_path() const;
  std::filesystem::path synthetic_path() const;
};

KConvention parse_k_convention(const std::string& name);

void cmd_simulate(const PipelineConfig& config);
void cmd_synthesize(const PipelineConfig& config);
void cmd_evaluate(const PipelineConfig& config);
void cmd_panel(const PipelineConfig& config);
void cmd_disclosure(const PipelineConfig& config);

}  // namespace synthreg
