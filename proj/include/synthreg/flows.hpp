#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "synthreg/register.hpp"

namespace synthreg {

struct YearSeries {
  std::map<int, double> values;
  // Years whose denominator was zero; their value is reported as 0.
  std::set<int> flagged;

  double at(int year) const { return values.at(year); }
};

enum class Variable { employment, payroll };

YearSeries gross_series(const Register& r, Variable variable);

struct JobFlows {
  YearSeries creation;
  YearSeries destruction;
  YearSeries denominator;  // 0.5 * (E_t + E_{t-1})
};

// Davis-Haltiwanger-Schuh rates over consecutive window years.
JobFlows job_flow_rates(const Register& r);

struct EntryExit {
  YearSeries entry;  // years first+1 .. last
  YearSeries exit;   // transition (t-1 -> t), keyed by t, years first+1 .. last
};

EntryExit entry_exit_rates(const Register& r);

enum class ShareVariable { entities, employment, payroll };

struct ShareCell {
  std::string industry;
  int year = 0;
  double aggregate = 0.0;  // X_its
  double share = 0.0;      // x_its
};

// Industry codes are truncated to industry_digits characters before
// aggregation (0 keeps the full code).
std::vector<ShareCell> share_statistic(const Register& r, ShareVariable variable, int industry_digits = 0);

struct PairedShare {
  std::string industry;
  int year = 0;
  double x_conf = 0.0;
  double x_syn = 0.0;
};

std::vector<PairedShare> paired_share_table(const Register& conf, const Register& syn, ShareVariable variable,
                                            int industry_digits = 0);

double mean_absolute_share_gap(const std::vector<PairedShare>& table);

const char* share_variable_name(ShareVariable v);

}  // namespace synthreg
