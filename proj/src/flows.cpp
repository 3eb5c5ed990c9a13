#include "synthreg/flows.hpp"

#include <cmath>

namespace synthreg {

namespace {

void require_two_years(const Register& r, const char* what) {
  if (r.window.length() < 2) throw DataError(std::string(what) + " needs a window of at least 2 years");
}

// Employment of e in year, 0 when not alive.
double employment_or_zero(const EntityHistory& e, int year) {
  return e.alive_in(year) ? e.employment_in(year) : 0.0;
}

std::string truncate_code(const std::string& code, int digits) {
  if (digits <= 0 || static_cast<std::size_t>(digits) >= code.size()) return code;
  return code.substr(0, static_cast<std::size_t>(digits));
}

}  // namespace

YearSeries gross_series(const Register& r, Variable variable) {
  YearSeries s;
  for (int y = r.window.first; y <= r.window.last; ++y) s.values[y] = 0.0;
  for (const auto& e : r.entities) {
    const auto& v = variable == Variable::employment ? e.employment : e.payroll;
    for (std::size_t k = 0; k < v.size(); ++k) {
      const int year = e.lifespan.first + static_cast<int>(k);
      if (r.window.contains(year)) s.values[year] += v[k];
    }
  }
  return s;
}

JobFlows job_flow_rates(const Register& r) {
  require_two_years(r, "job_flow_rates");
  JobFlows f;
  const auto gross = gross_series(r, Variable::employment);
  for (int t = r.window.first + 1; t <= r.window.last; ++t) {
    double gains = 0.0;
    double losses = 0.0;
    for (const auto& e : r.entities) {
      if (!e.alive_in(t) && !e.alive_in(t - 1)) continue;
      const double change = employment_or_zero(e, t) - employment_or_zero(e, t - 1);
      if (change > 0.0) gains += change;
      else losses -= change;
    }
    const double denom = 0.5 * (gross.at(t) + gross.at(t - 1));
    f.denominator.values[t] = denom;
    if (denom > 0.0) {
      f.creation.values[t] = gains / denom;
      f.destruction.values[t] = losses / denom;
    } else {
      f.creation.values[t] = 0.0;
      f.destruction.values[t] = 0.0;
      f.creation.flagged.insert(t);
      f.destruction.flagged.insert(t);
    }
  }
  return f;
}

EntryExit entry_exit_rates(const Register& r) {
  require_two_years(r, "entry_exit_rates");
  EntryExit out;
  for (int t = r.window.first + 1; t <= r.window.last; ++t) {
    std::size_t alive_now = 0, alive_before = 0, entrants = 0, exits = 0;
    for (const auto& e : r.entities) {
      const bool now = e.alive_in(t);
      const bool before = e.alive_in(t - 1);
      alive_now += now;
      alive_before += before;
      // Entities begin with positive employment at lifespan.first; the year
      // before is either absent or recorded with missing employment.
      if (now && e.lifespan.first == t) ++entrants;
      if (before && !now) ++exits;
    }
    if (alive_now > 0) {
      out.entry.values[t] = static_cast<double>(entrants) / static_cast<double>(alive_now);
    } else {
      out.entry.values[t] = 0.0;
      out.entry.flagged.insert(t);
    }
    if (alive_before > 0) {
      out.exit.values[t] = static_cast<double>(exits) / static_cast<double>(alive_before);
    } else {
      out.exit.values[t] = 0.0;
      out.exit.flagged.insert(t);
    }
  }
  return out;
}

std::vector<ShareCell> share_statistic(const Register& r, ShareVariable variable, int industry_digits) {
  std::map<std::pair<std::string, int>, double> agg;
  for (const auto& e : r.entities) {
    const auto code = truncate_code(e.industry, industry_digits);
    for (std::size_t k = 0; k < e.employment.size(); ++k) {
      const int year = e.lifespan.first + static_cast<int>(k);
      if (!r.window.contains(year)) continue;
      double v = 1.0;
      if (variable == ShareVariable::employment) v = e.employment[k];
      else if (variable == ShareVariable::payroll) v = e.payroll[k];
      agg[{code, year}] += v;
    }
  }
  double total = 0.0;
  for (const auto& [key, v] : agg) total += v;
  if (!(total > 0.0)) throw DataError("share_statistic: grand total is zero");

  std::vector<ShareCell> cells;
  cells.reserve(agg.size());
  for (const auto& [key, v] : agg) cells.push_back({key.first, key.second, v, v / total});
  return cells;
}

std::vector<PairedShare> paired_share_table(const Register& conf, const Register& syn, ShareVariable variable,
                                            int industry_digits) {
  std::map<std::pair<std::string, int>, PairedShare> joined;
  for (const auto& c : share_statistic(conf, variable, industry_digits)) {
    auto& p = joined[{c.industry, c.year}];
    p.industry = c.industry;
    p.year = c.year;
    p.x_conf = c.share;
  }
  for (const auto& c : share_statistic(syn, variable, industry_digits)) {
    auto& p = joined[{c.industry, c.year}];
    p.industry = c.industry;
    p.year = c.year;
    p.x_syn = c.share;
  }
  std::vector<PairedShare> out;
  out.reserve(joined.size());
  for (auto& [key, p] : joined) out.push_back(p);
  return out;
}

double mean_absolute_share_gap(const std::vector<PairedShare>& table) {
  if (table.empty()) return 0.0;
  double s = 0.0;
  for (const auto& p : table) s += std::abs(p.x_conf - p.x_syn);
  return s / static_cast<double>(table.size());
}

const char* share_variable_name(ShareVariable v) {
  switch (v) {
    case ShareVariable::entities: return "entities";
    case ShareVariable::employment: return "employment";
    case ShareVariable::payroll: return "payroll";
  }
  return "?";
}

}  // namespace synthreg
