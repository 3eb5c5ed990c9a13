#include "synthreg/register.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include <fmt/format.h>

namespace synthreg {

std::vector<std::size_t> Register::industry_members(const std::string& industry) const {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < entities.size(); ++i) {
    if (entities[i].industry == industry) idx.push_back(i);
  }
  return idx;
}

Register Register::industry_slice(const std::string& industry) const {
  Register out;
  out.window = window;
  for (const auto& e : entities) {
    if (e.industry == industry) out.entities.push_back(e);
  }
  if (!out.entities.empty()) out.industry_codes = {industry};
  return out;
}

std::size_t Register::entity_years() const {
  std::size_t n = 0;
  for (const auto& e : entities) n += static_cast<std::size_t>(e.lifespan.length());
  return n;
}

Register make_register(std::vector<EntityHistory> entities, YearRange window) {
  Register r;
  std::set<std::string> codes;
  for (const auto& e : entities) codes.insert(e.industry);
  r.entities = std::move(entities);
  r.window = window;
  r.industry_codes.assign(codes.begin(), codes.end());
  return r;
}

AgeClass age_class_of(int age) {
  if (age <= 2) return AgeClass::k0to2;
  if (age <= 4) return AgeClass::k3to4;
  if (age <= 7) return AgeClass::k5to7;
  if (age <= 12) return AgeClass::k8to12;
  return AgeClass::k13plus;
}

const char* age_class_label(AgeClass c) {
  switch (c) {
    case AgeClass::k0to2: return "Age 0-2";
    case AgeClass::k3to4: return "Age 3-4";
    case AgeClass::k5to7: return "Age 5-7";
    case AgeClass::k8to12: return "Age 8-12";
    case AgeClass::k13plus: return "Age 13 or more";
  }
  return "?";
}

std::vector<Violation> validate_register(const Register& r) {
  std::vector<Violation> out;
  if (r.window.first > r.window.last) {
    out.push_back({"", "window first_year after last_year"});
  } else if (r.window.length() > kMaxRangeLength) {
    out.push_back({"", "window longer than 200 years"});
  }
  const std::unordered_set<std::string> codes(r.industry_codes.begin(), r.industry_codes.end());
  std::unordered_set<std::string> seen;
  for (const auto& e : r.entities) {
    if (!seen.insert(e.entity_id).second) out.push_back({e.entity_id, "duplicate entity_id"});
    if (!codes.contains(e.industry)) out.push_back({e.entity_id, "industry not in code set"});
    if (e.lifespan.first > e.lifespan.last) {
      out.push_back({e.entity_id, "lifespan first_year after last_year"});
      continue;
    }
    if (!r.window.contains(e.lifespan)) out.push_back({e.entity_id, "lifespan outside window"});
    const auto len = static_cast<std::size_t>(e.lifespan.length());
    if (e.employment.size() != len || e.payroll.size() != len) {
      out.push_back({e.entity_id, "value sequence length does not match lifespan"});
      continue;
    }
    if (std::ranges::any_of(e.employment, [](double v) { return !(v > 0.0) || !std::isfinite(v); }))
      out.push_back({e.entity_id, "non-positive employment"});
    if (std::ranges::any_of(e.payroll, [](double v) { return !(v > 0.0) || !std::isfinite(v); }))
      out.push_back({e.entity_id, "non-positive payroll"});
    if (e.missing_years_before < 0 || e.lifespan.first - e.missing_years_before < r.window.first)
      out.push_back({e.entity_id, "missing-employment years outside window"});
  }
  return out;
}

void require_valid(const Register& r) {
  const auto violations = validate_register(r);
  if (violations.empty()) return;
  std::string msg = fmt::format("invalid register ({} violations)", violations.size());
  for (std::size_t i = 0; i < std::min<std::size_t>(violations.size(), 5); ++i) {
    msg += fmt::format("; {}: {}", violations[i].entity_id, violations[i].reason);
  }
  throw DataError(msg);
}

std::vector<PanelRow> to_long(const Register& r, Source source) {
  std::vector<const EntityHistory*> order;
  order.reserve(r.entities.size());
  for (const auto& e : r.entities) order.push_back(&e);
  std::ranges::sort(order, {}, [](const EntityHistory* e) { return e->entity_id; });

  std::vector<PanelRow> rows;
  rows.reserve(r.entity_years());
  for (const auto* e : order) {
    for (int year = e->lifespan.first; year <= e->lifespan.last; ++year) {
      const double emp = e->employment_in(year);
      const double pay = e->payroll_in(year);
      if (!(emp > 0.0) || !(pay > 0.0)) {
        throw DataError(fmt::format("non-positive value for entity {} in {}", e->entity_id, year));
      }
      rows.push_back(PanelRow{e->entity_id, year, e->industry, std::log(emp), std::log(pay),
                              age_class_of(year - e->lifespan.first), source});
    }
  }
  return rows;
}

Register to_wide(std::span<const PanelRow> rows, std::optional<YearRange> window) {
  std::map<std::string, std::vector<const PanelRow*>> by_entity;
  for (const auto& row : rows) by_entity[row.entity_id].push_back(&row);

  std::vector<EntityHistory> entities;
  entities.reserve(by_entity.size());
  YearRange span{0, 0};
  bool any = false;
  for (auto& [id, group] : by_entity) {
    std::ranges::sort(group, {}, [](const PanelRow* p) { return p->year; });
    EntityHistory e;
    e.entity_id = id;
    e.lifespan = {group.front()->year, group.back()->year};
    std::vector<std::string> industries;
    for (std::size_t k = 0; k < group.size(); ++k) {
      if (group[k]->year != e.lifespan.first + static_cast<int>(k)) {
        throw DataError(fmt::format("entity {} has a gap or duplicate at year {}", id, group[k]->year));
      }
      e.employment.push_back(std::exp(group[k]->log_employment));
      e.payroll.push_back(std::exp(group[k]->log_payroll));
      industries.push_back(group[k]->industry);
    }
    e.industry = modal_industry(industries);
    if (!any) {
      span = e.lifespan;
      any = true;
    } else {
      span.first = std::min(span.first, e.lifespan.first);
      span.last = std::max(span.last, e.lifespan.last);
    }
    entities.push_back(std::move(e));
  }
  return make_register(std::move(entities), window.value_or(span));
}

std::string modal_industry(std::span<const std::string> codes) {
  if (codes.empty()) throw DataError("modal_industry: empty code sequence");
  std::unordered_map<std::string, int> counts;
  for (const auto& c : codes) ++counts[c];
  // First-observed code wins ties: scan in input order and only replace on a
  // strictly larger count.
  const std::string* best = &codes.front();
  int best_count = counts[*best];
  for (const auto& c : codes) {
    if (counts[c] > best_count) {
      best = &c;
      best_count = counts[c];
    }
  }
  return *best;
}

Register trim_boundary_years(const Register& r, bool trim_first, bool trim_last) {
  if (!trim_first && !trim_last) return r;
  YearRange window = r.window;
  if (trim_first) ++window.first;
  if (trim_last) --window.last;
  if (window.first > window.last) throw DataError("trimming would empty the register");

  std::vector<EntityHistory> kept;
  for (const auto& e : r.entities) {
    const int first = std::max(e.lifespan.first, window.first);
    const int last = std::min(e.lifespan.last, window.last);
    if (first > last) continue;
    EntityHistory t;
    t.entity_id = e.entity_id;
    t.industry = e.industry;
    t.lifespan = {first, last};
    const auto off = static_cast<std::ptrdiff_t>(first - e.lifespan.first);
    const auto len = static_cast<std::ptrdiff_t>(last - first + 1);
    t.employment.assign(e.employment.begin() + off, e.employment.begin() + off + len);
    t.payroll.assign(e.payroll.begin() + off, e.payroll.begin() + off + len);
    // Missing-employment years survive only if they still fall in the window
    // and directly precede the (unchanged) first positive year.
    if (first == e.lifespan.first) {
      t.missing_years_before = std::min(e.missing_years_before, first - window.first);
    }
    kept.push_back(std::move(t));
  }
  if (kept.empty()) throw DataError("trimming would empty the register");
  return make_register(std::move(kept), window);
}

}  // namespace synthreg
