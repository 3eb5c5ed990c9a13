#include "synthreg/disclosure.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>
#include <utility>

#include <fmt/format.h>

namespace synthreg {

namespace {

struct Tally {
  std::size_t count = 0;
  std::size_t hits = 0;
};

}  // namespace

ConcordanceTable birthyear_concordance(const Register& conf, const Register& syn, Pairing pairing) {
  std::map<std::pair<int, std::string>, Tally> cells;
  if (pairing == Pairing::by_rank) {
    for (const auto& code : syn.industry_codes) {
      const auto s = syn.industry_members(code);
      const auto c = conf.industry_members(code);
      if (s.size() != c.size()) {
        throw DataError(fmt::format("birthyear_concordance: industry {} has {} confidential and {} synthetic entities",
                                    code, c.size(), s.size()));
      }
      for (std::size_t i = 0; i < s.size(); ++i) {
        auto& t = cells[{syn.entities[s[i]].lifespan.first, code}];
        ++t.count;
        if (conf.entities[c[i]].lifespan.first == syn.entities[s[i]].lifespan.first) ++t.hits;
      }
    }
    for (const auto& code : conf.industry_codes) {
      if (!std::ranges::binary_search(syn.industry_codes, code)) {
        throw DataError(fmt::format("birthyear_concordance: industry {} missing from synthetic register", code));
      }
    }
  } else {
    if (conf.entities.size() != syn.entities.size()) {
      throw DataError(fmt::format("birthyear_concordance: {} confidential and {} synthetic entities",
                                  conf.entities.size(), syn.entities.size()));
    }
    std::unordered_map<std::string, const EntityHistory*> by_id;
    for (const auto& e : conf.entities) by_id[e.entity_id] = &e;
    for (const auto& e : syn.entities) {
      auto it = by_id.find(e.entity_id);
      if (it == by_id.end()) throw DataError("birthyear_concordance: no confidential entity " + e.entity_id);
      auto& t = cells[{e.lifespan.first, e.industry}];
      ++t.count;
      if (it->second->lifespan.first == e.lifespan.first) ++t.hits;
    }
  }

  ConcordanceTable table;
  for (const auto& [key, t] : cells) {
    table.rows.push_back({key.first, key.second, static_cast<double>(t.hits) / static_cast<double>(t.count), t.count});
  }
  return table;
}

std::vector<ConcordanceSummary> summarize_concordance(const ConcordanceTable& table) {
  std::map<int, ConcordanceSummary> by_year;
  for (const auto& r : table.rows) {
    auto [it, fresh] = by_year.try_emplace(r.year);
    auto& s = it->second;
    if (fresh) {
      s.year = r.year;
      s.min = s.max = r.probability;
    }
    s.min = std::min(s.min, r.probability);
    s.max = std::max(s.max, r.probability);
    s.mean += r.probability;
    ++s.industries;
  }
  std::vector<ConcordanceSummary> out;
  for (auto& [year, s] : by_year) {
    s.mean /= static_cast<double>(s.industries);
    out.push_back(s);
  }
  return out;
}

}  // namespace synthreg
