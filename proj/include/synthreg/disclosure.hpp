#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "synthreg/register.hpp"

namespace synthreg {

struct ConcordanceRow {
  int year = 0;  // synthetic birth year
  std::string industry;
  double probability = 0.0;  // P(true birth = year | synthetic birth = year)
  std::size_t count = 0;     // synthetic entities born in year
};

struct ConcordanceTable {
  std::vector<ConcordanceRow> rows;  // sorted by year, then industry
};

// by_rank: i-th synthetic entity of an industry paired with the i-th
// confidential one, register order. by_id: paired on entity_id.
enum class Pairing { by_rank, by_id };

ConcordanceTable birthyear_concordance(const Register& conf, const Register& syn, Pairing pairing = Pairing::by_rank);

struct ConcordanceSummary {
  int year = 0;
  double min = 0.0;
  double mean = 0.0;
  double max = 0.0;
  std::size_t industries = 0;
};

// Unweighted across industries.
std::vector<ConcordanceSummary> summarize_concordance(const ConcordanceTable& table);

}  // namespace synthreg
