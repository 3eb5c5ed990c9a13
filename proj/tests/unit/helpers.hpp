#pragma once

#include <string>
#include <vector>

#include "synthreg/register.hpp"

namespace testing {

inline synthreg::EntityHistory entity(std::string id, std::string industry, int first, std::vector<double> emp,
                                      std::vector<double> pay = {}) {
  synthreg::EntityHistory e;
  e.entity_id = std::move(id);
  e.industry = std::move(industry);
  e.lifespan = {first, first + static_cast<int>(emp.size()) - 1};
  if (pay.empty()) {
    for (double v : emp) pay.push_back(30.0 * v);
  }
  e.employment = std::move(emp);
  e.payroll = std::move(pay);
  return e;
}

}  // namespace testing
