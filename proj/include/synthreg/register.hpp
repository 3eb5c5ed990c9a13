#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace synthreg {

// Bad input data: schema problems, invariant violations, I/O failures.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Estimation or fitting failed numerically (singular designs, divergence).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct YearRange {
  int first = 0;
  int last = 0;

  int length() const { return last - first + 1; }
  bool contains(int year) const { return year >= first && year <= last; }
  bool contains(const YearRange& other) const {
    return other.first >= first && other.last <= last;
  }
  bool operator==(const YearRange&) const = default;
};

inline constexpr int kMaxRangeLength = 200;

// One business entity in wide form. employment[k] and payroll[k] belong to
// year lifespan.first + k.
struct EntityHistory {
  std::string entity_id;
  std::string industry;
  YearRange lifespan;
  std::vector<double> employment;
  std::vector<double> payroll;
  // Years immediately before lifespan.first in which a record exists but
  // employment is missing. Never stored as zeros.
  int missing_years_before = 0;

  double employment_in(int year) const { return employment[year - lifespan.first]; }
  double payroll_in(int year) const { return payroll[year - lifespan.first]; }
  bool alive_in(int year) const { return lifespan.contains(year); }

  bool operator==(const EntityHistory&) const = default;
};

struct Register {
  std::vector<EntityHistory> entities;
  YearRange window;
  std::vector<std::string> industry_codes;  // sorted, unique

  // Indices of entities of one industry, in register order.
  std::vector<std::size_t> industry_members(const std::string& industry) const;
  Register industry_slice(const std::string& industry) const;
  std::size_t entity_years() const;
};

// Builds a register whose industry code set is derived from its entities.
Register make_register(std::vector<EntityHistory> entities, YearRange window);

enum class AgeClass : std::uint8_t { k0to2 = 0, k3to4, k5to7, k8to12, k13plus };
inline constexpr int kAgeClassCount = 5;

AgeClass age_class_of(int age);
const char* age_class_label(AgeClass c);

enum class Source : std::uint8_t { original = 0, synthetic = 1 };

struct PanelRow {
  std::string entity_id;
  int year = 0;
  std::string industry;
  double log_employment = 0.0;
  double log_payroll = 0.0;
  AgeClass age_class = AgeClass::k0to2;
  Source source = Source::original;
};

struct Violation {
  std::string entity_id;  // empty for register-level problems
  std::string reason;
};

std::vector<Violation> validate_register(const Register& r);

// Throws DataError listing the first few violations when r is invalid.
void require_valid(const Register& r);

std::vector<PanelRow> to_long(const Register& r, Source source = Source::original);

// Inverse of to_long. Entities are ordered by entity_id. The window defaults
// to the span of the observed years.
Register to_wide(std::span<const PanelRow> rows, std::optional<YearRange> window = std::nullopt);

std::string modal_industry(std::span<const std::string> codes);

Register trim_boundary_years(const Register& r, bool trim_first, bool trim_last);

}  // namespace synthreg
