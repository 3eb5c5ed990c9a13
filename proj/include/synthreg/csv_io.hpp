#pragma once

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "synthreg/register.hpp"

namespace synthreg {

// Long-format register CSV: entity_id,year,industry,employment,payroll.
// Raw positive values. A row with empty employment and payroll records a year
// in which the entity exists but its size is missing; such rows must directly
// precede the entity's first positive year.
inline constexpr std::string_view kRegisterHeader = "entity_id,year,industry,employment,payroll";

// Reads and harmonizes a register: modal industry per entity, contiguous
// years. The window spans all years present in the file.
Register read_register_csv(std::istream& in);
Register read_register_csv(const std::filesystem::path& path);

// Rows are written in register order, one per entity-year.
void write_register_csv(std::ostream& out, const Register& r);
void write_register_csv(const std::filesystem::path& path, const Register& r);

// Shortest round-trip decimal representation.
std::string format_number(double v);

std::vector<std::string> split_csv_line(std::string_view line);

// Small helper for the report tables. Opening fails with DataError.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, std::initializer_list<std::string_view> header);
  ~CsvWriter();
  CsvWriter(const CsvWriter&) = delete;
  CsvWriter& operator=(const CsvWriter&) = delete;

  template <typename... Cells>
  void row(const Cells&... cells) {
    std::string line;
    bool first = true;
    ((append(line, cell_text(cells), first)), ...);
    write_line(line);
  }

 private:
  static std::string cell_text(const std::string& s) { return s; }
  static std::string cell_text(std::string_view s) { return std::string(s); }
  static std::string cell_text(const char* s) { return s; }
  static std::string cell_text(double v) { return format_number(v); }
  static std::string cell_text(int v) { return std::to_string(v); }
  static std::string cell_text(long v) { return std::to_string(v); }
  static std::string cell_text(std::size_t v) { return std::to_string(v); }
  static void append(std::string& line, const std::string& cell, bool& first) {
    if (!first) line += ',';
    line += cell;
    first = false;
  }
  void write_line(const std::string& line);

  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace synthreg
