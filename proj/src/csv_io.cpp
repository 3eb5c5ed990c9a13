#include "synthreg/csv_io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <unordered_map>

#include <fmt/format.h>

namespace synthreg {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.remove_suffix(1);
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  return s;
}

double parse_double(std::string_view s, std::size_t line_no, std::string_view column) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw DataError(fmt::format("line {}: column {}: cannot parse '{}'", line_no, column, s));
  }
  return v;
}

int parse_int(std::string_view s, std::size_t line_no, std::string_view column) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw DataError(fmt::format("line {}: column {}: cannot parse '{}'", line_no, column, s));
  }
  return v;
}

struct RawRow {
  int year;
  std::string industry;
  bool missing;
  double employment;
  double payroll;
};

}  // namespace

std::string format_number(double v) { return fmt::format("{}", v); }

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    cells.emplace_back(trim(line.substr(start, pos == std::string_view::npos ? line.npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return cells;
}

Register read_register_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("register CSV is empty");
  const auto header = split_csv_line(line);
  const auto expected = split_csv_line(kRegisterHeader);
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (i >= header.size() || header[i] != expected[i]) {
      throw DataError(fmt::format("register CSV: expected column '{}' at position {}", expected[i], i + 1));
    }
  }

  // Preserve first-appearance order of entities.
  std::vector<std::string> order;
  std::unordered_map<std::string, std::vector<RawRow>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != expected.size()) {
      throw DataError(fmt::format("line {}: expected {} columns, got {}", line_no, expected.size(), cells.size()));
    }
    RawRow row;
    row.year = parse_int(cells[1], line_no, "year");
    row.industry = cells[2];
    row.missing = cells[3].empty() && cells[4].empty();
    row.employment = row.missing ? 0.0 : parse_double(cells[3], line_no, "employment");
    row.payroll = row.missing ? 0.0 : parse_double(cells[4], line_no, "payroll");
    if (!row.missing && (!(row.employment > 0.0) || !(row.payroll > 0.0))) {
      throw DataError(fmt::format("line {}: non-positive value for entity {}", line_no, cells[0]));
    }
    auto [it, inserted] = rows.try_emplace(cells[0]);
    if (inserted) order.push_back(cells[0]);
    it->second.push_back(std::move(row));
  }

  std::vector<EntityHistory> entities;
  entities.reserve(order.size());
  bool any = false;
  YearRange window{0, 0};
  for (const auto& id : order) {
    auto& group = rows[id];
    std::ranges::stable_sort(group, {}, &RawRow::year);
    EntityHistory e;
    e.entity_id = id;
    std::vector<std::string> industries;
    int expected_year = group.front().year;
    bool seen_positive = false;
    for (const auto& row : group) {
      if (row.year != expected_year) {
        throw DataError(fmt::format("entity {}: gap or duplicate at year {}", id, row.year));
      }
      ++expected_year;
      industries.push_back(row.industry);
      if (row.missing) {
        if (seen_positive) {
          throw DataError(fmt::format("entity {}: missing employment after first positive year", id));
        }
        ++e.missing_years_before;
        continue;
      }
      if (!seen_positive) e.lifespan.first = row.year;
      seen_positive = true;
      e.lifespan.last = row.year;
      e.employment.push_back(row.employment);
      e.payroll.push_back(row.payroll);
    }
    if (!seen_positive) throw DataError(fmt::format("entity {}: no positive employment", id));
    e.industry = modal_industry(industries);
    const int first_year = group.front().year;
    if (!any) {
      window = {first_year, group.back().year};
      any = true;
    } else {
      window.first = std::min(window.first, first_year);
      window.last = std::max(window.last, group.back().year);
    }
    entities.push_back(std::move(e));
  }
  return make_register(std::move(entities), window);
}

Register read_register_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open {}", path.string()));
  return read_register_csv(in);
}

void write_register_csv(std::ostream& out, const Register& r) {
  out << kRegisterHeader << '\n';
  for (const auto& e : r.entities) {
    for (int k = e.missing_years_before; k > 0; --k) {
      out << e.entity_id << ',' << (e.lifespan.first - k) << ',' << e.industry << ",,\n";
    }
    for (int year = e.lifespan.first; year <= e.lifespan.last; ++year) {
      out << e.entity_id << ',' << year << ',' << e.industry << ',' << format_number(e.employment_in(year))
          << ',' << format_number(e.payroll_in(year)) << '\n';
    }
  }
}

void write_register_csv(const std::filesystem::path& path, const Register& r) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError(fmt::format("cannot write {}", path.string()));
  write_register_csv(out, r);
  if (!out) throw DataError(fmt::format("write failed for {}", path.string()));
}

struct CsvWriter::Impl {
  std::ofstream out;
  std::string path;
};

CsvWriter::CsvWriter(const std::filesystem::path& path, std::initializer_list<std::string_view> header)
    : impl_(std::make_unique<Impl>()) {
  impl_->path = path.string();
  impl_->out.open(path, std::ios::binary | std::ios::trunc);
  if (!impl_->out) throw DataError(fmt::format("cannot write {}", path.string()));
  std::string line;
  bool first = true;
  for (auto h : header) append(line, std::string(h), first);
  write_line(line);
}

CsvWriter::~CsvWriter() = default;

void CsvWriter::write_line(const std::string& line) {
  impl_->out << line << '\n';
  if (!impl_->out) throw DataError(fmt::format("write failed for {}", impl_->path));
}

}  // namespace synthreg
