#include <doctest.h>

#include <sstream>

#include "helpers.hpp"
#include "synthreg/csv_io.hpp"
#include "synthreg/simulate.hpp"

using namespace synthreg;
using testing::entity;

TEST_CASE("register CSV round trip is exact") {
  SimConfig cfg;
  cfg.n_industries = 2;
  cfg.entities_per_industry = 50;
  cfg.structural_break_year = 1995;
  const auto r = simulate_register(cfg);
  std::stringstream buf;
  write_register_csv(buf, r);
  const std::string text = buf.str();
  const auto back = read_register_csv(buf);
  CHECK(back.window == r.window);
  REQUIRE(back.entities.size() == r.entities.size());
  CHECK(back.entities == r.entities);

  std::stringstream again;
  write_register_csv(again, back);
  CHECK(again.str() == text);
}

TEST_CASE("header problems name the expected column") {
  std::stringstream in("entity_id,year,sector,employment,payroll\n");
  try {
    read_register_csv(in);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("industry") != std::string::npos);
  }
  std::stringstream empty("");
  CHECK_THROWS_AS(read_register_csv(empty), DataError);
}

TEST_CASE("missing-employment rows precede the first positive year") {
  std::stringstream in(
      "entity_id,year,industry,employment,payroll\n"
      "e1,2000,11,,\n"
      "e1,2001,11,,\n"
      "e1,2002,11,4,120\n"
      "e1,2003,11,5,150\n"
      "e2,2000,12,7,200\n");
  const auto r = read_register_csv(in);
  CHECK(r.window == YearRange{2000, 2003});
  REQUIRE(r.entities.size() == 2);
  CHECK(r.entities[0].missing_years_before == 2);
  CHECK(r.entities[0].lifespan == YearRange{2002, 2003});

  std::stringstream late(
      "entity_id,year,industry,employment,payroll\n"
      "e1,2000,11,4,120\n"
      "e1,2001,11,,\n");
  CHECK_THROWS_AS(read_register_csv(late), DataError);
}

TEST_CASE("reader harmonizes industry and rejects gaps") {
  std::stringstream in(
      "entity_id,year,industry,employment,payroll\n"
      "e1,2000,11,1,10\n"
      "e1,2001,12,1,10\n"
      "e1,2002,12,1,10\n");
  const auto r = read_register_csv(in);
  CHECK(r.entities[0].industry == "12");

  std::stringstream gap(
      "entity_id,year,industry,employment,payroll\n"
      "e1,2000,11,1,10\n"
      "e1,2002,11,1,10\n");
  CHECK_THROWS_AS(read_register_csv(gap), DataError);

  std::stringstream zero(
      "entity_id,year,industry,employment,payroll\n"
      "e1,2000,11,0,10\n");
  CHECK_THROWS_AS(read_register_csv(zero), DataError);

  std::stringstream junk(
      "entity_id,year,industry,employment,payroll\n"
      "e1,20x0,11,1,10\n");
  CHECK_THROWS_AS(read_register_csv(junk), DataError);
}

TEST_CASE("format_number round-trips") {
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(3.0) == "3");
  const double v = 1.0 / 3.0;
  CHECK(std::stod(format_number(v)) == v);
  CHECK(split_csv_line("a,,b") == std::vector<std::string>{"a", "", "b"});
}
