#include <doctest.h>

#include <sstream>

#include "handball/csv.hpp"

using namespace handball;

TEST_SUITE("csv") {
  TEST_CASE("quoted fields keep embedded commas and quotes") {
    auto f = split_csv_line(R"(a,"b,c","say ""hi""",)");
    REQUIRE(f.size() == 4);
    CHECK(f[1] == "b,c");
    CHECK(f[2] == "say \"hi\"");
    CHECK(f[3].empty());
    CHECK(csv_escape("b,c") == "\"b,c\"");
    CHECK(csv_escape("plain") == "plain");
  }

  TEST_CASE("comments, BOM and blank lines are skipped") {
    std::istringstream in("\xEF\xBB\xBF# header comment\nx,y\n1,2\n\n# note\n3,4\n");
    auto t = CsvTable::parse(in, "mem");
    REQUIRE(t.rows().size() == 2);
    CHECK(t.header()[0] == "x");
    CHECK(t.number(t.rows()[1], 1) == 4.0);
    CHECK(t.rows()[1].line == 6);
  }

  TEST_CASE("errors carry source and line") {
    std::istringstream in("x,y\n1,2\n1,2,3\n");
    try {
      CsvTable::parse(in, "bad.csv");
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 3);
      CHECK(std::string(e.what()).find("bad.csv:3") != std::string::npos);
    }

    std::istringstream num("x\nabc\n");
    auto t = CsvTable::parse(num, "n.csv");
    CHECK_THROWS_AS(t.number(t.rows()[0], 0), ParseError);
    CHECK_THROWS_AS(t.require_column("zzz"), ParseError);
  }

  TEST_CASE("booleans accept the usual spellings") {
    std::istringstream in("b\n1\ntrue\nyes\n0\nFALSE\nno\nmaybe\n");
    auto t = CsvTable::parse(in);
    for (int i = 0; i < 3; ++i) CHECK(t.boolean(t.rows()[static_cast<std::size_t>(i)], 0));
    for (int i = 3; i < 6; ++i) CHECK_FALSE(t.boolean(t.rows()[static_cast<std::size_t>(i)], 0));
    CHECK_THROWS_AS(t.boolean(t.rows()[6], 0), ParseError);
  }

  TEST_CASE("number formatting round-trips") {
    CHECK(format_number(0.1) == "0.1");
    CHECK(std::stod(format_number(1.0 / 3.0)) == 1.0 / 3.0);
    CHECK(format_fixed(0.14449, 3) == "0.144");
  }
}
