#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "commands.hpp"
#include "handball/csv.hpp"
#include "test_support.hpp"

using namespace handball;
using namespace handball::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("handball_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

RunConfig fixture_config(const fs::path& out) {
  RunConfig c;
  c.covariates = test::fixture("covariates.csv");
  c.matches = test::fixture("matches.csv");
  c.odds = test::fixture("odds.csv");
  c.out = out.string();
  return c;
}

CsvTable read_table(const fs::path& p) { return CsvTable::read_file(p.string()); }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("build-design writes two rows per usable match") {
    const auto dir = scratch("design");
    auto result = cmd_build_design(fixture_config(dir));
    const auto design = read_table(dir / "design.csv");
    const auto excluded = read_table(dir / "exclusions.csv");
    const auto matches = read_matches_file(test::fixture("matches.csv"));
    CHECK(design.rows().size() == 2 * (matches.size() - excluded.rows().size()));
    CHECK(design.header().size() == 5 + kFeatureCount);
    CHECK(excluded.rows().size() == 5);
    CHECK(result.warnings.size() == 1);
    CHECK(slurp(dir / "design.csv").rfind("# handball_forecast", 0) == 0);
  }

  TEST_CASE("empty match file gives an empty design and a warning") {
    const auto dir = scratch("empty");
    write(dir / "matches.csv", "match_id,tournament_id,team_a,team_b,goals_a,goals_b,stage\n");
    auto config = fixture_config(dir / "out");
    config.matches = (dir / "matches.csv").string();
    auto result = cmd_build_design(config);
    CHECK(read_table(dir / "out" / "design.csv").rows().empty());
    REQUIRE(result.warnings.size() == 1);
    CHECK(result.warnings[0].find("no rows") != std::string::npos);
  }

  TEST_CASE("missing inputs are rejected") {
    auto config = fixture_config(scratch("missing"));
    config.covariates = "/nonexistent/covariates.csv";
    CHECK_THROWS_AS(cmd_build_design(config), CommandError);
    config = fixture_config(scratch("missing"));
    config.runs = 0;
    CHECK_THROWS_AS(cmd_simulate(config), CommandError);
  }

  TEST_CASE("compare rejects a single tournament") {
    const auto dir = scratch("single");
    auto matches = read_matches_file(test::fixture("matches.csv"));
    std::string text = "match_id,tournament_id,team_a,team_b,goals_a,goals_b,stage\n";
    for (const auto& m : matches) {
      if (m.tournament_id != 2013) continue;
      text += m.match_id + ",2013," + m.team_a + "," + m.team_b + "," + std::to_string(m.goals_a) + "," +
              std::to_string(m.goals_b) + "," + std::string(to_string(m.stage)) + "\n";
    }
    write(dir / "matches.csv", text);
    auto config = fixture_config(dir / "out");
    config.matches = (dir / "matches.csv").string();
    CHECK_THROWS_WITH_AS(cmd_compare(config), doctest::Contains("at least two tournaments"), CommandError);
  }

  TEST_CASE("simulate names a team without covariates") {
    const auto dir = scratch("noteam");
    auto doc = nlohmann::json::parse(slurp(test::fixture("format.json")));
    doc["preliminary_groups"][2]["teams"][5] = "XYZ";
    write(dir / "format.json", doc.dump(2));
    auto config = fixture_config(dir / "out");
    config.format = (dir / "format.json").string();
    config.runs = 10;
    CHECK_THROWS_WITH_AS(cmd_simulate(config), doctest::Contains("XYZ"), CommandError);
  }

  TEST_CASE("simulate with a single run") {
    const auto dir = scratch("one_run");
    auto config = fixture_config(dir);
    config.runs = 1;
    config.family = ScoreFamily::poisson;
    auto result = cmd_simulate(config);
    CHECK(result.files.size() == 5);
    const auto sim = read_table(dir / "simulation.csv");
    REQUIRE(sim.rows().size() == 24);
    double champions = 0.0;
    for (const auto& row : sim.rows()) champions += sim.number(row, 11);
    CHECK(champions == 1.0);
    const auto config_doc = nlohmann::json::parse(slurp(dir / "config.json"));
    CHECK(config_doc.at("runs") == 1);
    CHECK(config_doc.at("family") == "poisson");
    CHECK_FALSE(config_doc.contains("threads"));
  }

  TEST_CASE("compare without odds has no bookmaker row") {
    const auto dir = scratch("no_odds");
    auto config = fixture_config(dir);
    config.odds.clear();
    auto result = cmd_compare(config);
    REQUIRE_FALSE(result.warnings.empty());
    CHECK(result.warnings[0].find("no odds") != std::string::npos);
    const auto report = read_table(dir / "comparison.csv");
    CHECK(report.rows().size() == 8);
    const auto splits = read_table(dir / "splits.csv");
    CHECK(splits.rows().size() == 4);
  }
}
