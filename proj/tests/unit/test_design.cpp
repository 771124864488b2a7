#include <doctest.h>

#include <sstream>

#include "handball/csv.hpp"
#include "handball/design.hpp"
#include "test_support.hpp"

using namespace handball;
using handball::test::team;

namespace {

constexpr std::size_t kRank = 3;
constexpr std::size_t kAge = 7;
constexpr std::size_t kHost = 14;
constexpr std::size_t kHostOppo = 18;

}  // namespace

TEST_SUITE("design") {
  TEST_CASE("squad counts scale by 16/15 only for 15-player squads") {
    auto c = team("X");
    c.legionnaires = 15;
    c.squad_size = 15;
    CHECK(normalize_squad_counts(c).legionnaires == doctest::Approx(16.0));
    c.legionnaires = 10;
    c.squad_size = 16;
    CHECK(normalize_squad_counts(c).legionnaires == 10.0);
    c.legionnaires = 12;
    c.squad_size = 20;
    CHECK(normalize_squad_counts(c).legionnaires == 12.0);
    c.squad_size = 18;
    CHECK_THROWS_AS(normalize_squad_counts(c), std::invalid_argument);
  }

  TEST_CASE("first-named minus opponent, mirrored") {
    auto fra = team("FRA");
    fra.ihf_rank = 5;
    fra.age_deviation = 1.31;
    fra.host = true;
    auto tun = team("TUN");
    tun.ihf_rank = 17;
    tun.age_deviation = 0.5;
    auto [a, b] = design_pair(fra, tun, 32, 19);
    CHECK(a.response_goals == 32);
    CHECK(b.response_goals == 19);
    CHECK(a.feature(kRank) == -12.0);
    CHECK(b.feature(kRank) == 12.0);
    CHECK(a.feature(kAge) == doctest::Approx(0.81));
    for (std::size_t k = 0; k < kMetricCount; ++k) CHECK(a.metric_diffs[k] == -b.metric_diffs[k]);
    CHECK(a.own_dummies == b.oppo_dummies);
    CHECK(a.oppo_dummies == b.own_dummies);
    CHECK(a.feature(kHost) == 1.0);
    CHECK(b.feature(kHostOppo) == 1.0);
    CHECK(feature_names()[kRank] == "Rank");
    CHECK(feature_names()[kHostOppo] == "Host.oppo");
  }

  TEST_CASE("identical teams give zero differences") {
    auto [a, b] = design_pair(team("A"), team("B"));
    for (double d : a.metric_diffs) CHECK(d == 0.0);
    for (double d : b.metric_diffs) CHECK(d == 0.0);
  }

  TEST_CASE("round robin of three gives six rows; missing data excluded") {
    std::vector<TeamCovariates> covs{team("A"), team("B"), team("C")};
    std::vector<MatchRecord> matches{
        {"1", 2011, "A", "B", 30, 25, Stage::preliminary},
        {"2", 2011, "A", "C", 28, 28, Stage::preliminary},
        {"3", 2011, "B", "C", 20, 27, Stage::preliminary},
    };
    auto d = build_design(covs, matches);
    CHECK(d.rows.size() == 6);
    CHECK(d.excluded.empty());
    CHECK(d.rows[0].match_index == d.rows[1].match_index);
    CHECK(d.rows[0].team == "A");
    CHECK(d.rows[1].team == "B");

    matches.push_back({"4", 2011, "A", "D", 30, 20, Stage::preliminary});
    covs.back().missing.push_back("avg_height");
    d = build_design(covs, matches);
    CHECK(d.rows.size() == 2);
    REQUIRE(d.excluded.size() == 3);
    CHECK(d.excluded.back().reason.find("D") != std::string::npos);
  }

  TEST_CASE("rows are ordered by tournament, then input order") {
    std::vector<TeamCovariates> covs{team("A", 2013), team("B", 2013), team("A", 2011), team("B", 2011)};
    std::vector<MatchRecord> matches{
        {"x", 2013, "A", "B", 1, 2, Stage::preliminary},
        {"y", 2011, "B", "A", 3, 4, Stage::preliminary},
        {"z", 2011, "A", "B", 5, 6, Stage::preliminary},
    };
    auto d = build_design(covs, matches);
    REQUIRE(d.rows.size() == 6);
    CHECK(d.rows[0].match_id == "y");
    CHECK(d.rows[2].match_id == "z");
    CHECK(d.rows[4].match_id == "x");
    auto again = build_design(covs, matches);
    for (std::size_t i = 0; i < d.rows.size(); ++i) CHECK(again.rows[i].features() == d.rows[i].features());
  }

  TEST_CASE("standardize: unit sd, exact mirror negation, zero-variance flagged") {
    std::vector<TeamCovariates> covs;
    const char* ids[] = {"A", "B", "C", "D"};
    for (int i = 0; i < 4; ++i) {
      auto c = team(ids[i]);
      c.ihf_rank = 1 + 3 * i;
      c.ihf_points = 40.0 * i;
      c.host = i == 0;
      covs.push_back(c);
    }
    std::vector<MatchRecord> matches;
    int id = 0;
    for (int i = 0; i < 4; ++i) {
      for (int j = i + 1; j < 4; ++j) {
        matches.push_back({std::to_string(++id), 2011, ids[i], ids[j], 25 + i, 24 + j, Stage::preliminary});
      }
    }
    auto design = build_design(covs, matches);
    auto [rows, info] = standardize(design.rows);
    double ss = 0.0;
    for (const auto& r : rows) ss += r.feature(kRank) * r.feature(kRank);
    CHECK(ss / static_cast<double>(rows.size()) == doctest::Approx(1.0));
    for (std::size_t i = 0; i < rows.size(); i += 2) {
      for (std::size_t k = 0; k < kMetricCount; ++k) CHECK(rows[i].metric_diffs[k] == -rows[i + 1].metric_diffs[k]);
    }
    CHECK(info.flagged[0]);  // GDP identical for everyone
    CHECK(info.scale[0] == 1.0);
    CHECK_FALSE(info.flagged[kHost]);
    CHECK(info.center[kRank] == 0.0);
    CHECK(info.unscale_coefficient(kRank, 2.0) == doctest::Approx(2.0 / info.scale[kRank]));

    // A column with population sd 2 is halved.
    std::vector<DesignRow> two(2, rows[0]);
    two[0].metric_diffs[1] = 2.0;
    two[1].metric_diffs[1] = -2.0;
    auto [halved, _] = standardize(two);
    CHECK(halved[0].metric_diffs[1] == doctest::Approx(1.0));
    CHECK_THROWS(standardize(std::span<const DesignRow>(rows.data(), 1)));
  }

  TEST_CASE("covariate CSV: missing values, avg_age and line-numbered errors") {
    const std::string header =
        "tournament_id,team_id,gdp_ratio,population_ratio,oddset_prob,ihf_rank,ihf_points,host,europe,"
        "same_confed_as_host,max_teammates,sec_max_teammates,avg_age,avg_height,cl_semifinalists,"
        "ehf_cup_semifinalists,legionnaires,coach_age,coach_tenure,coach_same_nationality,squad_size\n";
    std::istringstream ok(header +
                          "2011,A,1,1,0.2,3,100,1,1,1,4,3,28,1.93,1,0,8,50,3,1,16\n"
                          "2011,B,1,1,0.1,9,80,0,1,1,4,3,26,NA,1,0,8,50,3,1,15\n");
    auto covs = read_covariates(CsvTable::parse(ok, "cov.csv"));
    REQUIRE(covs.size() == 2);
    CHECK_FALSE(covs[0].complete());  // age deviation pending
    std::vector<int> training{2011};
    auto ideal = resolve_age_deviation(covs, training);
    REQUIRE(ideal);
    CHECK(*ideal == doctest::Approx(27.0));
    CHECK(covs[0].complete());
    CHECK(covs[0].age_deviation == doctest::Approx(1.0));
    CHECK(covs[1].missing == std::vector<std::string>{"avg_height"});

    std::istringstream bad(header + "2011,A,1,1,1.5,3,100,1,1,1,4,3,28,1.93,1,0,8,50,3,1,16\n");
    try {
      read_covariates(CsvTable::parse(bad, "cov.csv"));
      FAIL("expected rejection");
    } catch (const ParseError& e) {
      CHECK(e.line() == 2);
    }
  }

  TEST_CASE("match CSV") {
    std::istringstream in("tournament_id,team_a,team_b,goals_a,goals_b\n2011,A,B,30,25\n2011,A,A,1,1\n");
    CHECK_THROWS_AS(read_matches(CsvTable::parse(in, "m.csv")), ParseError);
    std::istringstream ok("tournament_id,team_a,team_b,goals_a,goals_b,stage\n2011,A,B,30,25,final\n");
    auto m = read_matches(CsvTable::parse(ok, "m.csv"));
    REQUIRE(m.size() == 1);
    CHECK(m[0].match_id == "1");
    CHECK(m[0].stage == Stage::final);
  }
}
