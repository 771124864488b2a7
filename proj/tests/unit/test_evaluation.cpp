#include <doctest.h>

#include <map>
#include <set>
#include <sstream>

#include "handball/csv.hpp"
#include "handball/evaluation.hpp"
#include "test_support.hpp"

using namespace handball;

TEST_SUITE("evaluation") {
  TEST_CASE("scoring rules") {
    const OutcomeProbs p{0.5, 0.3, 0.2};
    CHECK(multinomial_likelihood(p, Outcome::win) == 0.5);
    CHECK(multinomial_likelihood({1, 0, 0}, Outcome::win) == 1.0);
    CHECK(classification_indicator(p, Outcome::win) == 1);
    CHECK(classification_indicator(p, Outcome::draw) == 0);
    CHECK(classification_indicator({1.0 / 3, 1.0 / 3, 1.0 / 3}, Outcome::win) == 1);
    CHECK(predicted_outcome({0.2, 0.4, 0.4}) == Outcome::draw);
    CHECK(rps({1, 0, 0}, Outcome::win) == 0.0);
    CHECK(rps(p, Outcome::win) == doctest::Approx(0.145).epsilon(1e-12));
    CHECK(rps({0, 0, 1}, Outcome::win) == 1.0);
    CHECK(rps({0, 1, 0}, Outcome::draw) == 0.0);
  }

  TEST_CASE("goal errors") {
    auto e = squared_goal_errors(28, 26, 30, 25);
    CHECK(e.goals == doctest::Approx(2.5));
    CHECK(e.goal_difference == doctest::Approx(9.0));
    auto zero = squared_goal_errors(30, 25, 30, 25);
    CHECK(zero.goals == 0.0);
    CHECK(zero.goal_difference == 0.0);
  }

  TEST_CASE("odds conversion") {
    auto even = odds_to_probs(2, 2, 2);
    CHECK(even.win == doctest::Approx(1.0 / 3));
    auto p = odds_to_probs(1.5, 4.0, 6.0);
    CHECK(p.win == doctest::Approx(0.6154).epsilon(1e-4));
    CHECK(p.draw == doctest::Approx(0.2308).epsilon(1e-4));
    CHECK(p.loss == doctest::Approx(0.1538).epsilon(1e-4));
    CHECK(std::abs(p.sum() - 1.0) < 1e-12);
    auto fair = odds_to_probs(2.0, 4.0, 4.0);
    CHECK(fair.win == doctest::Approx(0.5));
    auto scaled = odds_to_probs(1.5 / 1.1, 4.0 / 1.1, 6.0 / 1.1);
    CHECK(scaled.win == doctest::Approx(p.win));
    CHECK_THROWS_AS(odds_to_probs(1.0, 3.0, 3.0), std::invalid_argument);
  }

  TEST_CASE("fingerprint separates item boundaries") {
    std::vector<std::string> a{"ab", "c"}, b{"a", "bc"};
    CHECK(fingerprint(a) != fingerprint(b));
    CHECK(fingerprint(a) == fingerprint(std::vector<std::string>{"ab", "c"}));
  }

  TEST_CASE("leave one tournament out on the fixture") {
    auto covs = read_covariates_file(test::fixture("covariates.csv"));
    auto matches = read_matches_file(test::fixture("matches.csv"));
    auto odds = read_odds_file(test::fixture("odds.csv"));
    std::vector<Method> methods{{ScoreFamily::poisson, LambdaRule::min}, {ScoreFamily::gaussian, LambdaRule::one_se}};
    auto report = leave_one_tournament_out(covs, matches, methods, odds);
    REQUIRE(report.methods.size() == 3);
    CHECK(report.methods.back().label == "Odds");
    CHECK(report.splits.size() == 4);
    for (const auto& m : report.methods) {
      CHECK(m.classification_rate >= 0.0);
      CHECK(m.classification_rate <= 1.0);
      CHECK(m.rps >= 0.0);
      CHECK(m.rps <= 1.0);
      CHECK(m.matches == report.methods.front().matches);
    }
    CHECK_FALSE(report.methods.back().goals.has_value());

    std::map<std::string, int> seen;
    for (const auto& p : report.predictions) {
      if (p.method == "Pois") ++seen[p.match_id];
    }
    for (const auto& [id, count] : seen) CHECK(count == 1);
    CHECK(seen.size() == report.methods.front().matches);

    // Report text carries one row per method.
    std::istringstream csv(report_csv(report));
    auto table = CsvTable::parse(csv);
    CHECK(table.rows().size() == 3);
  }

  TEST_CASE("a single tournament is rejected") {
    auto covs = read_covariates_file(test::fixture("covariates.csv"));
    auto matches = read_matches_file(test::fixture("matches.csv"));
    std::erase_if(matches, [](const MatchRecord& m) { return m.tournament_id != 2011; });
    CHECK_THROWS_AS(leave_one_tournament_out(covs, matches, all_methods()), std::invalid_argument);
  }

  TEST_CASE("identical methods give identical rows") {
    auto covs = read_covariates_file(test::fixture("covariates.csv"));
    auto matches = read_matches_file(test::fixture("matches.csv"));
    std::vector<Method> twice{{ScoreFamily::gaussian, LambdaRule::min}, {ScoreFamily::gaussian, LambdaRule::min}};
    auto report = leave_one_tournament_out(covs, matches, twice);
    REQUIRE(report.methods.size() == 2);
    CHECK(report.methods[0].likelihood == report.methods[1].likelihood);
    CHECK(report.methods[0].rps == report.methods[1].rps);
    CHECK(*report.methods[0].goals == *report.methods[1].goals);
  }
}
