#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "handball/design.hpp"
#include "handball/outcome.hpp"
#include "handball/score_model.hpp"

namespace handball {

class CsvTable;

/// Probability assigned to the realized outcome.
double multinomial_likelihood(const OutcomeProbs& probs, Outcome outcome);

/// Most probable outcome; exact ties resolve in the order win, draw, loss.
Outcome predicted_outcome(const OutcomeProbs& probs);

/// 1 when the most probable outcome is the realized one, else 0.
int classification_indicator(const OutcomeProbs& probs, Outcome outcome);

/// Ranked probability score over the ordered outcomes win < draw < loss.
double rps(const OutcomeProbs& probs, Outcome outcome);

struct GoalErrors {
  /// Mean of the two per-team squared goal errors.
  double goals = 0.0;
  /// Squared error of the goal difference.
  double goal_difference = 0.0;
};

GoalErrors squared_goal_errors(double expected_a, double expected_b, int goals_a, int goals_b);

/// Normalized reciprocal three-way odds. Throws unless every odd exceeds 1.
OutcomeProbs odds_to_probs(double odds_win, double odds_draw, double odds_loss);

struct OddsRecord {
  std::string match_id;
  double win = 0.0;
  double draw = 0.0;
  double loss = 0.0;
};

std::vector<OddsRecord> read_odds(const CsvTable& table);
std::vector<OddsRecord> read_odds_file(const std::string& path);

struct MatchPrediction {
  std::string method;
  std::string match_id;
  int tournament_id = 0;
  std::string team_a;
  std::string team_b;
  int goals_a = 0;
  int goals_b = 0;
  /// Expected goals; absent for the bookmaker benchmark.
  std::optional<double> expected_a;
  std::optional<double> expected_b;
  OutcomeProbs probs;
};

struct MethodSummary {
  std::string label;
  std::size_t matches = 0;
  std::size_t failed_splits = 0;
  double likelihood = 0.0;
  double classification_rate = 0.0;
  double rps = 0.0;
  std::optional<double> goals;
  std::optional<double> goal_difference;
};

/// What one training split saw. The fingerprint hashes the sorted training
/// match ids.
struct SplitAudit {
  int held_out = 0;
  std::vector<int> training_tournaments;
  std::vector<std::string> training_match_ids;
  std::vector<std::string> test_match_ids;
  std::uint64_t fingerprint = 0;
};

struct EvaluationReport {
  std::vector<MethodSummary> methods;
  std::vector<MatchPrediction> predictions;
  std::vector<SplitAudit> splits;
  std::vector<std::string> warnings;
};

struct EvaluationOptions {
  FitOptions fit;
  /// Worker threads across held-out tournaments.
  std::size_t threads = 1;
};

/// Holds out each tournament in turn, fits every method on the others and
/// predicts the held-out matches. Exact outcome probabilities are used for
/// the model methods. A method that fails to fit on a split is counted in
/// `failed_splits` and skipped there. `odds` adds the bookmaker row when
/// non-empty.
EvaluationReport leave_one_tournament_out(std::span<const TeamCovariates> covs,
                                          std::span<const MatchRecord> matches,
                                          std::span<const Method> methods,
                                          std::span<const OddsRecord> odds = {},
                                          const EvaluationOptions& options = {});

/// Summary per method as CSV.
std::string report_csv(const EvaluationReport& report);
/// Aligned text table; the best model value per column is marked with '*'.
std::string report_table(const EvaluationReport& report);
/// Every prediction as CSV, for auditing.
std::string predictions_csv(const EvaluationReport& report);

/// FNV-1a over a sequence of strings (each terminated by a NUL byte).
std::uint64_t fingerprint(std::span<const std::string> items);

}  // namespace handball
