#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace handball {

class CsvTable;

/// Per-team, per-tournament covariates. Squad-structure counts refer to the
/// nominated squad.
struct TeamCovariates {
  int tournament_id = 0;
  std::string team_id;
  double gdp_ratio = 0.0;
  double population_ratio = 0.0;
  double oddset_prob = 0.0;
  int ihf_rank = 1;
  double ihf_points = 0.0;
  bool host = false;
  bool europe = false;
  bool same_confed_as_host = false;
  double max_teammates = 0.0;
  double sec_max_teammates = 0.0;
  /// Absolute deviation of the squad's mean age from the ideal age (years).
  double age_deviation = 0.0;
  /// Squad mean age, when supplied instead of `age_deviation`.
  std::optional<double> avg_age;
  double avg_height = 1.9;
  double cl_semifinalists = 0.0;
  double ehf_cup_semifinalists = 0.0;
  double legionnaires = 0.0;
  double coach_age = 0.0;
  double coach_tenure = 0.0;
  bool coach_same_nationality = false;
  int squad_size = 16;
  /// Names of fields that were not available (empty or NA in the source).
  std::vector<std::string> missing;

  bool complete() const noexcept { return missing.empty(); }
};

enum class Stage { preliminary, main, semifinal, final, placement };

std::string_view to_string(Stage stage);
Stage parse_stage(std::string_view text);

struct MatchRecord {
  std::string match_id;
  int tournament_id = 0;
  std::string team_a;
  std::string team_b;
  int goals_a = 0;
  int goals_b = 0;
  Stage stage = Stage::preliminary;
};

inline constexpr std::size_t kMetricCount = 14;
inline constexpr std::size_t kDummyCount = 4;
inline constexpr std::size_t kFeatureCount = kMetricCount + 2 * kDummyCount;

/// Column names in design order: 14 metric differences, 4 own dummies,
/// 4 opponent dummies.
const std::array<std::string, kFeatureCount>& feature_names();

/// One observation: the goals scored by `team` against `opponent`.
struct DesignRow {
  int response_goals = 0;
  std::string team;
  std::string opponent;
  std::vector<double> metric_diffs;
  std::vector<double> own_dummies;
  std::vector<double> oppo_dummies;
  int tournament_id = 0;
  std::string match_id;
  /// Position of the source match in the design; both rows of a match share it.
  std::size_t match_index = 0;

  double feature(std::size_t j) const;
  std::vector<double> features() const;
};

struct Exclusion {
  std::string match_id;
  int tournament_id = 0;
  std::string team_a;
  std::string team_b;
  std::string reason;
};

struct DesignResult {
  std::vector<DesignRow> rows;
  std::vector<Exclusion> excluded;
};

/// Validates the value ranges of a covariate record. Throws std::invalid_argument.
void validate(const TeamCovariates& cov);

/// Scales the squad-structure counts of a 15-player squad to the 16-player
/// reference (factor 16/15). Squads of 16 and 20 are returned unchanged.
/// Throws std::invalid_argument for any other squad size.
TeamCovariates normalize_squad_counts(TeamCovariates cov);

/// Fills `age_deviation` for every record carrying `avg_age`, using as ideal
/// age the mean `avg_age` over records of the given training tournaments.
/// Returns the ideal age, or nullopt when no record carries `avg_age`.
std::optional<double> resolve_age_deviation(std::vector<TeamCovariates>& covs,
                                            std::span<const int> training_tournaments);

/// Applies a previously computed ideal age.
void apply_ideal_age(std::vector<TeamCovariates>& covs, double ideal_age);

/// Lookup of normalized covariates by (tournament, team).
class CovariateTable {
 public:
  CovariateTable() = default;
  explicit CovariateTable(std::span<const TeamCovariates> covs);

  const TeamCovariates* find(int tournament_id, std::string_view team) const;
  std::size_t size() const noexcept { return table_.size(); }

 private:
  std::map<std::pair<int, std::string>, TeamCovariates, std::less<>> table_;
};

/// The two mirrored observations of a single match between `a` and `b`.
std::pair<DesignRow, DesignRow> design_pair(const TeamCovariates& a, const TeamCovariates& b,
                                            int goals_a = 0, int goals_b = 0);

/// Builds the difference-encoded design. Matches lacking covariates for either
/// team are excluded and reported. Rows are ordered by tournament, then input
/// order within the tournament, first-named team first.
DesignResult build_design(std::span<const TeamCovariates> covs, std::span<const MatchRecord> matches);

struct ScalingInfo {
  std::vector<double> center;
  std::vector<double> scale;
  /// Columns with zero variance; their scale is fixed at 1.
  std::vector<bool> flagged;

  DesignRow apply(const DesignRow& row) const;
  std::vector<DesignRow> apply(std::span<const DesignRow> rows) const;
  /// Maps a coefficient on the scaled column back to the original units.
  double unscale_coefficient(std::size_t j, double coef) const { return coef / scale.at(j); }
};

/// Scales every feature column to unit standard deviation. Metric
/// differences are centred at exactly zero (the mirror construction makes
/// this their mean); dummy columns are scaled but not centred.
std::pair<std::vector<DesignRow>, ScalingInfo> standardize(std::span<const DesignRow> rows);

// CSV ingestion ------------------------------------------------------------

std::vector<TeamCovariates> read_covariates(const CsvTable& table);
std::vector<TeamCovariates> read_covariates_file(const std::string& path);
std::vector<MatchRecord> read_matches(const CsvTable& table);
std::vector<MatchRecord> read_matches_file(const std::string& path);

}  // namespace handball
