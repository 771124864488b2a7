#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "handball/counts.hpp"
#include "handball/design.hpp"
#include "handball/format.hpp"
#include "handball/rng.hpp"
#include "handball/score_model.hpp"

namespace handball {

inline constexpr double kExtraTimeFactor = 1.0 / 6.0;

/// Score distributions of one pairing: regulation time and one extra-time
/// period, for goals scored by a and by b.
struct MatchSpec {
  ScoreDistribution regulation_a;
  ScoreDistribution regulation_b;
  ScoreDistribution extra_a;
  ScoreDistribution extra_b;
};

MatchSpec make_match_spec(const ScoreModel& model, const TeamCovariates& a, const TeamCovariates& b);

/// Draws a's goals, then b's goals.
std::pair<int, int> simulate_match(const ScoreDistribution& a, const ScoreDistribution& b, Rng& rng);
std::pair<int, int> simulate_match(const MatchSpec& spec, Rng& rng);
std::pair<int, int> simulate_match(const ScoreModel& model, const TeamCovariates& a, const TeamCovariates& b,
                                   Rng& rng, double time_factor = 1.0);

struct KnockoutResult {
  bool a_wins = false;
  std::pair<int, int> regulation;
  /// Extra-time periods played (0, 1 or 2).
  int extra_periods = 0;
  std::pair<int, int> extra_goals;
  bool shootout = false;
};

/// Regulation; on a draw up to two extra-time periods; then a fair coin.
KnockoutResult resolve_knockout(const MatchSpec& spec, Rng& rng);
KnockoutResult resolve_knockout(const ScoreModel& model, const TeamCovariates& a, const TeamCovariates& b, Rng& rng);

/// Precomputed match specs for every ordered pair of teams.
class Matchups {
 public:
  using MeanFn = std::function<std::pair<double, double>(std::size_t a, std::size_t b)>;
  using DistFn = std::function<ScoreDistribution(double mean, double time_factor)>;

  /// Throws std::invalid_argument naming every team without covariates.
  static Matchups from_model(const ScoreModel& model, const CovariateTable& covs, int tournament_id,
                             std::span<const std::string> teams);
  static Matchups from_means(std::vector<std::string> teams, const MeanFn& means, const DistFn& dist);

  std::size_t size() const noexcept { return teams_.size(); }
  const std::vector<std::string>& teams() const noexcept { return teams_; }
  /// Index of a team, or size() when absent.
  std::size_t index_of(const std::string& team) const;
  const MatchSpec& spec(std::size_t a, std::size_t b) const { return specs_.at(a * teams_.size() + b); }

 private:
  std::vector<std::string> teams_;
  std::vector<MatchSpec> specs_;
};

struct TournamentOutcome {
  /// Team indices, champion first.
  std::vector<std::size_t> ranking;
  /// Final rank (1-based) per team index.
  std::vector<int> rank_of;
  /// Per team index: reached the main round.
  std::vector<bool> reached_main;
  /// Per preliminary group (format order): team indices in final order.
  std::vector<std::vector<std::size_t>> preliminary_order;
};

/// A tournament format bound to matchup indices.
class TournamentSimulator {
 public:
  /// Throws std::invalid_argument if the format is invalid or a team of the
  /// format has no matchup.
  TournamentSimulator(const Matchups& matchups, TournamentFormat format);

  TournamentOutcome run(Rng& rng) const;

  const Matchups& matchups() const noexcept { return *matchups_; }
  const TournamentFormat& format() const noexcept { return format_; }

 private:
  struct Plan;
  const Matchups* matchups_;
  TournamentFormat format_;
  std::shared_ptr<const Plan> plan_;
};

TournamentOutcome simulate_tournament(const Matchups& matchups, const TournamentFormat& format, Rng& rng);

inline constexpr int kSummaryRanks = 8;

/// Stage-survival counts over many simulated tournaments.
struct SimulationSummary {
  std::vector<std::string> teams;
  /// Preliminary group name per team.
  std::vector<std::string> groups;
  std::uint64_t runs = 0;
  std::uint64_t seed = 0;
  std::vector<std::uint64_t> main_round;
  /// at_least[t][k - 1]: runs in which team t finished k-th or better.
  std::vector<std::array<std::uint64_t, kSummaryRanks>> at_least;

  double p_main(std::size_t t) const { return static_cast<double>(main_round.at(t)) / static_cast<double>(runs); }
  double p_rank(std::size_t t, int k) const {
    return static_cast<double>(at_least.at(t).at(static_cast<std::size_t>(k - 1))) / static_cast<double>(runs);
  }
  double p_champion(std::size_t t) const { return p_rank(t, 1); }
};

/// Run r uses the stream derive_seed(master_seed, r); counts are summed, so
/// the summary does not depend on `threads`.
SimulationSummary monte_carlo(const TournamentSimulator& simulator, std::uint64_t runs, std::uint64_t master_seed,
                              std::size_t threads = 1);

/// Team x {main, 8th..2nd, champion} probabilities, ordered by champion
/// probability, then main-round probability, then name.
std::string summary_csv(const SimulationSummary& summary);
/// Per group, teams ordered by main-round probability.
std::string group_csv(const SimulationSummary& summary, const TournamentFormat& format);

}  // namespace handball
