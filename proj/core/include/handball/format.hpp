#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "handball/design.hpp"

namespace handball {

/// Reference to a team slot filled during the tournament: a group position
/// ("I:1"), or the winner/loser of an earlier knockout match ("winner:SF1").
struct SlotRef {
  enum class Kind { group_position, winner, loser };
  Kind kind = Kind::group_position;
  std::string source;
  std::size_t position = 0;

  static SlotRef parse(const std::string& text);
  std::string to_string() const;
};

struct KnockoutMatch {
  std::string name;
  SlotRef home;
  SlotRef away;
  Stage stage = Stage::semifinal;
  std::optional<int> winner_rank;
  std::optional<int> loser_rank;
};

/// Ranks assigned from the final group standings: the teams holding
/// `position` in the listed groups are ordered by record (points, goal
/// difference, goals, lot) and receive `ranks` in that order.
struct PositionRanks {
  std::size_t position = 0;
  std::vector<std::string> groups;
  std::vector<int> ranks;
};

struct NamedGroup {
  std::string name;
  std::vector<std::string> teams;
};

struct MainGroup {
  std::string name;
  std::vector<std::string> from;
};

/// Tournament structure: preliminary round robins, a main round fed by the
/// top `advance_per_group` of each preliminary group, knockout matches and
/// standings-derived placements.
struct TournamentFormat {
  std::string name;
  /// Tournament whose covariates describe the participants.
  int tournament_id = 0;
  std::vector<NamedGroup> groups;
  std::size_t advance_per_group = 3;
  std::vector<MainGroup> main_groups;
  /// Carry preliminary results between qualifiers of the same group.
  bool carry_over = true;
  std::vector<KnockoutMatch> knockout;
  std::vector<PositionRanks> position_ranks;

  /// All teams in group order.
  std::vector<std::string> teams() const;
  /// Number of leading ranks fixed by knockout matches and position ranks;
  /// they must form 1..N.
  int decided_ranks() const;
  /// Throws std::invalid_argument describing the first inconsistency.
  void validate() const;

  static TournamentFormat from_json(const std::string& text);
  static TournamentFormat load(const std::string& path);
  std::string to_json() const;

  /// The 2019 IHF men's championship: four groups of six, two main groups of
  /// six with carried results, semifinals, final and bronze match, places
  /// 5-8 from the main-round standings.
  static TournamentFormat ihf2019();
};

}  // namespace handball
