#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "handball/design.hpp"
#include "handball/rng.hpp"

namespace handball {

inline constexpr int kPointsWin = 2;
inline constexpr int kPointsDraw = 1;

/// One played group match between teams identified by index.
struct GroupResult {
  std::size_t team_a = 0;
  std::size_t team_b = 0;
  int goals_a = 0;
  int goals_b = 0;
};

struct StandingEntry {
  std::size_t team = 0;
  int played = 0;
  int won = 0;
  int drawn = 0;
  int lost = 0;
  int goals_for = 0;
  int goals_against = 0;
  int points = 0;

  int goal_difference() const noexcept { return goals_for - goals_against; }
};

/// Final order of a group, best first.
struct GroupStanding {
  std::vector<StandingEntry> entries;
  /// True when the order between some teams was decided by lot.
  bool lot_used = false;
};

/// Ranks a complete round robin among `teams`. Criteria, in order: points;
/// then within each tied cluster head-to-head points, head-to-head goal
/// difference and head-to-head goals (on the matches among the tied teams
/// only), overall goal difference, overall goals. Every split cluster restarts
/// at head-to-head points. Ties surviving all criteria are drawn by lot from
/// `rng`. Throws std::invalid_argument when some pair has not played exactly once.
GroupStanding rank_group(std::span<const std::size_t> teams, std::span<const GroupResult> results, Rng& rng);

struct NamedStandingEntry {
  std::string team;
  StandingEntry record;
};

/// Same ranking for match records; all records must belong to one group.
std::vector<NamedStandingEntry> rank_group(std::span<const MatchRecord> results, Rng& rng);

}  // namespace handball
