#include "handball/standings.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <stdexcept>
#include <tuple>

namespace handball {

namespace {

struct Ranker {
  std::span<const GroupResult> results;
  std::vector<StandingEntry>& table;  // indexed by local team position
  std::vector<std::size_t> local;     // team id -> local position (or npos)
  Rng& rng;
  bool lot_used = false;

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  // Head-to-head (points, goal difference, goals) among `cluster` members.
  std::vector<std::array<int, 3>> head_to_head(const std::vector<std::size_t>& cluster) const {
    std::vector<bool> inside(table.size(), false);
    for (std::size_t t : cluster) inside[t] = true;
    std::vector<std::array<int, 3>> agg(table.size(), {0, 0, 0});
    for (const auto& r : results) {
      std::size_t a = local[r.team_a], b = local[r.team_b];
      if (!inside[a] || !inside[b]) continue;
      int pa = r.goals_a > r.goals_b ? kPointsWin : r.goals_a == r.goals_b ? kPointsDraw : 0;
      int pb = r.goals_b > r.goals_a ? kPointsWin : r.goals_a == r.goals_b ? kPointsDraw : 0;
      agg[a][0] += pa;
      agg[b][0] += pb;
      agg[a][1] += r.goals_a - r.goals_b;
      agg[b][1] += r.goals_b - r.goals_a;
      agg[a][2] += r.goals_a;
      agg[b][2] += r.goals_b;
    }
    return agg;
  }

  int key(int criterion, std::size_t t, const std::vector<std::array<int, 3>>& h2h) const {
    switch (criterion) {
      case 2: return h2h[t][0];
      case 3: return h2h[t][1];
      case 4: return h2h[t][2];
      case 5: return table[t].goal_difference();
      case 6: return table[t].goals_for;
    }
    return 0;
  }

  /// Orders a cluster of teams tied on all previous criteria.
  std::vector<std::size_t> order(std::vector<std::size_t> cluster) {
    if (cluster.size() < 2) return cluster;
    const auto h2h = head_to_head(cluster);
    for (int criterion = 2; criterion <= 6; ++criterion) {
      std::stable_sort(cluster.begin(), cluster.end(), [&](std::size_t l, std::size_t r) {
        return key(criterion, l, h2h) > key(criterion, r, h2h);
      });
      if (key(criterion, cluster.front(), h2h) == key(criterion, cluster.back(), h2h)) continue;
      std::vector<std::size_t> out;
      for (std::size_t i = 0; i < cluster.size();) {
        std::size_t j = i;
        while (j < cluster.size() && key(criterion, cluster[j], h2h) == key(criterion, cluster[i], h2h)) ++j;
        auto sub = order(std::vector<std::size_t>(cluster.begin() + static_cast<std::ptrdiff_t>(i),
                                                  cluster.begin() + static_cast<std::ptrdiff_t>(j)));
        out.insert(out.end(), sub.begin(), sub.end());
        i = j;
      }
      return out;
    }
    // Decision by lot. Sort first so the draw depends only on the teams.
    std::sort(cluster.begin(), cluster.end());
    for (std::size_t i = cluster.size(); i > 1; --i) std::swap(cluster[i - 1], cluster[rng.below(i)]);
    lot_used = true;
    return cluster;
  }
};

}  // namespace

GroupStanding rank_group(std::span<const std::size_t> teams, std::span<const GroupResult> results, Rng& rng) {
  const std::size_t n = teams.size();
  std::size_t max_id = 0;
  for (std::size_t t : teams) max_id = std::max(max_id, t);
  for (const auto& r : results) max_id = std::max({max_id, r.team_a, r.team_b});

  std::vector<std::size_t> local(max_id + 1, Ranker::npos);
  for (std::size_t i = 0; i < n; ++i) {
    if (local[teams[i]] != Ranker::npos) throw std::invalid_argument("rank_group: duplicate team");
    local[teams[i]] = i;
  }

  std::vector<StandingEntry> table(n);
  std::vector<int> met(n * n, 0);
  for (std::size_t i = 0; i < n; ++i) table[i].team = teams[i];
  for (const auto& r : results) {
    std::size_t a = local[r.team_a], b = local[r.team_b];
    if (a == Ranker::npos || b == Ranker::npos || a == b) {
      throw std::invalid_argument("rank_group: result involves a team outside the group");
    }
    ++met[a * n + b];
    ++met[b * n + a];
    auto apply = [](StandingEntry& e, int gf, int ga) {
      ++e.played;
      e.goals_for += gf;
      e.goals_against += ga;
      if (gf > ga) {
        ++e.won;
        e.points += kPointsWin;
      } else if (gf == ga) {
        ++e.drawn;
        e.points += kPointsDraw;
      } else {
        ++e.lost;
      }
    };
    apply(table[a], r.goals_a, r.goals_b);
    apply(table[b], r.goals_b, r.goals_a);
  }
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      if (met[a * n + b] != 1) throw std::invalid_argument("rank_group: incomplete or repeated round robin");
    }
  }

  Ranker ranker{results, table, local, rng};
  std::vector<std::size_t> all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = i;
  std::stable_sort(all.begin(), all.end(),
                   [&](std::size_t l, std::size_t r) { return table[l].points > table[r].points; });

  GroupStanding standing;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && table[all[j]].points == table[all[i]].points) ++j;
    auto sub = ranker.order(std::vector<std::size_t>(all.begin() + static_cast<std::ptrdiff_t>(i),
                                                     all.begin() + static_cast<std::ptrdiff_t>(j)));
    for (std::size_t t : sub) standing.entries.push_back(table[t]);
    i = j;
  }
  standing.lot_used = ranker.lot_used;
  return standing;
}

std::vector<NamedStandingEntry> rank_group(std::span<const MatchRecord> results, Rng& rng) {
  std::map<std::string, std::size_t> index;
  std::vector<std::string> names;
  auto id = [&](const std::string& team) {
    auto [it, inserted] = index.emplace(team, names.size());
    if (inserted) names.push_back(team);
    return it->second;
  };
  std::vector<GroupResult> converted;
  for (const auto& m : results) converted.push_back({id(m.team_a), id(m.team_b), m.goals_a, m.goals_b});

  // Team indices follow name order so the lot does not depend on input order.
  std::vector<std::string> sorted = names;
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::size_t> remap(names.size());
  for (std::size_t i = 0; i < names.size(); ++i) {
    remap[i] = static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), names[i]) - sorted.begin());
  }
  for (auto& r : converted) {
    r.team_a = remap[r.team_a];
    r.team_b = remap[r.team_b];
  }
  std::vector<std::size_t> teams(sorted.size());
  for (std::size_t i = 0; i < teams.size(); ++i) teams[i] = i;

  GroupStanding standing = rank_group(teams, converted, rng);
  std::vector<NamedStandingEntry> out;
  for (const auto& e : standing.entries) out.push_back({sorted[e.team], e});
  return out;
}

}  // namespace handball
