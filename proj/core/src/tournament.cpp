#include "handball/tournament.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "handball/csv.hpp"
#include "handball/parallel.hpp"
#include "handball/standings.hpp"

namespace handball {

MatchSpec make_match_spec(const ScoreModel& model, const TeamCovariates& a, const TeamCovariates& b) {
  auto [ma, mb] = model.expected_goals(a, b);
  return {model.distribution(ma), model.distribution(mb), model.distribution(ma, kExtraTimeFactor),
          model.distribution(mb, kExtraTimeFactor)};
}

std::pair<int, int> simulate_match(const ScoreDistribution& a, const ScoreDistribution& b, Rng& rng) {
  int ga = a.sample(rng);
  int gb = b.sample(rng);
  return {ga, gb};
}

std::pair<int, int> simulate_match(const MatchSpec& spec, Rng& rng) {
  return simulate_match(spec.regulation_a, spec.regulation_b, rng);
}

std::pair<int, int> simulate_match(const ScoreModel& model, const TeamCovariates& a, const TeamCovariates& b,
                                   Rng& rng, double time_factor) {
  auto [ma, mb] = model.expected_goals(a, b);
  return simulate_match(model.distribution(ma, time_factor), model.distribution(mb, time_factor), rng);
}

KnockoutResult resolve_knockout(const MatchSpec& spec, Rng& rng) {
  KnockoutResult r;
  r.regulation = simulate_match(spec.regulation_a, spec.regulation_b, rng);
  if (r.regulation.first != r.regulation.second) {
    r.a_wins = r.regulation.first > r.regulation.second;
    return r;
  }
  for (int period = 1; period <= 2; ++period) {
    auto [ga, gb] = simulate_match(spec.extra_a, spec.extra_b, rng);
    r.extra_periods = period;
    r.extra_goals.first += ga;
    r.extra_goals.second += gb;
    if (ga != gb) {
      r.a_wins = ga > gb;
      return r;
    }
  }
  r.shootout = true;
  r.a_wins = rng.coin_flip();
  return r;
}

KnockoutResult resolve_knockout(const ScoreModel& model, const TeamCovariates& a, const TeamCovariates& b, Rng& rng) {
  return resolve_knockout(make_match_spec(model, a, b), rng);
}

// Matchups -------------------------------------------------------------------

Matchups Matchups::from_model(const ScoreModel& model, const CovariateTable& covs, int tournament_id,
                              std::span<const std::string> teams) {
  std::vector<const TeamCovariates*> rows;
  std::string missing;
  for (const auto& t : teams) {
    const TeamCovariates* c = covs.find(tournament_id, t);
    if (!c || !c->complete()) {
      missing += (missing.empty() ? "" : ", ") + t;
    }
    rows.push_back(c);
  }
  if (!missing.empty()) {
    throw std::invalid_argument("no complete covariates for tournament " + std::to_string(tournament_id) +
                                " for team(s): " + missing);
  }
  Matchups m;
  m.teams_.assign(teams.begin(), teams.end());
  const std::size_t n = teams.size();
  std::vector<std::optional<MatchSpec>> specs(n * n);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      MatchSpec s = make_match_spec(model, *rows[a], *rows[b]);
      specs[b * n + a] = MatchSpec{s.regulation_b, s.regulation_a, s.extra_b, s.extra_a};
      specs[a * n + b] = std::move(s);
    }
  }
  const ScoreDistribution unused = ScoreDistribution::poisson(1.0);
  m.specs_.reserve(n * n);
  for (auto& s : specs) m.specs_.push_back(s ? std::move(*s) : MatchSpec{unused, unused, unused, unused});
  return m;
}

Matchups Matchups::from_means(std::vector<std::string> teams, const MeanFn& means, const DistFn& dist) {
  Matchups m;
  m.teams_ = std::move(teams);
  const std::size_t n = m.teams_.size();
  const ScoreDistribution unused = ScoreDistribution::poisson(1.0);
  m.specs_.reserve(n * n);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      if (a == b) {
        m.specs_.push_back({unused, unused, unused, unused});
        continue;
      }
      auto [ma, mb] = means(a, b);
      m.specs_.push_back({dist(ma, 1.0), dist(mb, 1.0), dist(ma, kExtraTimeFactor), dist(mb, kExtraTimeFactor)});
    }
  }
  return m;
}

std::size_t Matchups::index_of(const std::string& team) const {
  auto it = std::find(teams_.begin(), teams_.end(), team);
  return static_cast<std::size_t>(it - teams_.begin());
}

// Simulator ------------------------------------------------------------------

struct TournamentSimulator::Plan {
  struct Slot {
    SlotRef::Kind kind = SlotRef::Kind::group_position;
    std::size_t index = 0;  // standing index or knockout match index
    std::size_t position = 0;
  };
  struct Knockout {
    Slot home;
    Slot away;
    std::optional<int> winner_rank;
    std::optional<int> loser_rank;
  };
  struct Positions {
    std::size_t position = 0;
    std::vector<std::size_t> standings;
    std::vector<int> ranks;
  };

  // Standings indices: preliminary groups first, then main groups.
  std::vector<std::vector<std::size_t>> prelim;
  std::vector<std::vector<std::size_t>> main_sources;
  std::vector<Knockout> knockout;
  std::vector<Positions> positions;
  std::size_t advance = 0;
  bool carry_over = true;
  int decided = 0;
};

TournamentSimulator::TournamentSimulator(const Matchups& matchups, TournamentFormat format)
    : matchups_(&matchups), format_(std::move(format)) {
  format_.validate();
  auto plan = std::make_shared<Plan>();
  std::map<std::string, std::size_t> standing_index;
  for (const auto& g : format_.groups) {
    std::vector<std::size_t> members;
    for (const auto& t : g.teams) {
      std::size_t idx = matchups.index_of(t);
      if (idx == matchups.size()) throw std::invalid_argument("team '" + t + "' has no matchup data");
      members.push_back(idx);
    }
    standing_index[g.name] = plan->prelim.size();
    plan->prelim.push_back(std::move(members));
  }
  for (const auto& m : format_.main_groups) {
    std::vector<std::size_t> sources;
    for (const auto& f : m.from) sources.push_back(standing_index.at(f));
    standing_index[m.name] = plan->prelim.size() + plan->main_sources.size();
    plan->main_sources.push_back(std::move(sources));
  }
  std::map<std::string, std::size_t> match_index;
  auto slot = [&](const SlotRef& ref) {
    Plan::Slot s;
    s.kind = ref.kind;
    s.position = ref.position;
    s.index = ref.kind == SlotRef::Kind::group_position ? standing_index.at(ref.source) : match_index.at(ref.source);
    return s;
  };
  for (const auto& k : format_.knockout) {
    plan->knockout.push_back({slot(k.home), slot(k.away), k.winner_rank, k.loser_rank});
    match_index[k.name] = plan->knockout.size() - 1;
  }
  for (const auto& p : format_.position_ranks) {
    Plan::Positions pos;
    pos.position = p.position;
    for (const auto& g : p.groups) pos.standings.push_back(standing_index.at(g));
    pos.ranks = p.ranks;
    plan->positions.push_back(std::move(pos));
  }
  plan->advance = format_.advance_per_group;
  plan->carry_over = format_.carry_over;
  plan->decided = format_.decided_ranks();
  plan_ = std::move(plan);
}

namespace {

using RecordKey = std::tuple<int, int, int>;

RecordKey record_key(const StandingEntry& e) { return {e.points, e.goal_difference(), e.goals_for}; }

/// Sorts by descending key; equal keys are ordered by lot.
template <class Key>
void order_with_lot(std::vector<std::pair<Key, std::size_t>>& items, Rng& rng) {
  std::sort(items.begin(), items.end(), [](const auto& l, const auto& r) {
    if (l.first != r.first) return l.first > r.first;
    return l.second < r.second;
  });
  for (std::size_t i = 0; i < items.size();) {
    std::size_t j = i;
    while (j < items.size() && items[j].first == items[i].first) ++j;
    for (std::size_t k = j - i; k > 1; --k) std::swap(items[i + k - 1], items[i + rng.below(k)]);
    i = j;
  }
}

void play_pair(const Matchups& m, std::size_t a, std::size_t b, Rng& rng, std::vector<GroupResult>& out) {
  auto [ga, gb] = simulate_match(m.spec(a, b), rng);
  out.push_back({a, b, ga, gb});
}

}  // namespace

TournamentOutcome TournamentSimulator::run(Rng& rng) const {
  const Plan& plan = *plan_;
  const Matchups& m = *matchups_;
  const std::size_t n_teams = m.size();

  std::vector<GroupStanding> standings;
  std::vector<std::vector<GroupResult>> prelim_results;
  standings.reserve(plan.prelim.size() + plan.main_sources.size());

  TournamentOutcome out;
  out.rank_of.assign(n_teams, 0);
  out.reached_main.assign(n_teams, false);

  // Last group each team played in: standing index and position (1-based).
  std::vector<std::pair<std::size_t, std::size_t>> last_group(n_teams, {0, 0});
  std::vector<bool> participates(n_teams, false);

  for (const auto& members : plan.prelim) {
    std::vector<GroupResult> results;
    for (std::size_t i = 0; i < members.size(); ++i) {
      for (std::size_t j = i + 1; j < members.size(); ++j) play_pair(m, members[i], members[j], rng, results);
    }
    standings.push_back(rank_group(members, results, rng));
    prelim_results.push_back(std::move(results));
    std::vector<std::size_t> order;
    const std::size_t g = standings.size() - 1;
    for (std::size_t p = 0; p < standings[g].entries.size(); ++p) {
      std::size_t t = standings[g].entries[p].team;
      order.push_back(t);
      last_group[t] = {g, p + 1};
      participates[t] = true;
    }
    out.preliminary_order.push_back(std::move(order));
  }

  for (const auto& sources : plan.main_sources) {
    std::vector<std::size_t> qualifiers;
    std::vector<std::size_t> origin;
    for (std::size_t s : sources) {
      for (std::size_t p = 0; p < plan.advance; ++p) {
        qualifiers.push_back(standings[s].entries[p].team);
        origin.push_back(s);
      }
    }
    std::vector<bool> qualified(n_teams, false);
    for (std::size_t t : qualifiers) qualified[t] = true;

    std::vector<GroupResult> results;
    if (plan.carry_over) {
      for (std::size_t s : sources) {
        for (const auto& r : prelim_results[s]) {
          if (qualified[r.team_a] && qualified[r.team_b]) results.push_back(r);
        }
      }
    }
    for (std::size_t i = 0; i < qualifiers.size(); ++i) {
      for (std::size_t j = i + 1; j < qualifiers.size(); ++j) {
        if (plan.carry_over && origin[i] == origin[j]) continue;
        play_pair(m, qualifiers[i], qualifiers[j], rng, results);
      }
    }
    standings.push_back(rank_group(qualifiers, results, rng));
    const std::size_t g = standings.size() - 1;
    for (std::size_t p = 0; p < standings[g].entries.size(); ++p) {
      std::size_t t = standings[g].entries[p].team;
      out.reached_main[t] = true;
      last_group[t] = {g, p + 1};
    }
  }

  auto assign = [&](std::size_t team, int rank) { out.rank_of[team] = rank; };

  std::vector<std::size_t> winners(plan.knockout.size());
  std::vector<std::size_t> losers(plan.knockout.size());
  auto resolve = [&](const Plan::Slot& s) -> std::size_t {
    switch (s.kind) {
      case SlotRef::Kind::group_position: return standings[s.index].entries[s.position - 1].team;
      case SlotRef::Kind::winner: return winners[s.index];
      case SlotRef::Kind::loser: return losers[s.index];
    }
    return 0;
  };
  for (std::size_t k = 0; k < plan.knockout.size(); ++k) {
    const auto& ko = plan.knockout[k];
    std::size_t home = resolve(ko.home);
    std::size_t away = resolve(ko.away);
    KnockoutResult r = resolve_knockout(m.spec(home, away), rng);
    winners[k] = r.a_wins ? home : away;
    losers[k] = r.a_wins ? away : home;
    if (ko.winner_rank) assign(winners[k], *ko.winner_rank);
    if (ko.loser_rank) assign(losers[k], *ko.loser_rank);
  }

  for (const auto& pos : plan.positions) {
    std::vector<std::pair<RecordKey, std::size_t>> items;
    for (std::size_t s : pos.standings) {
      const auto& e = standings[s].entries[pos.position - 1];
      items.push_back({record_key(e), e.team});
    }
    order_with_lot(items, rng);
    for (std::size_t i = 0; i < items.size(); ++i) assign(items[i].second, pos.ranks[i]);
  }

  // Remaining teams: main-round teams before the rest, then by final group
  // position, then by record in that group, then by lot.
  using RestKey = std::tuple<int, long, int, int, int>;
  std::vector<std::pair<RestKey, std::size_t>> rest;
  for (std::size_t t = 0; t < n_teams; ++t) {
    if (!participates[t] || out.rank_of[t] != 0) continue;
    auto [g, p] = last_group[t];
    const StandingEntry& e = standings[g].entries[p - 1];
    rest.push_back({{out.reached_main[t] ? 1 : 0, -static_cast<long>(p), e.points, e.goal_difference(), e.goals_for},
                    t});
  }
  order_with_lot(rest, rng);
  int next_rank = plan.decided + 1;
  for (const auto& item : rest) assign(item.second, next_rank++);

  out.ranking.assign(static_cast<std::size_t>(next_rank - 1), 0);
  for (std::size_t t = 0; t < n_teams; ++t) {
    if (participates[t]) out.ranking[static_cast<std::size_t>(out.rank_of[t] - 1)] = t;
  }
  return out;
}

TournamentOutcome simulate_tournament(const Matchups& matchups, const TournamentFormat& format, Rng& rng) {
  return TournamentSimulator(matchups, format).run(rng);
}

// Monte Carlo ----------------------------------------------------------------

SimulationSummary monte_carlo(const TournamentSimulator& simulator, std::uint64_t runs, std::uint64_t master_seed,
                              std::size_t threads) {
  if (runs < 1) throw std::invalid_argument("monte_carlo: runs must be at least 1");
  const Matchups& m = simulator.matchups();
  const std::size_t n = m.size();

  struct Counts {
    std::vector<std::uint64_t> main_round;
    std::vector<std::array<std::uint64_t, kSummaryRanks>> at_least;
  };
  constexpr std::uint64_t kBlock = 1024;
  const std::size_t blocks = static_cast<std::size_t>((runs + kBlock - 1) / kBlock);
  std::vector<Counts> partial(blocks);

  parallel_for(blocks, threads, [&](std::size_t b) {
    Counts c{std::vector<std::uint64_t>(n, 0), std::vector<std::array<std::uint64_t, kSummaryRanks>>(n)};
    for (auto& a : c.at_least) a.fill(0);
    const std::uint64_t begin = b * kBlock;
    const std::uint64_t end = std::min(runs, begin + kBlock);
    for (std::uint64_t r = begin; r < end; ++r) {
      Rng rng(derive_seed(master_seed, r));
      TournamentOutcome o = simulator.run(rng);
      for (std::size_t t = 0; t < n; ++t) {
        if (o.reached_main[t]) ++c.main_round[t];
        for (int k = o.rank_of[t]; k >= 1 && k <= kSummaryRanks; ++k) ++c.at_least[t][static_cast<std::size_t>(k - 1)];
      }
    }
    partial[b] = std::move(c);
  });

  SimulationSummary s;
  s.teams = m.teams();
  s.groups.assign(n, "");
  for (const auto& g : simulator.format().groups) {
    for (const auto& t : g.teams) s.groups[m.index_of(t)] = g.name;
  }
  s.runs = runs;
  s.seed = master_seed;
  s.main_round.assign(n, 0);
  s.at_least.resize(n);
  for (auto& a : s.at_least) a.fill(0);
  for (const auto& c : partial) {
    for (std::size_t t = 0; t < n; ++t) {
      s.main_round[t] += c.main_round[t];
      for (int k = 0; k < kSummaryRanks; ++k) s.at_least[t][static_cast<std::size_t>(k)] += c.at_least[t][static_cast<std::size_t>(k)];
    }
  }
  return s;
}

namespace {

constexpr int kProbDigits = 5;

}  // namespace

std::string summary_csv(const SimulationSummary& s) {
  std::vector<std::size_t> order;
  for (std::size_t t = 0; t < s.teams.size(); ++t) {
    if (!s.groups[t].empty()) order.push_back(t);
  }
  std::sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) {
    if (s.at_least[l][0] != s.at_least[r][0]) return s.at_least[l][0] > s.at_least[r][0];
    if (s.main_round[l] != s.main_round[r]) return s.main_round[l] > s.main_round[r];
    return s.teams[l] < s.teams[r];
  });
  std::ostringstream os;
  os << "rank,team,group,main,8th,7th,6th,5th,4th,3rd,2nd,champion\n";
  int row = 1;
  for (std::size_t t : order) {
    os << row++ << ',' << csv_escape(s.teams[t]) << ',' << csv_escape(s.groups[t]) << ','
       << format_fixed(s.p_main(t), kProbDigits);
    for (int k = kSummaryRanks; k >= 1; --k) os << ',' << format_fixed(s.p_rank(t, k), kProbDigits);
    os << '\n';
  }
  return os.str();
}

std::string group_csv(const SimulationSummary& s, const TournamentFormat& format) {
  std::ostringstream os;
  os << "group,position,team,main\n";
  for (const auto& g : format.groups) {
    std::vector<std::size_t> members;
    for (const auto& name : g.teams) {
      auto it = std::find(s.teams.begin(), s.teams.end(), name);
      if (it != s.teams.end()) members.push_back(static_cast<std::size_t>(it - s.teams.begin()));
    }
    std::stable_sort(members.begin(), members.end(),
                     [&](std::size_t l, std::size_t r) { return s.main_round[l] > s.main_round[r]; });
    for (std::size_t p = 0; p < members.size(); ++p) {
      os << csv_escape(g.name) << ',' << p + 1 << ',' << csv_escape(s.teams[members[p]]) << ','
         << format_fixed(s.p_main(members[p]), kProbDigits) << '\n';
    }
  }
  return os.str();
}

}  // namespace handball
