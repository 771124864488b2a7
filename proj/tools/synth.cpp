// Writes the bundled synthetic fixture: four past tournaments with results and
// odds, covariates for the 2019 field, and the 2019 format document.
//
//   handball_synth <output-dir> [seed]

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "handball/counts.hpp"
#include "handball/csv.hpp"
#include "handball/format.hpp"
#include "handball/rng.hpp"

namespace {

using handball::Rng;
using handball::ScoreDistribution;
using handball::format_fixed;

constexpr double kPhi = 0.74;
constexpr double kBaseGoals = 27.0;
constexpr double kStrengthEffect = 0.16;
constexpr double kHostEffect = 0.05;
constexpr double kMargin = 1.07;

struct Team {
  std::string id;
  double strength;
  bool europe;
};

// Latent strength on a standard-normal-like scale.
const std::vector<Team>& pool() {
  static const std::vector<Team> teams = {
      {"DEN", 1.9, true},   {"FRA", 1.8, true},   {"GER", 1.5, true},   {"ESP", 1.5, true},
      {"CRO", 1.3, true},   {"NOR", 1.2, true},   {"SWE", 1.1, true},   {"HUN", 0.9, true},
      {"SLO", 0.8, true},   {"POL", 0.7, true},   {"ICE", 0.6, true},   {"RUS", 0.5, true},
      {"SRB", 0.4, true},   {"AUT", 0.3, true},   {"MNE", 0.1, true},   {"BLR", 0.1, true},
      {"CZE", 0.0, true},   {"MAC", 0.0, true},   {"EGY", 0.0, false},  {"TUN", -0.1, false},
      {"KAT", -0.2, false}, {"BRA", -0.3, false}, {"ARG", -0.5, false}, {"JPN", -0.7, false},
      {"KOR", -0.7, false}, {"ALG", -0.8, false}, {"MAR", -1.1, false}, {"ANG", -1.2, false},
      {"KSA", -1.3, false}, {"CHI", -1.4, false}, {"BAH", -1.6, false}, {"AUS", -2.0, false},
  };
  return teams;
}

const Team& team(const std::string& id) {
  for (const auto& t : pool()) {
    if (t.id == id) return t;
  }
  throw std::invalid_argument("unknown team " + id);
}

struct Edition {
  int year;
  std::vector<std::string> hosts;
};

struct Covariates {
  std::string id;
  int year;
  double gdp, population, odds, points, height, age, coach_age, coach_tenure;
  int rank, max_tm, sec_tm, cl, ehf, legion, squad;
  bool host, europe, confed, coach_nat;
  bool height_missing = false;
};

double clamp(double x, double lo, double hi) { return std::min(hi, std::max(lo, x)); }

std::vector<Covariates> make_covariates(const Edition& ed, const std::vector<std::string>& field, Rng& rng) {
  // Tournament-winning odds proportional to exp(2.2 * strength).
  double total = 0.0;
  for (const auto& id : field) total += std::exp(2.2 * team(id).strength);
  std::vector<std::pair<double, std::string>> by_form;
  for (const auto& id : field) by_form.push_back({team(id).strength + 0.3 * rng.normal(), id});
  std::sort(by_form.rbegin(), by_form.rend());
  std::map<std::string, int> rank;
  for (std::size_t i = 0; i < by_form.size(); ++i) rank[by_form[i].second] = static_cast<int>(i) * 2 + 1 + static_cast<int>(rng.below(2));

  const bool host_europe = team(ed.hosts.front()).europe;
  std::vector<Covariates> out;
  for (const auto& id : field) {
    const Team& t = team(id);
    const double s = t.strength;
    Covariates c;
    c.id = id;
    c.year = ed.year;
    c.gdp = std::exp(0.4 * s + 0.5 * rng.normal());
    c.population = std::exp(0.8 * rng.normal());
    c.odds = clamp(std::exp(2.2 * s) / total, 0.001, 0.9);
    c.rank = rank[id];
    c.points = std::max(0.0, 90.0 + 45.0 * s + 12.0 * rng.normal());
    c.max_tm = static_cast<int>(clamp(std::round(4.0 + 1.2 * s + rng.normal()), 1.0, 10.0));
    c.sec_tm = static_cast<int>(clamp(std::round(c.max_tm * 0.6 + 0.6 * rng.normal()), 0.0, c.max_tm));
    c.height = clamp(1.90 + 0.02 * s + 0.01 * rng.normal(), 1.80, 2.00);
    c.age = clamp(27.5 + 0.3 * s + 1.0 * rng.normal(), 24.0, 31.0);
    c.cl = static_cast<int>(clamp(std::round(1.2 * s + 0.8 * rng.normal()), 0.0, 6.0));
    c.ehf = static_cast<int>(clamp(std::round(0.6 * s + 0.8 * rng.normal()), 0.0, 4.0));
    c.legion = static_cast<int>(clamp(std::round(6.0 + 3.0 * s + 2.0 * rng.normal()), 0.0, 16.0));
    c.coach_age = std::round(clamp(52.0 + 6.0 * rng.normal(), 35.0, 70.0));
    c.coach_tenure = std::round(clamp(4.0 + 3.0 * rng.normal(), 0.0, 15.0));
    c.squad = 16;
    c.host = std::find(ed.hosts.begin(), ed.hosts.end(), id) != ed.hosts.end();
    c.europe = t.europe;
    c.confed = t.europe == host_europe;
    c.coach_nat = rng.uniform() < 0.6;
    out.push_back(c);
  }
  return out;
}

struct Match {
  std::string id;
  int year;
  std::string a, b;
  int ga, gb;
  std::string stage;
  double odds_w, odds_d, odds_l;
};

double true_mean(const Covariates& a, const Covariates& b) {
  const double eta = std::log(kBaseGoals) + kStrengthEffect * (team(a.id).strength - team(b.id).strength) +
                     kHostEffect * ((a.host ? 1.0 : 0.0) - (b.host ? 1.0 : 0.0));
  return std::exp(eta);
}

Match play(const Covariates& a, const Covariates& b, const std::string& stage, int year, int number, Rng& rng) {
  const auto da = ScoreDistribution::double_poisson(true_mean(a, b), kPhi);
  const auto db = ScoreDistribution::double_poisson(true_mean(b, a), kPhi);
  Match m;
  std::ostringstream id;
  id << year << '-' << (number < 10 ? "0" : "") << number;
  m.id = id.str();
  m.year = year;
  m.a = a.id;
  m.b = b.id;
  m.ga = da.sample(rng);
  m.gb = db.sample(rng);
  m.stage = stage;
  const auto p = handball::outcome_probs(da, db);
  auto odd = [](double prob) { return std::max(1.01, std::round(100.0 / (std::min(prob, 0.93) * kMargin)) / 100.0); };
  m.odds_w = odd(p.win);
  m.odds_d = odd(p.draw);
  m.odds_l = odd(p.loss);
  return m;
}

std::vector<std::string> pick_field(const Edition& ed, Rng& rng) {
  std::vector<std::string> field = ed.hosts;
  std::vector<std::string> rest;
  for (const auto& t : pool()) {
    if (std::find(field.begin(), field.end(), t.id) == field.end()) rest.push_back(t.id);
  }
  for (std::size_t i = rest.size(); i > 1; --i) std::swap(rest[i - 1], rest[rng.below(i)]);
  // Favour strong teams: keep the 14 strongest non-hosts, fill at random.
  std::stable_sort(rest.begin(), rest.end(),
                   [](const auto& l, const auto& r) { return team(l).strength > team(r).strength; });
  std::vector<std::string> weak(rest.begin() + 14, rest.end());
  for (std::size_t i = weak.size(); i > 1; --i) std::swap(weak[i - 1], weak[rng.below(i)]);
  field.insert(field.end(), rest.begin(), rest.begin() + 14);
  for (std::size_t i = 0; field.size() < 24; ++i) field.push_back(weak[i]);
  return field;
}

std::vector<Match> play_edition(const Edition& ed, const std::vector<Covariates>& covs, Rng& rng) {
  std::map<std::string, const Covariates*> by_id;
  for (const auto& c : covs) by_id[c.id] = &c;
  // Snake seeding into four groups.
  std::vector<std::string> seeded;
  for (const auto& c : covs) seeded.push_back(c.id);
  std::stable_sort(seeded.begin(), seeded.end(), [&](const auto& l, const auto& r) {
    return by_id[l]->odds > by_id[r]->odds;
  });
  std::vector<std::vector<std::string>> groups(4);
  for (std::size_t i = 0; i < seeded.size(); ++i) {
    std::size_t pot = i / 4, slot = i % 4;
    groups[pot % 2 == 0 ? slot : 3 - slot].push_back(seeded[i]);
  }
  std::vector<Match> out;
  int number = 1;
  std::vector<std::string> winners;
  for (const auto& g : groups) {
    std::map<std::string, int> points;
    for (std::size_t i = 0; i < g.size(); ++i) {
      for (std::size_t j = i + 1; j < g.size(); ++j) {
        Match m = play(*by_id[g[i]], *by_id[g[j]], "preliminary", ed.year, number++, rng);
        points[m.a] += m.ga > m.gb ? 2 : m.ga == m.gb ? 1 : 0;
        points[m.b] += m.gb > m.ga ? 2 : m.ga == m.gb ? 1 : 0;
        out.push_back(m);
      }
    }
    winners.push_back(std::max_element(g.begin(), g.end(), [&](const auto& l, const auto& r) {
                        return points[l] < points[r];
                      })[0]);
  }
  auto knockout = [&](const std::string& a, const std::string& b, const std::string& stage) {
    Match m = play(*by_id[a], *by_id[b], stage, ed.year, number++, rng);
    out.push_back(m);
    bool a_wins = m.ga != m.gb ? m.ga > m.gb : rng.coin_flip();
    return a_wins ? std::make_pair(a, b) : std::make_pair(b, a);
  };
  auto sf1 = knockout(winners[0], winners[1], "semifinal");
  auto sf2 = knockout(winners[2], winners[3], "semifinal");
  knockout(sf1.second, sf2.second, "placement");
  knockout(sf1.first, sf2.first, "final");
  return out;
}

std::string yes(bool b) { return b ? "1" : "0"; }

void write(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2 || argc > 3) {
    std::cerr << "usage: handball_synth <output-dir> [seed]\n";
    return 2;
  }
  try {
    const std::filesystem::path dir = argv[1];
    const std::uint64_t seed = argc == 3 ? std::stoull(argv[2]) : 2019;
    std::filesystem::create_directories(dir);
    Rng rng(seed);

    const std::vector<Edition> past = {{2011, {"SWE"}}, {2013, {"ESP"}}, {2015, {"KAT"}}, {2017, {"FRA"}}};
    const auto format = handball::TournamentFormat::ihf2019();

    std::vector<Covariates> all_covs;
    std::vector<Match> all_matches;
    for (const auto& ed : past) {
      auto field = pick_field(ed, rng);
      auto covs = make_covariates(ed, field, rng);
      auto matches = play_edition(ed, covs, rng);
      all_matches.insert(all_matches.end(), matches.begin(), matches.end());
      all_covs.insert(all_covs.end(), covs.begin(), covs.end());
    }
    // One team with an unrecorded covariate: its matches drop out of the design.
    for (auto& c : all_covs) {
      if (c.year == 2013 && c.id == "CHI") c.height_missing = true;
    }
    auto covs2019 = make_covariates({2019, {"GER", "DEN"}}, format.teams(), rng);
    for (auto& c : covs2019) {
      if (c.id == "BAH" || c.id == "SWE") c.squad = 15;
      if (c.id == "KOR") c.squad = 20;
    }
    all_covs.insert(all_covs.end(), covs2019.begin(), covs2019.end());

    std::ostringstream cov;
    cov << "tournament_id,team_id,gdp_ratio,population_ratio,oddset_prob,ihf_rank,ihf_points,host,europe,"
           "same_confed_as_host,max_teammates,sec_max_teammates,avg_age,avg_height,cl_semifinalists,"
           "ehf_cup_semifinalists,legionnaires,coach_age,coach_tenure,coach_same_nationality,squad_size\n";
    for (const auto& c : all_covs) {
      cov << c.year << ',' << c.id << ',' << format_fixed(c.gdp, 4) << ',' << format_fixed(c.population, 4) << ','
          << format_fixed(c.odds, 4) << ',' << c.rank << ',' << format_fixed(c.points, 1) << ',' << yes(c.host) << ','
          << yes(c.europe) << ',' << yes(c.confed) << ',' << c.max_tm << ',' << c.sec_tm << ','
          << format_fixed(c.age, 2) << ',' << (c.height_missing ? std::string("NA") : format_fixed(c.height, 3))
          << ',' << c.cl << ',' << c.ehf << ',' << c.legion << ',' << format_fixed(c.coach_age, 0) << ','
          << format_fixed(c.coach_tenure, 0) << ',' << yes(c.coach_nat) << ',' << c.squad << '\n';
    }
    std::ostringstream res, odds;
    res << "match_id,tournament_id,team_a,team_b,goals_a,goals_b,stage\n";
    odds << "match_id,odds_win,odds_draw,odds_loss\n";
    for (const auto& m : all_matches) {
      res << m.id << ',' << m.year << ',' << m.a << ',' << m.b << ',' << m.ga << ',' << m.gb << ',' << m.stage << '\n';
      odds << m.id << ',' << format_fixed(m.odds_w, 2) << ',' << format_fixed(m.odds_d, 2) << ','
           << format_fixed(m.odds_l, 2) << '\n';
    }
    write(dir / "covariates.csv", cov.str());
    write(dir / "matches.csv", res.str());
    write(dir / "odds.csv", odds.str());
    write(dir / "format.json", format.to_json());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
