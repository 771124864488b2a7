#include "handball/format.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace handball {

using nlohmann::json;

SlotRef SlotRef::parse(const std::string& text) {
  auto colon = text.find(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == text.size()) {
    throw std::invalid_argument("bad slot reference '" + text + "'");
  }
  std::string head = text.substr(0, colon);
  std::string tail = text.substr(colon + 1);
  SlotRef ref;
  if (head == "winner" || head == "loser") {
    ref.kind = head == "winner" ? Kind::winner : Kind::loser;
    ref.source = tail;
    return ref;
  }
  ref.kind = Kind::group_position;
  ref.source = head;
  try {
    std::size_t used = 0;
    long pos = std::stol(tail, &used);
    if (used != tail.size() || pos < 1) throw std::invalid_argument("position");
    ref.position = static_cast<std::size_t>(pos);
  } catch (const std::exception&) {
    throw std::invalid_argument("bad group position in slot reference '" + text + "'");
  }
  return ref;
}

std::string SlotRef::to_string() const {
  switch (kind) {
    case Kind::winner: return "winner:" + source;
    case Kind::loser: return "loser:" + source;
    case Kind::group_position: return source + ":" + std::to_string(position);
  }
  return {};
}

std::vector<std::string> TournamentFormat::teams() const {
  std::vector<std::string> out;
  for (const auto& g : groups) out.insert(out.end(), g.teams.begin(), g.teams.end());
  return out;
}

int TournamentFormat::decided_ranks() const {
  int count = 0;
  for (const auto& k : knockout) count += (k.winner_rank ? 1 : 0) + (k.loser_rank ? 1 : 0);
  for (const auto& p : position_ranks) count += static_cast<int>(p.ranks.size());
  return count;
}

void TournamentFormat::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument("tournament format: " + what); };
  if (groups.empty()) fail("no preliminary groups");

  std::map<std::string, std::size_t> group_size;
  std::set<std::string> seen_teams;
  for (const auto& g : groups) {
    if (g.name.empty()) fail("group without a name");
    if (!group_size.emplace(g.name, g.teams.size()).second) fail("duplicate group '" + g.name + "'");
    if (g.teams.size() < 2) fail("group '" + g.name + "' has fewer than two teams");
    for (const auto& t : g.teams) {
      if (!seen_teams.insert(t).second) fail("team '" + t + "' appears twice");
    }
  }

  std::map<std::string, std::size_t> main_size;
  if (!main_groups.empty()) {
    if (advance_per_group < 1) fail("advance_per_group must be at least 1");
    std::set<std::string> used;
    for (const auto& g : groups) {
      if (g.teams.size() < advance_per_group) fail("group '" + g.name + "' is smaller than advance_per_group");
    }
    for (const auto& m : main_groups) {
      if (group_size.count(m.name)) fail("main group '" + m.name + "' reuses a preliminary group name");
      if (m.from.empty()) fail("main group '" + m.name + "' has no source groups");
      for (const auto& f : m.from) {
        if (!group_size.count(f)) fail("main group '" + m.name + "' references unknown group '" + f + "'");
        if (!used.insert(f).second) fail("group '" + f + "' feeds two main groups");
      }
      if (!main_size.emplace(m.name, advance_per_group * m.from.size()).second) {
        fail("duplicate main group '" + m.name + "'");
      }
    }
  }
  auto size_of = [&](const std::string& name) -> std::optional<std::size_t> {
    if (auto it = main_size.find(name); it != main_size.end()) return it->second;
    if (auto it = group_size.find(name); it != group_size.end()) return it->second;
    return std::nullopt;
  };

  std::set<std::string> earlier;
  std::vector<int> ranks;
  for (const auto& k : knockout) {
    if (k.name.empty()) fail("knockout match without a name");
    for (const SlotRef* ref : {&k.home, &k.away}) {
      if (ref->kind == SlotRef::Kind::group_position) {
        auto size = size_of(ref->source);
        if (!size) fail("match '" + k.name + "' references unknown group '" + ref->source + "'");
        if (ref->position < 1 || ref->position > *size) fail("match '" + k.name + "' references a missing position");
      } else if (!earlier.count(ref->source)) {
        fail("match '" + k.name + "' references '" + ref->source + "' before it is played");
      }
    }
    if (!earlier.insert(k.name).second) fail("duplicate knockout match '" + k.name + "'");
    if (k.winner_rank) ranks.push_back(*k.winner_rank);
    if (k.loser_rank) ranks.push_back(*k.loser_rank);
  }
  for (const auto& p : position_ranks) {
    if (p.groups.size() != p.ranks.size()) fail("position_ranks needs one rank per group");
    for (const auto& g : p.groups) {
      auto size = size_of(g);
      if (!size) fail("position_ranks references unknown group '" + g + "'");
      if (p.position < 1 || p.position > *size) fail("position_ranks references a missing position");
    }
    ranks.insert(ranks.end(), p.ranks.begin(), p.ranks.end());
  }
  std::sort(ranks.begin(), ranks.end());
  for (std::size_t i = 0; i < ranks.size(); ++i) {
    if (ranks[i] != static_cast<int>(i) + 1) fail("decided ranks must be exactly 1..N without repeats");
  }
}

TournamentFormat TournamentFormat::from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("format.json: ") + e.what());
  }
  TournamentFormat f;
  try {
    f.name = doc.value("name", "");
    f.tournament_id = doc.at("tournament_id").get<int>();
    for (const auto& g : doc.at("preliminary_groups")) {
      f.groups.push_back({g.at("name").get<std::string>(), g.at("teams").get<std::vector<std::string>>()});
    }
    f.advance_per_group = doc.value("advance_per_group", std::size_t{3});
    if (doc.contains("main_groups")) {
      for (const auto& m : doc.at("main_groups")) {
        f.main_groups.push_back({m.at("name").get<std::string>(), m.at("from").get<std::vector<std::string>>()});
      }
    }
    std::string carry = doc.value("carry_over", "results_among_qualifiers");
    if (carry == "results_among_qualifiers") {
      f.carry_over = true;
    } else if (carry == "none") {
      f.carry_over = false;
    } else {
      throw std::invalid_argument("format.json: unknown carry_over rule '" + carry + "'");
    }
    if (doc.contains("knockout")) {
      for (const auto& k : doc.at("knockout")) {
        KnockoutMatch m;
        m.name = k.at("name").get<std::string>();
        m.home = SlotRef::parse(k.at("home").get<std::string>());
        m.away = SlotRef::parse(k.at("away").get<std::string>());
        m.stage = parse_stage(k.value("stage", "semifinal"));
        if (k.contains("winner_rank")) m.winner_rank = k.at("winner_rank").get<int>();
        if (k.contains("loser_rank")) m.loser_rank = k.at("loser_rank").get<int>();
        f.knockout.push_back(std::move(m));
      }
    }
    if (doc.contains("position_ranks")) {
      for (const auto& p : doc.at("position_ranks")) {
        f.position_ranks.push_back({p.at("position").get<std::size_t>(), p.at("groups").get<std::vector<std::string>>(),
                                    p.at("ranks").get<std::vector<int>>()});
      }
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("format.json: ") + e.what());
  }
  f.validate();
  return f;
}

TournamentFormat TournamentFormat::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open format file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return from_json(buffer.str());
}

std::string TournamentFormat::to_json() const {
  json doc;
  doc["name"] = name;
  doc["tournament_id"] = tournament_id;
  doc["preliminary_groups"] = json::array();
  for (const auto& g : groups) doc["preliminary_groups"].push_back({{"name", g.name}, {"teams", g.teams}});
  doc["advance_per_group"] = advance_per_group;
  doc["main_groups"] = json::array();
  for (const auto& m : main_groups) doc["main_groups"].push_back({{"name", m.name}, {"from", m.from}});
  doc["carry_over"] = carry_over ? "results_among_qualifiers" : "none";
  doc["knockout"] = json::array();
  for (const auto& k : knockout) {
    json m = {{"name", k.name},
              {"home", k.home.to_string()},
              {"away", k.away.to_string()},
              {"stage", std::string(handball::to_string(k.stage))}};
    if (k.winner_rank) m["winner_rank"] = *k.winner_rank;
    if (k.loser_rank) m["loser_rank"] = *k.loser_rank;
    doc["knockout"].push_back(std::move(m));
  }
  doc["position_ranks"] = json::array();
  for (const auto& p : position_ranks) {
    doc["position_ranks"].push_back({{"position", p.position}, {"groups", p.groups}, {"ranks", p.ranks}});
  }
  return doc.dump(2) + "\n";
}

TournamentFormat TournamentFormat::ihf2019() {
  TournamentFormat f;
  f.name = "IHF World Men's Handball Championship 2019";
  f.tournament_id = 2019;
  f.groups = {
      {"A", {"FRA", "GER", "RUS", "SRB", "BRA", "KOR"}},
      {"B", {"ESP", "CRO", "ICE", "MAC", "JPN", "BAH"}},
      {"C", {"DEN", "NOR", "AUT", "TUN", "KSA", "CHI"}},
      {"D", {"HUN", "SWE", "EGY", "ARG", "KAT", "ANG"}},
  };
  f.advance_per_group = 3;
  f.main_groups = {{"I", {"A", "B"}}, {"II", {"C", "D"}}};
  f.carry_over = true;
  f.knockout = {
      {"SF1", SlotRef::parse("I:1"), SlotRef::parse("II:2"), Stage::semifinal, std::nullopt, std::nullopt},
      {"SF2", SlotRef::parse("II:1"), SlotRef::parse("I:2"), Stage::semifinal, std::nullopt, std::nullopt},
      {"Bronze", SlotRef::parse("loser:SF1"), SlotRef::parse("loser:SF2"), Stage::placement, 3, 4},
      {"Final", SlotRef::parse("winner:SF1"), SlotRef::parse("winner:SF2"), Stage::final, 1, 2},
  };
  f.position_ranks = {{3, {"I", "II"}, {5, 6}}, {4, {"I", "II"}, {7, 8}}};
  return f;
}

}  // namespace handball
