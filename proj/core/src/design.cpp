#include "handball/design.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "handball/csv.hpp"

namespace handball {

namespace {

using MetricGetter = double (*)(const TeamCovariates&);

constexpr std::array<MetricGetter, kMetricCount> kMetrics = {
    [](const TeamCovariates& c) { return c.gdp_ratio; },
    [](const TeamCovariates& c) { return c.population_ratio; },
    [](const TeamCovariates& c) { return c.oddset_prob; },
    [](const TeamCovariates& c) { return static_cast<double>(c.ihf_rank); },
    [](const TeamCovariates& c) { return c.ihf_points; },
    [](const TeamCovariates& c) { return c.max_teammates; },
    [](const TeamCovariates& c) { return c.sec_max_teammates; },
    [](const TeamCovariates& c) { return c.age_deviation; },
    [](const TeamCovariates& c) { return c.avg_height; },
    [](const TeamCovariates& c) { return c.cl_semifinalists; },
    [](const TeamCovariates& c) { return c.ehf_cup_semifinalists; },
    [](const TeamCovariates& c) { return c.legionnaires; },
    [](const TeamCovariates& c) { return c.coach_age; },
    [](const TeamCovariates& c) { return c.coach_tenure; },
};

std::vector<double> dummies(const TeamCovariates& c) {
  return {c.host ? 1.0 : 0.0, c.europe ? 1.0 : 0.0, c.same_confed_as_host ? 1.0 : 0.0,
          c.coach_same_nationality ? 1.0 : 0.0};
}

DesignRow make_row(const TeamCovariates& own, const TeamCovariates& oppo, int goals) {
  DesignRow row;
  row.response_goals = goals;
  row.team = own.team_id;
  row.opponent = oppo.team_id;
  row.tournament_id = own.tournament_id;
  row.metric_diffs.resize(kMetricCount);
  for (std::size_t k = 0; k < kMetricCount; ++k) row.metric_diffs[k] = kMetrics[k](own) - kMetrics[k](oppo);
  row.own_dummies = dummies(own);
  row.oppo_dummies = dummies(oppo);
  return row;
}

bool is_missing(const std::string& s) { return s.empty() || s == "NA" || s == "na" || s == "NaN"; }

}  // namespace

std::string_view to_string(Stage stage) {
  switch (stage) {
    case Stage::preliminary: return "preliminary";
    case Stage::main: return "main";
    case Stage::semifinal: return "semifinal";
    case Stage::final: return "final";
    case Stage::placement: return "placement";
  }
  return "preliminary";
}

Stage parse_stage(std::string_view text) {
  if (text == "preliminary") return Stage::preliminary;
  if (text == "main") return Stage::main;
  if (text == "semifinal") return Stage::semifinal;
  if (text == "final") return Stage::final;
  if (text == "placement") return Stage::placement;
  throw std::invalid_argument("unknown stage '" + std::string(text) + "'");
}

const std::array<std::string, kFeatureCount>& feature_names() {
  static const std::array<std::string, kFeatureCount> names = {
      "GDP",          "Population",     "Odds",       "Rank",        "ihf.points",       "max.teammates",
      "sec.max.teammates", "Age",       "Height",     "CL.final4",   "EHF.final4",       "Legionnaires",
      "Trainer.age",  "Trainer.tenure", "Host",       "Continent",   "Confed",           "Trainer.nat",
      "Host.oppo",    "Continent.oppo", "Confed.oppo", "Trainer.nat.oppo"};
  return names;
}

double DesignRow::feature(std::size_t j) const {
  if (j < kMetricCount) return metric_diffs[j];
  if (j < kMetricCount + kDummyCount) return own_dummies[j - kMetricCount];
  return oppo_dummies.at(j - kMetricCount - kDummyCount);
}

std::vector<double> DesignRow::features() const {
  std::vector<double> out;
  out.reserve(kFeatureCount);
  out.insert(out.end(), metric_diffs.begin(), metric_diffs.end());
  out.insert(out.end(), own_dummies.begin(), own_dummies.end());
  out.insert(out.end(), oppo_dummies.begin(), oppo_dummies.end());
  return out;
}

void validate(const TeamCovariates& c) {
  auto fail = [&](const std::string& what) {
    throw std::invalid_argument(c.team_id + " (" + std::to_string(c.tournament_id) + "): " + what);
  };
  auto has = [&](std::string_view field) {
    return std::find(c.missing.begin(), c.missing.end(), field) == c.missing.end();
  };
  if (c.team_id.empty()) fail("empty team id");
  if (has("oddset_prob") && !(c.oddset_prob > 0.0 && c.oddset_prob < 1.0)) fail("oddset_prob outside (0,1)");
  if (has("ihf_rank") && c.ihf_rank < 1) fail("ihf_rank must be >= 1");
  if (has("ihf_points") && c.ihf_points < 0.0) fail("ihf_points must be non-negative");
  if (has("avg_height") && !(c.avg_height > 1.5 && c.avg_height < 2.3)) fail("avg_height outside (1.5, 2.3)");
  if (has("age_deviation") && c.age_deviation < 0.0) fail("age_deviation must be non-negative");
  for (double v : {c.max_teammates, c.sec_max_teammates, c.cl_semifinalists, c.ehf_cup_semifinalists,
                   c.legionnaires}) {
    if (v < 0.0) fail("squad-count covariates must be non-negative");
  }
  if (c.squad_size != 15 && c.squad_size != 16 && c.squad_size != 20) fail("squad_size must be 15, 16 or 20");
}

TeamCovariates normalize_squad_counts(TeamCovariates cov) {
  switch (cov.squad_size) {
    case 15: {
      constexpr double factor = 16.0 / 15.0;
      cov.max_teammates *= factor;
      cov.sec_max_teammates *= factor;
      cov.cl_semifinalists *= factor;
      cov.ehf_cup_semifinalists *= factor;
      cov.legionnaires *= factor;
      return cov;
    }
    case 16:
    case 20:
      return cov;
    default:
      throw std::invalid_argument("unsupported squad size " + std::to_string(cov.squad_size) + " for " +
                                  cov.team_id);
  }
}

std::optional<double> resolve_age_deviation(std::vector<TeamCovariates>& covs,
                                            std::span<const int> training_tournaments) {
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& c : covs) {
    if (!c.avg_age) continue;
    if (std::find(training_tournaments.begin(), training_tournaments.end(), c.tournament_id) ==
        training_tournaments.end())
      continue;
    sum += *c.avg_age;
    ++count;
  }
  if (count == 0) return std::nullopt;
  double ideal = sum / static_cast<double>(count);
  apply_ideal_age(covs, ideal);
  return ideal;
}

void apply_ideal_age(std::vector<TeamCovariates>& covs, double ideal_age) {
  for (auto& c : covs) {
    if (!c.avg_age) continue;
    c.age_deviation = std::abs(*c.avg_age - ideal_age);
    std::erase(c.missing, "age_deviation");
  }
}

CovariateTable::CovariateTable(std::span<const TeamCovariates> covs) {
  for (const auto& c : covs) {
    auto key = std::make_pair(c.tournament_id, c.team_id);
    if (table_.count(key)) {
      throw std::invalid_argument("duplicate covariates for " + c.team_id + " in " +
                                  std::to_string(c.tournament_id));
    }
    table_.emplace(std::move(key), normalize_squad_counts(c));
  }
}

const TeamCovariates* CovariateTable::find(int tournament_id, std::string_view team) const {
  auto it = table_.find(std::make_pair(tournament_id, std::string(team)));
  return it == table_.end() ? nullptr : &it->second;
}

std::pair<DesignRow, DesignRow> design_pair(const TeamCovariates& a, const TeamCovariates& b, int goals_a,
                                            int goals_b) {
  return {make_row(a, b, goals_a), make_row(b, a, goals_b)};
}

DesignResult build_design(std::span<const TeamCovariates> covs, std::span<const MatchRecord> matches) {
  CovariateTable table(covs);

  std::vector<std::size_t> order(matches.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) {
    return matches[l].tournament_id < matches[r].tournament_id;
  });

  DesignResult result;
  result.rows.reserve(2 * matches.size());
  std::size_t match_index = 0;
  for (std::size_t idx : order) {
    const MatchRecord& m = matches[idx];
    auto exclude = [&](std::string reason) {
      result.excluded.push_back({m.match_id, m.tournament_id, m.team_a, m.team_b, std::move(reason)});
    };
    const TeamCovariates* a = table.find(m.tournament_id, m.team_a);
    const TeamCovariates* b = table.find(m.tournament_id, m.team_b);
    if (!a || !b) {
      exclude("no covariates for " + (!a ? m.team_a : m.team_b));
      continue;
    }
    if (!a->complete() || !b->complete()) {
      const TeamCovariates* bad = !a->complete() ? a : b;
      exclude("missing covariate '" + bad->missing.front() + "' for " + bad->team_id);
      continue;
    }
    auto [row_a, row_b] = design_pair(*a, *b, m.goals_a, m.goals_b);
    row_a.match_id = row_b.match_id = m.match_id;
    row_a.match_index = row_b.match_index = match_index++;
    result.rows.push_back(std::move(row_a));
    result.rows.push_back(std::move(row_b));
  }
  return result;
}

DesignRow ScalingInfo::apply(const DesignRow& row) const {
  DesignRow out = row;
  for (std::size_t k = 0; k < kMetricCount; ++k) out.metric_diffs[k] = (row.metric_diffs[k] - center[k]) / scale[k];
  for (std::size_t k = 0; k < kDummyCount; ++k) {
    std::size_t own = kMetricCount + k;
    std::size_t oppo = own + kDummyCount;
    out.own_dummies[k] = (row.own_dummies[k] - center[own]) / scale[own];
    out.oppo_dummies[k] = (row.oppo_dummies[k] - center[oppo]) / scale[oppo];
  }
  return out;
}

std::vector<DesignRow> ScalingInfo::apply(std::span<const DesignRow> rows) const {
  std::vector<DesignRow> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(apply(r));
  return out;
}

std::pair<std::vector<DesignRow>, ScalingInfo> standardize(std::span<const DesignRow> rows) {
  if (rows.size() < 2) throw std::invalid_argument("standardize needs at least two rows");
  const double n = static_cast<double>(rows.size());
  ScalingInfo info;
  info.center.assign(kFeatureCount, 0.0);
  info.scale.assign(kFeatureCount, 1.0);
  info.flagged.assign(kFeatureCount, false);

  for (std::size_t j = 0; j < kFeatureCount; ++j) {
    double mean = 0.0;
    if (j >= kMetricCount) {
      for (const auto& r : rows) mean += r.feature(j);
      mean /= n;
    }
    double ss = 0.0;
    for (const auto& r : rows) {
      double d = r.feature(j) - mean;
      ss += d * d;
    }
    double sd = std::sqrt(ss / n);
    if (sd < 1e-12) {
      info.flagged[j] = true;
    } else {
      info.scale[j] = sd;
    }
  }
  return {info.apply(rows), std::move(info)};
}

// CSV ingestion ------------------------------------------------------------

std::vector<TeamCovariates> read_covariates(const CsvTable& table) {
  const std::size_t c_tournament = table.require_column("tournament_id");
  const std::size_t c_team = table.require_column("team_id");
  const auto c_age_dev = table.column("age_deviation");
  const auto c_avg_age = table.column("avg_age");
  if (!c_age_dev && !c_avg_age) {
    throw ParseError(table.source(), 0, "missing column 'age_deviation' (or 'avg_age')");
  }

  struct NumField {
    const char* name;
    double TeamCovariates::*member;
  };
  static constexpr NumField kNumeric[] = {
      {"gdp_ratio", &TeamCovariates::gdp_ratio},
      {"population_ratio", &TeamCovariates::population_ratio},
      {"oddset_prob", &TeamCovariates::oddset_prob},
      {"ihf_points", &TeamCovariates::ihf_points},
      {"max_teammates", &TeamCovariates::max_teammates},
      {"sec_max_teammates", &TeamCovariates::sec_max_teammates},
      {"avg_height", &TeamCovariates::avg_height},
      {"cl_semifinalists", &TeamCovariates::cl_semifinalists},
      {"ehf_cup_semifinalists", &TeamCovariates::ehf_cup_semifinalists},
      {"legionnaires", &TeamCovariates::legionnaires},
      {"coach_age", &TeamCovariates::coach_age},
      {"coach_tenure", &TeamCovariates::coach_tenure},
  };
  struct BoolField {
    const char* name;
    bool TeamCovariates::*member;
  };
  static constexpr BoolField kBoolean[] = {
      {"host", &TeamCovariates::host},
      {"europe", &TeamCovariates::europe},
      {"same_confed_as_host", &TeamCovariates::same_confed_as_host},
      {"coach_same_nationality", &TeamCovariates::coach_same_nationality},
  };

  std::vector<std::size_t> num_cols, bool_cols;
  for (const auto& f : kNumeric) num_cols.push_back(table.require_column(f.name));
  for (const auto& f : kBoolean) bool_cols.push_back(table.require_column(f.name));
  const std::size_t c_rank = table.require_column("ihf_rank");
  const std::size_t c_squad = table.require_column("squad_size");

  std::vector<TeamCovariates> out;
  out.reserve(table.rows().size());
  for (const auto& row : table.rows()) {
    TeamCovariates c;
    c.tournament_id = static_cast<int>(table.integer(row, c_tournament));
    c.team_id = table.text(row, c_team);
    for (std::size_t i = 0; i < std::size(kNumeric); ++i) {
      if (is_missing(table.text(row, num_cols[i]))) {
        c.missing.emplace_back(kNumeric[i].name);
      } else {
        c.*(kNumeric[i].member) = table.number(row, num_cols[i]);
      }
    }
    for (std::size_t i = 0; i < std::size(kBoolean); ++i) {
      if (is_missing(table.text(row, bool_cols[i]))) {
        c.missing.emplace_back(kBoolean[i].name);
      } else {
        c.*(kBoolean[i].member) = table.boolean(row, bool_cols[i]);
      }
    }
    if (is_missing(table.text(row, c_rank))) {
      c.missing.emplace_back("ihf_rank");
    } else {
      c.ihf_rank = static_cast<int>(table.integer(row, c_rank));
    }
    c.squad_size = static_cast<int>(table.integer(row, c_squad));

    bool have_dev = c_age_dev && !is_missing(table.text(row, *c_age_dev));
    if (have_dev) c.age_deviation = table.number(row, *c_age_dev);
    if (c_avg_age && !is_missing(table.text(row, *c_avg_age))) c.avg_age = table.number(row, *c_avg_age);
    // A supplied avg_age is turned into a deviation later by apply_ideal_age.
    if (!have_dev) c.missing.emplace_back("age_deviation");

    try {
      validate(c);
    } catch (const std::invalid_argument& e) {
      throw ParseError(table.source(), row.line, e.what());
    }
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<TeamCovariates> read_covariates_file(const std::string& path) {
  return read_covariates(CsvTable::read_file(path));
}

std::vector<MatchRecord> read_matches(const CsvTable& table) {
  const auto c_id = table.column("match_id");
  const std::size_t c_tournament = table.require_column("tournament_id");
  const std::size_t c_a = table.require_column("team_a");
  const std::size_t c_b = table.require_column("team_b");
  const std::size_t c_ga = table.require_column("goals_a");
  const std::size_t c_gb = table.require_column("goals_b");
  const auto c_stage = table.column("stage");

  std::vector<MatchRecord> out;
  out.reserve(table.rows().size());
  std::size_t ordinal = 0;
  for (const auto& row : table.rows()) {
    ++ordinal;
    MatchRecord m;
    m.match_id = c_id ? table.text(row, *c_id) : std::to_string(ordinal);
    m.tournament_id = static_cast<int>(table.integer(row, c_tournament));
    m.team_a = table.text(row, c_a);
    m.team_b = table.text(row, c_b);
    m.goals_a = static_cast<int>(table.integer(row, c_ga));
    m.goals_b = static_cast<int>(table.integer(row, c_gb));
    if (c_stage) {
      try {
        m.stage = parse_stage(table.text(row, *c_stage));
      } catch (const std::invalid_argument& e) {
        throw ParseError(table.source(), row.line, e.what());
      }
    }
    if (m.team_a == m.team_b) throw ParseError(table.source(), row.line, "team plays itself: " + m.team_a);
    if (m.goals_a < 0 || m.goals_b < 0) throw ParseError(table.source(), row.line, "negative goals");
    out.push_back(std::move(m));
  }
  return out;
}

std::vector<MatchRecord> read_matches_file(const std::string& path) {
  return read_matches(CsvTable::read_file(path));
}

}  // namespace handball
