#include "handball/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "handball/csv.hpp"
#include "handball/parallel.hpp"
#include "handball/rng.hpp"

namespace handball {

std::string_view to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::win: return "win";
    case Outcome::draw: return "draw";
    case Outcome::loss: return "loss";
  }
  return "win";
}

double multinomial_likelihood(const OutcomeProbs& probs, Outcome outcome) { return probs[outcome]; }

Outcome predicted_outcome(const OutcomeProbs& probs) {
  if (probs.win >= probs.draw && probs.win >= probs.loss) return Outcome::win;
  if (probs.draw >= probs.loss) return Outcome::draw;
  return Outcome::loss;
}

int classification_indicator(const OutcomeProbs& probs, Outcome outcome) {
  return predicted_outcome(probs) == outcome ? 1 : 0;
}

double rps(const OutcomeProbs& probs, Outcome outcome) {
  const double o1 = outcome == Outcome::win ? 1.0 : 0.0;
  const double o2 = outcome != Outcome::loss ? 1.0 : 0.0;
  const double c1 = probs.win - o1;
  const double c2 = probs.win + probs.draw - o2;
  return 0.5 * (c1 * c1 + c2 * c2);
}

GoalErrors squared_goal_errors(double expected_a, double expected_b, int goals_a, int goals_b) {
  const double ea = goals_a - expected_a;
  const double eb = goals_b - expected_b;
  const double ed = (goals_a - goals_b) - (expected_a - expected_b);
  return {0.5 * (ea * ea + eb * eb), ed * ed};
}

OutcomeProbs odds_to_probs(double odds_win, double odds_draw, double odds_loss) {
  if (!(odds_win > 1.0) || !(odds_draw > 1.0) || !(odds_loss > 1.0)) {
    throw std::invalid_argument("three-way odds must all exceed 1");
  }
  const double w = 1.0 / odds_win, d = 1.0 / odds_draw, l = 1.0 / odds_loss;
  const double c = w + d + l;
  return {w / c, d / c, l / c};
}

std::vector<OddsRecord> read_odds(const CsvTable& table) {
  const std::size_t c_id = table.require_column("match_id");
  const std::size_t c_w = table.require_column("odds_win");
  const std::size_t c_d = table.require_column("odds_draw");
  const std::size_t c_l = table.require_column("odds_loss");
  std::vector<OddsRecord> out;
  for (const auto& row : table.rows()) {
    OddsRecord r{table.text(row, c_id), table.number(row, c_w), table.number(row, c_d), table.number(row, c_l)};
    if (!(r.win > 1.0) || !(r.draw > 1.0) || !(r.loss > 1.0)) {
      throw ParseError(table.source(), row.line, "odds must exceed 1");
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<OddsRecord> read_odds_file(const std::string& path) { return read_odds(CsvTable::read_file(path)); }

std::uint64_t fingerprint(std::span<const std::string> items) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& s : items) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
    h = (h ^ 0xffU) * 0x100000001b3ULL;  // item separator
  }
  return h;
}

namespace {

constexpr const char* kOddsLabel = "Odds";

struct SplitOutput {
  SplitAudit audit;
  /// predictions[method] in test-design order
  std::vector<std::vector<MatchPrediction>> predictions;
  std::vector<bool> failed;
  std::vector<std::string> warnings;
};

SplitOutput run_split(std::span<const TeamCovariates> all_covs, std::span<const MatchRecord> matches,
                      std::span<const Method> methods, int held_out, std::span<const int> tournaments,
                      const EvaluationOptions& options) {
  SplitOutput out;
  out.audit.held_out = held_out;
  out.predictions.resize(methods.size());
  out.failed.assign(methods.size(), false);

  std::vector<int> training;
  for (int t : tournaments) {
    if (t != held_out) training.push_back(t);
  }
  std::vector<TeamCovariates> covs(all_covs.begin(), all_covs.end());
  resolve_age_deviation(covs, training);

  std::vector<MatchRecord> train_matches, test_matches;
  for (const auto& m : matches) (m.tournament_id == held_out ? test_matches : train_matches).push_back(m);

  DesignResult train = build_design(covs, train_matches);
  DesignResult test = build_design(covs, test_matches);

  std::set<int> seen;
  for (const auto& r : train.rows) {
    seen.insert(r.tournament_id);
    if (out.audit.training_match_ids.empty() || out.audit.training_match_ids.back() != r.match_id) {
      out.audit.training_match_ids.push_back(r.match_id);
    }
  }
  out.audit.training_tournaments.assign(seen.begin(), seen.end());
  for (std::size_t i = 0; i < test.rows.size(); i += 2) out.audit.test_match_ids.push_back(test.rows[i].match_id);
  std::vector<std::string> sorted_ids = out.audit.training_match_ids;
  std::sort(sorted_ids.begin(), sorted_ids.end());
  out.audit.fingerprint = fingerprint(sorted_ids);

  FitOptions fit_options = options.fit;
  fit_options.cv.seed = derive_seed(options.fit.cv.seed, static_cast<std::uint64_t>(held_out));
  fit_options.cv.threads = 1;

  // One regression per family; both penalty rules and the two Poisson
  // variants share it.
  std::map<FamilyKind, std::optional<ModelFit>> fits;
  for (const auto& method : methods) {
    Family family = regression_family(method.family);
    if (fits.count(family.kind)) continue;
    try {
      fits[family.kind] = fit_model(train.rows, family, fit_options);
    } catch (const std::exception& e) {
      fits[family.kind] = std::nullopt;
      out.warnings.push_back("held-out " + std::to_string(held_out) + ": " + std::string(to_string(family.kind)) +
                             " fit failed: " + e.what());
    }
  }

  std::map<std::string, const MatchRecord*> by_id;
  for (const auto& m : test_matches) by_id[m.match_id] = &m;

  for (std::size_t k = 0; k < methods.size(); ++k) {
    const Method& method = methods[k];
    const auto& fit = fits[regression_family(method.family).kind];
    if (!fit) {
      out.failed[k] = true;
      continue;
    }
    try {
      ScoreModel model = make_score_model(fit->select(method.rule), method.family, train.rows);
      for (std::size_t i = 0; i + 1 < test.rows.size(); i += 2) {
        const DesignRow& ra = test.rows[i];
        const DesignRow& rb = test.rows[i + 1];
        const MatchRecord& m = *by_id.at(ra.match_id);
        MatchPrediction p;
        p.method = method.label();
        p.match_id = m.match_id;
        p.tournament_id = m.tournament_id;
        p.team_a = m.team_a;
        p.team_b = m.team_b;
        p.goals_a = m.goals_a;
        p.goals_b = m.goals_b;
        const double ma = model.expected_goals(ra);
        const double mb = model.expected_goals(rb);
        p.expected_a = ma;
        p.expected_b = mb;
        p.probs = outcome_probs(model.distribution(ma), model.distribution(mb));
        out.predictions[k].push_back(std::move(p));
      }
    } catch (const std::exception& e) {
      out.failed[k] = true;
      out.predictions[k].clear();
      out.warnings.push_back("held-out " + std::to_string(held_out) + ": " + method.label() + " failed: " + e.what());
    }
  }
  return out;
}

MethodSummary summarize(const std::string& label, std::span<const MatchPrediction> preds, std::size_t failed,
                        std::size_t& ties) {
  MethodSummary s;
  s.label = label;
  s.failed_splits = failed;
  s.matches = preds.size();
  if (preds.empty()) return s;
  double goals = 0.0, diff = 0.0;
  bool have_goals = true;
  for (const auto& p : preds) {
    Outcome o = outcome_of(p.goals_a, p.goals_b);
    s.likelihood += multinomial_likelihood(p.probs, o);
    s.classification_rate += classification_indicator(p.probs, o);
    s.rps += rps(p.probs, o);
    const double top = std::max({p.probs.win, p.probs.draw, p.probs.loss});
    if ((p.probs.win == top) + (p.probs.draw == top) + (p.probs.loss == top) > 1) ++ties;
    if (p.expected_a && p.expected_b) {
      GoalErrors e = squared_goal_errors(*p.expected_a, *p.expected_b, p.goals_a, p.goals_b);
      goals += e.goals;
      diff += e.goal_difference;
    } else {
      have_goals = false;
    }
  }
  const double n = static_cast<double>(preds.size());
  s.likelihood /= n;
  s.classification_rate /= n;
  s.rps /= n;
  if (have_goals) {
    s.goals = goals / n;
    s.goal_difference = diff / n;
  }
  return s;
}

}  // namespace

EvaluationReport leave_one_tournament_out(std::span<const TeamCovariates> covs, std::span<const MatchRecord> matches,
                                          std::span<const Method> methods, std::span<const OddsRecord> odds,
                                          const EvaluationOptions& options) {
  std::set<int> distinct;
  for (const auto& m : matches) distinct.insert(m.tournament_id);
  if (distinct.size() < 2) {
    throw std::invalid_argument("leave-one-tournament-out needs at least two tournaments, found " +
                                std::to_string(distinct.size()));
  }
  const std::vector<int> tournaments(distinct.begin(), distinct.end());

  std::vector<SplitOutput> splits(tournaments.size());
  parallel_for(tournaments.size(), options.threads, [&](std::size_t s) {
    splits[s] = run_split(covs, matches, methods, tournaments[s], tournaments, options);
  });

  EvaluationReport report;
  std::vector<std::vector<MatchPrediction>> per_method(methods.size());
  std::vector<std::size_t> failed(methods.size(), 0);
  for (auto& split : splits) {
    for (std::size_t k = 0; k < methods.size(); ++k) {
      failed[k] += split.failed[k] ? 1 : 0;
      for (auto& p : split.predictions[k]) per_method[k].push_back(std::move(p));
    }
    for (auto& w : split.warnings) report.warnings.push_back(std::move(w));
    report.splits.push_back(std::move(split.audit));
  }

  std::vector<MatchPrediction> odds_preds;
  if (!odds.empty()) {
    std::map<std::string, const OddsRecord*> by_id;
    for (const auto& o : odds) by_id[o.match_id] = &o;
    std::map<std::string, const MatchRecord*> match_by_id;
    for (const auto& m : matches) match_by_id[m.match_id] = &m;
    std::size_t missing = 0;
    for (const auto& split : report.splits) {
      for (const auto& id : split.test_match_ids) {
        auto it = by_id.find(id);
        if (it == by_id.end()) {
          ++missing;
          continue;
        }
        const MatchRecord& m = *match_by_id.at(id);
        MatchPrediction p;
        p.method = kOddsLabel;
        p.match_id = id;
        p.tournament_id = m.tournament_id;
        p.team_a = m.team_a;
        p.team_b = m.team_b;
        p.goals_a = m.goals_a;
        p.goals_b = m.goals_b;
        p.probs = odds_to_probs(it->second->win, it->second->draw, it->second->loss);
        odds_preds.push_back(std::move(p));
      }
    }
    if (missing > 0) report.warnings.push_back(std::to_string(missing) + " evaluated matches have no odds");
  }

  for (std::size_t k = 0; k < methods.size(); ++k) {
    std::size_t ties = 0;
    report.methods.push_back(summarize(methods[k].label(), per_method[k], failed[k], ties));
    if (ties > 0) {
      report.warnings.push_back(methods[k].label() + ": " + std::to_string(ties) +
                                " tied maxima resolved in the order win, draw, loss");
    }
    for (auto& p : per_method[k]) report.predictions.push_back(std::move(p));
  }
  if (!odds.empty()) {
    std::size_t ties = 0;
    report.methods.push_back(summarize(kOddsLabel, odds_preds, 0, ties));
    for (auto& p : odds_preds) report.predictions.push_back(std::move(p));
  }
  return report;
}

namespace {

std::string optional_number(const std::optional<double>& v) { return v ? format_number(*v) : ""; }

}  // namespace

std::string report_csv(const EvaluationReport& report) {
  std::ostringstream os;
  os << "method,matches,failed_splits,multinomial_likelihood,classification_rate,rps,goals,goal_difference\n";
  for (const auto& m : report.methods) {
    os << csv_escape(m.label) << ',' << m.matches << ',' << m.failed_splits << ',' << format_number(m.likelihood)
       << ',' << format_number(m.classification_rate) << ',' << format_number(m.rps) << ','
       << optional_number(m.goals) << ',' << optional_number(m.goal_difference) << '\n';
  }
  return os.str();
}

std::string report_table(const EvaluationReport& report) {
  // Column values; higher is better for the first two, lower for the rest.
  struct Column {
    const char* title;
    bool higher_better;
    std::optional<double> (*get)(const MethodSummary&);
  };
  const Column columns[] = {
      {"Multinomial", true, [](const MethodSummary& m) { return std::optional<double>(m.likelihood); }},
      {"Class. Rate", true, [](const MethodSummary& m) { return std::optional<double>(m.classification_rate); }},
      {"RPS", false, [](const MethodSummary& m) { return std::optional<double>(m.rps); }},
      {"Goals", false, [](const MethodSummary& m) { return m.goals; }},
      {"Goal Difference", false, [](const MethodSummary& m) { return m.goal_difference; }},
  };

  std::size_t label_width = 6;
  for (const auto& m : report.methods) label_width = std::max(label_width, m.label.size());

  std::vector<std::optional<std::size_t>> best(std::size(columns));
  for (std::size_t c = 0; c < std::size(columns); ++c) {
    for (std::size_t r = 0; r < report.methods.size(); ++r) {
      const auto& m = report.methods[r];
      if (m.label == kOddsLabel || m.matches == 0) continue;
      auto v = columns[c].get(m);
      if (!v) continue;
      if (!best[c]) {
        best[c] = r;
        continue;
      }
      double cur = *columns[c].get(report.methods[*best[c]]);
      if (columns[c].higher_better ? *v > cur : *v < cur) best[c] = r;
    }
  }

  std::ostringstream os;
  os << std::left << std::setw(static_cast<int>(label_width)) << "" << std::right;
  for (const auto& col : columns) os << std::setw(17) << col.title;
  os << '\n';
  for (std::size_t r = 0; r < report.methods.size(); ++r) {
    const auto& m = report.methods[r];
    os << std::left << std::setw(static_cast<int>(label_width)) << m.label << std::right;
    for (std::size_t c = 0; c < std::size(columns); ++c) {
      auto v = columns[c].get(m);
      std::string cell = v && m.matches > 0 ? format_fixed(*v, 4) : "-";
      cell += (best[c] && *best[c] == r) ? "*" : " ";
      os << std::setw(17) << cell;
    }
    os << '\n';
  }
  os << "(* best model per column; the bookmaker row is the benchmark)\n";
  return os.str();
}

std::string predictions_csv(const EvaluationReport& report) {
  std::ostringstream os;
  os << "method,match_id,tournament_id,team_a,team_b,goals_a,goals_b,expected_a,expected_b,p_win,p_draw,p_loss\n";
  for (const auto& p : report.predictions) {
    os << csv_escape(p.method) << ',' << csv_escape(p.match_id) << ',' << p.tournament_id << ','
       << csv_escape(p.team_a) << ',' << csv_escape(p.team_b) << ',' << p.goals_a << ',' << p.goals_b << ','
       << optional_number(p.expected_a) << ',' << optional_number(p.expected_b) << ',' << format_number(p.probs.win)
       << ',' << format_number(p.probs.draw) << ',' << format_number(p.probs.loss) << '\n';
  }
  return os.str();
}

}  // namespace handball
