#include "commands.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

#include <json.hpp>

#include "handball/csv.hpp"
#include "handball/design.hpp"
#include "handball/evaluation.hpp"
#include "handball/format.hpp"
#include "handball/serialize.hpp"
#include "handball/tournament.hpp"
#include "handball/version.hpp"

namespace handball::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

std::string file_hash(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CommandError("cannot read '" + path + "'");
  std::uint64_t h = 0xcbf29ce484222325ULL;
  std::istreambuf_iterator<char> it(in), end;
  for (; it != end; ++it) {
    h ^= static_cast<unsigned char>(*it);
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

struct Input {
  std::string role;
  std::string path;
};

std::string_view rule_name(LambdaRule rule) { return rule == LambdaRule::min ? "min" : "1se"; }

void require_file(const std::string& path, const char* flag) {
  if (path.empty()) throw CommandError(std::string("missing required option ") + flag);
  if (!fs::is_regular_file(path)) throw CommandError(std::string(flag) + ": no such file '" + path + "'");
}

class Output {
 public:
  Output(std::string command, const RunConfig& config, std::vector<Input> inputs)
      : command_(std::move(command)), config_(config), inputs_(std::move(inputs)) {
    for (const auto& in : inputs_) hashes_.push_back(file_hash(in.path));
    std::error_code ec;
    fs::create_directories(config_.out, ec);
    if (ec) throw CommandError("cannot create output directory '" + config_.out + "': " + ec.message());
  }

  /// Comment lines for CSV outputs.
  std::string header() const {
    std::ostringstream os;
    os << "# handball_forecast " << kVersion << ' ' << command_ << '\n';
    os << "# seed " << config_.seed << '\n';
    for (std::size_t i = 0; i < inputs_.size(); ++i) {
      os << "# input " << inputs_[i].role << ' ' << fs::path(inputs_[i].path).filename().string() << " fnv1a64 "
         << hashes_[i] << '\n';
    }
    return os.str();
  }

  void write(const std::string& name, const std::string& content, bool with_header) {
    const fs::path path = fs::path(config_.out) / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw CommandError("cannot write '" + path.string() + "'");
    if (with_header) out << header();
    out << content;
    if (!out) throw CommandError("failed writing '" + path.string() + "'");
    result.files.push_back(path.string());
  }

  void write_config(const ordered_json& extra) {
    ordered_json doc;
    doc["command"] = command_;
    doc["version"] = kVersion;
    doc["seed"] = config_.seed;
    ordered_json inputs = ordered_json::object();
    for (std::size_t i = 0; i < inputs_.size(); ++i) {
      inputs[inputs_[i].role] = {{"file", fs::path(inputs_[i].path).filename().string()}, {"fnv1a64", hashes_[i]}};
    }
    doc["inputs"] = std::move(inputs);
    for (auto it = extra.begin(); it != extra.end(); ++it) doc[it.key()] = it.value();
    doc["warnings"] = result.warnings;
    write("config.json", doc.dump(2) + "\n", false);
  }

  CommandResult result;

 private:
  std::string command_;
  const RunConfig& config_;
  std::vector<Input> inputs_;
  std::vector<std::string> hashes_;
};

std::vector<int> tournaments_of(const std::vector<MatchRecord>& matches) {
  std::set<int> ids;
  for (const auto& m : matches) ids.insert(m.tournament_id);
  return {ids.begin(), ids.end()};
}

std::string design_csv(const DesignResult& design) {
  std::ostringstream os;
  os << "match_id,tournament_id,team,opponent,goals";
  for (const auto& name : feature_names()) os << ',' << name;
  os << '\n';
  for (const auto& r : design.rows) {
    os << csv_escape(r.match_id) << ',' << r.tournament_id << ',' << csv_escape(r.team) << ','
       << csv_escape(r.opponent) << ',' << r.response_goals;
    for (double x : r.features()) os << ',' << format_number(x);
    os << '\n';
  }
  return os.str();
}

std::string exclusions_csv(const DesignResult& design) {
  std::ostringstream os;
  os << "match_id,tournament_id,team_a,team_b,reason\n";
  for (const auto& e : design.excluded) {
    os << csv_escape(e.match_id) << ',' << e.tournament_id << ',' << csv_escape(e.team_a) << ','
       << csv_escape(e.team_b) << ',' << csv_escape(e.reason) << '\n';
  }
  return os.str();
}

std::string splits_csv(const EvaluationReport& report) {
  std::ostringstream os;
  os << "held_out,training_tournaments,training_matches,test_matches,fingerprint\n";
  for (const auto& s : report.splits) {
    std::string years;
    for (int t : s.training_tournaments) years += (years.empty() ? "" : ";") + std::to_string(t);
    char fp[17];
    std::snprintf(fp, sizeof fp, "%016llx", static_cast<unsigned long long>(s.fingerprint));
    os << s.held_out << ',' << years << ',' << s.training_match_ids.size() << ',' << s.test_match_ids.size() << ','
       << fp << '\n';
  }
  return os.str();
}

}  // namespace

CommandResult cmd_build_design(const RunConfig& config) {
  require_file(config.covariates, "--covariates");
  require_file(config.matches, "--matches");
  Output out("build-design", config, {{"covariates", config.covariates}, {"matches", config.matches}});

  auto covs = read_covariates_file(config.covariates);
  const auto matches = read_matches_file(config.matches);
  const auto tournaments = tournaments_of(matches);
  resolve_age_deviation(covs, tournaments);
  const DesignResult design = build_design(covs, matches);

  if (matches.empty()) out.result.warnings.push_back("matches file has no rows; the design is empty");
  if (!design.excluded.empty()) {
    out.result.warnings.push_back(std::to_string(design.excluded.size()) +
                                  " match(es) excluded for missing covariates; see exclusions.csv");
  }
  out.write("design.csv", design_csv(design), true);
  out.write("exclusions.csv", exclusions_csv(design), true);
  out.write_config({{"rows", design.rows.size()}, {"excluded", design.excluded.size()}});
  return out.result;
}

CommandResult cmd_compare(const RunConfig& config) {
  require_file(config.covariates, "--covariates");
  require_file(config.matches, "--matches");
  std::vector<Input> inputs{{"covariates", config.covariates}, {"matches", config.matches}};
  std::vector<std::string> warnings;
  bool have_odds = false;
  if (config.odds.empty()) {
    warnings.push_back("no odds file given; the report has no bookmaker row");
  } else if (!fs::is_regular_file(config.odds)) {
    warnings.push_back("odds file '" + config.odds + "' not found; the report has no bookmaker row");
  } else {
    inputs.push_back({"odds", config.odds});
    have_odds = true;
  }
  Output out("compare", config, std::move(inputs));
  out.result.warnings = std::move(warnings);

  const auto covs = read_covariates_file(config.covariates);
  const auto matches = read_matches_file(config.matches);
  if (tournaments_of(matches).size() < 2) {
    throw CommandError("compare needs matches from at least two tournaments");
  }
  std::vector<OddsRecord> odds;
  if (have_odds) odds = read_odds_file(config.odds);

  EvaluationOptions options;
  options.fit.cv.seed = config.seed;
  options.threads = config.threads;
  const auto methods = all_methods();
  const EvaluationReport report = leave_one_tournament_out(covs, matches, methods, odds, options);
  out.result.warnings.insert(out.result.warnings.end(), report.warnings.begin(), report.warnings.end());

  std::string table = report_table(report);
  for (const auto& w : out.result.warnings) table += "warning: " + w + "\n";
  out.write("comparison.csv", report_csv(report), true);
  out.write("comparison.txt", out.header() + table, false);
  out.write("predictions.csv", predictions_csv(report), true);
  out.write("splits.csv", splits_csv(report), true);
  out.write_config({{"methods", report.methods.size()}});
  return out.result;
}

CommandResult cmd_simulate(const RunConfig& config) {
  require_file(config.covariates, "--covariates");
  require_file(config.matches, "--matches");
  if (config.runs < 1) throw CommandError("--runs must be at least 1");
  std::vector<Input> inputs{{"covariates", config.covariates}, {"matches", config.matches}};
  if (!config.format.empty()) {
    require_file(config.format, "--format");
    inputs.push_back({"format", config.format});
  }
  Output out("simulate", config, std::move(inputs));

  const TournamentFormat format = config.format.empty() ? TournamentFormat::ihf2019() : TournamentFormat::load(config.format);
  auto covs = read_covariates_file(config.covariates);
  const auto all_matches = read_matches_file(config.matches);
  std::vector<MatchRecord> training;
  std::copy_if(all_matches.begin(), all_matches.end(), std::back_inserter(training),
               [&](const MatchRecord& m) { return m.tournament_id != format.tournament_id; });
  if (training.empty()) throw CommandError("no training matches outside tournament " + std::to_string(format.tournament_id));

  const auto ideal_age = resolve_age_deviation(covs, tournaments_of(training));
  const DesignResult design = build_design(covs, training);
  if (!design.excluded.empty()) {
    out.result.warnings.push_back(std::to_string(design.excluded.size()) +
                                  " training match(es) excluded for missing covariates");
  }

  FitOptions fit_options;
  fit_options.rule = config.rule;
  fit_options.cv.seed = config.seed;
  fit_options.cv.threads = config.threads;
  const ScoreModel model = fit_score_model(design.rows, config.family, fit_options);

  const CovariateTable table(covs);
  const auto teams = format.teams();
  Matchups matchups;
  try {
    matchups = Matchups::from_model(model, table, format.tournament_id, teams);
  } catch (const std::invalid_argument& e) {
    throw CommandError(e.what());
  }
  const TournamentSimulator simulator(matchups, format);
  const SimulationSummary summary = monte_carlo(simulator, config.runs, config.seed, config.threads);

  out.write("fit.json", fit_to_json(model), false);
  out.write("coefficients.csv", coefficients_csv(model), true);
  out.write("simulation.csv", summary_csv(summary), true);
  out.write("groups.csv", group_csv(summary, format), true);
  ordered_json extra;
  extra["family"] = std::string(to_string(config.family));
  extra["lambda_rule"] = std::string(rule_name(config.rule));
  extra["runs"] = config.runs;
  extra["format"] = config.format.empty() ? std::string("builtin:ihf2019") : fs::path(config.format).filename().string();
  extra["tournament_id"] = format.tournament_id;
  extra["training_rows"] = design.rows.size();
  if (ideal_age) extra["ideal_age"] = *ideal_age;
  out.write_config(extra);
  return out.result;
}

}  // namespace handball::cli
