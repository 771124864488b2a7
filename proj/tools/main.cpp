#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"
#include "handball/csv.hpp"
#include "handball/version.hpp"

namespace {

using handball::cli::RunConfig;

void add_inputs(CLI::App& cmd, RunConfig& config) {
  cmd.add_option("--covariates", config.covariates, "Team covariates CSV")->required();
  cmd.add_option("--matches", config.matches, "Match results CSV")->required();
  cmd.add_option("--seed", config.seed, "Master seed")->capture_default_str();
  cmd.add_option("--out", config.out, "Output directory")->capture_default_str();
  cmd.add_option("--threads", config.threads, "Worker threads")->check(CLI::Range(1, 1024))->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lasso score models and tournament simulation for handball"};
  app.set_version_flag("--version", std::string(handball::kVersion));
  app.require_subcommand(1);

  RunConfig config;
  std::string family = "gaussian";
  std::string rule = "min";

  auto* build = app.add_subcommand("build-design", "Write the difference-encoded design matrix");
  add_inputs(*build, config);

  auto* compare = app.add_subcommand("compare", "Leave-one-tournament-out comparison of all methods");
  add_inputs(*compare, config);
  compare->add_option("--odds", config.odds, "Three-way bookmaker odds CSV");

  auto* simulate = app.add_subcommand("simulate", "Fit one model and simulate the tournament");
  add_inputs(*simulate, config);
  simulate->add_option("--format", config.format, "Tournament format JSON (default: built-in 2019 format)");
  simulate->add_option("--family", family, "Response family")
      ->check(CLI::IsMember({"gaussian", "poisson", "dpoisson", "negbin"}))
      ->capture_default_str();
  simulate->add_option("--lambda-rule", rule, "Penalty selection rule")
      ->check(CLI::IsMember({"min", "1se"}))
      ->capture_default_str();
  simulate->add_option("--runs", config.runs, "Simulation runs")->check(CLI::PositiveNumber)->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    config.family = handball::parse_score_family(family);
    config.rule = rule == "1se" ? handball::LambdaRule::one_se : handball::LambdaRule::min;
    handball::cli::CommandResult result;
    if (*build) {
      result = handball::cli::cmd_build_design(config);
    } else if (*compare) {
      result = handball::cli::cmd_compare(config);
    } else {
      result = handball::cli::cmd_simulate(config);
    }
    for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
    for (const auto& f : result.files) std::cout << f << '\n';
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
