#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "handball/glm.hpp"
#include "handball/score_model.hpp"

namespace handball::cli {

inline constexpr std::uint64_t kDefaultSeed = 20190110;

struct RunConfig {
  std::string covariates;
  std::string matches;
  std::string odds;
  std::string format;
  ScoreFamily family = ScoreFamily::gaussian;
  LambdaRule rule = LambdaRule::min;
  std::uint64_t runs = 100000;
  std::uint64_t seed = kDefaultSeed;
  std::string out = ".";
  /// Worker threads; never affects outputs.
  std::size_t threads = 1;
};

struct CommandResult {
  std::vector<std::string> files;
  std::vector<std::string> warnings;
};

/// Thrown for invalid configurations and rejected inputs.
class CommandError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// design.csv (one row per team and match) and exclusions.csv.
CommandResult cmd_build_design(const RunConfig& config);
/// comparison.csv, comparison.txt, predictions.csv, splits.csv.
CommandResult cmd_compare(const RunConfig& config);
/// fit.json, coefficients.csv, simulation.csv, groups.csv.
CommandResult cmd_simulate(const RunConfig& config);

/// FNV-1a 64 of a file's bytes, as 16 hex digits.
std::string file_hash(const std::string& path);

}  // namespace handball::cli
