#pragma once

#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "handball/counts.hpp"
#include "handball/design.hpp"
#include "handball/glm.hpp"

namespace handball {

/// The four compared score models. `dpoisson` reuses the Poisson regression
/// and simulates from a double Poisson with the Pearson dispersion.
enum class ScoreFamily { gaussian, poisson, dpoisson, negbin };

std::string_view to_string(ScoreFamily family);
ScoreFamily parse_score_family(std::string_view text);
Family regression_family(ScoreFamily family);

struct Method {
  ScoreFamily family = ScoreFamily::gaussian;
  LambdaRule rule = LambdaRule::min;

  /// Row label, e.g. "Pois" or "Gauss (lambda_1se)".
  std::string label() const;
  friend bool operator==(const Method&, const Method&) = default;
};

/// The eight method variants: four families times {lambda_min, lambda_1se}.
std::vector<Method> all_methods();

/// A fitted regression together with the score distribution used to turn
/// expected goals into probabilities and simulated results.
struct ScoreModel {
  ScoreFamily family = ScoreFamily::gaussian;
  ModelFit fit;
  /// sigma^2 (gaussian), phi (dpoisson), theta (negbin), 1 (poisson).
  double dispersion = 1.0;

  /// Expected goals for a raw (unstandardized) design row.
  double expected_goals(const DesignRow& raw_row) const;
  /// Expected goals of a against b and of b against a.
  std::pair<double, double> expected_goals(const TeamCovariates& a, const TeamCovariates& b) const;
  /// Score distribution for an expected number of goals, with mean (and
  /// the gaussian variance) scaled by `time_factor`.
  ScoreDistribution distribution(double mean, double time_factor = 1.0) const;
};

/// Attaches the dispersion estimate for `family` to an already selected fit.
ScoreModel make_score_model(ModelFit fit, ScoreFamily family, std::span<const DesignRow> raw_rows);

ScoreModel fit_score_model(std::span<const DesignRow> raw_rows, ScoreFamily family, const FitOptions& options = {});

}  // namespace handball
