#pragma once

#include <string>

#include "handball/score_model.hpp"

namespace handball {

/// Fitted model as JSON: family, selected lambda and rule, intercept,
/// named coefficients on the standardized and original scale, the lambda
/// path with CV diagnostics, scaling, and dispersion.
std::string fit_to_json(const ScoreModel& model);

/// variable,estimate,estimate_unscaled for every feature in design order.
std::string coefficients_csv(const ScoreModel& model);

}  // namespace handball
