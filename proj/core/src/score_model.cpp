#include "handball/score_model.hpp"

#include <algorithm>
#include <stdexcept>

namespace handball {

std::string_view to_string(ScoreFamily family) {
  switch (family) {
    case ScoreFamily::gaussian: return "gaussian";
    case ScoreFamily::poisson: return "poisson";
    case ScoreFamily::dpoisson: return "dpoisson";
    case ScoreFamily::negbin: return "negbin";
  }
  return "gaussian";
}

ScoreFamily parse_score_family(std::string_view text) {
  if (text == "gaussian") return ScoreFamily::gaussian;
  if (text == "poisson") return ScoreFamily::poisson;
  if (text == "dpoisson") return ScoreFamily::dpoisson;
  if (text == "negbin") return ScoreFamily::negbin;
  throw std::invalid_argument("unknown family '" + std::string(text) + "'");
}

Family regression_family(ScoreFamily family) {
  switch (family) {
    case ScoreFamily::gaussian: return Family::gaussian();
    case ScoreFamily::poisson:
    case ScoreFamily::dpoisson: return Family::poisson();
    case ScoreFamily::negbin: return Family::negbin_estimated();
  }
  return Family::gaussian();
}

std::string Method::label() const {
  std::string base;
  switch (family) {
    case ScoreFamily::poisson: base = "Pois"; break;
    case ScoreFamily::dpoisson: base = "underdis. Pois"; break;
    case ScoreFamily::negbin: base = "NB"; break;
    case ScoreFamily::gaussian: base = "Gauss"; break;
  }
  return rule == LambdaRule::min ? base : base + " (lambda_1se)";
}

std::vector<Method> all_methods() {
  std::vector<Method> out;
  for (ScoreFamily f : {ScoreFamily::poisson, ScoreFamily::dpoisson, ScoreFamily::negbin, ScoreFamily::gaussian}) {
    out.push_back({f, LambdaRule::min});
    out.push_back({f, LambdaRule::one_se});
  }
  return out;
}

double ScoreModel::expected_goals(const DesignRow& raw_row) const {
  return predict_mean(fit, fit.scaling.apply(raw_row));
}

std::pair<double, double> ScoreModel::expected_goals(const TeamCovariates& a, const TeamCovariates& b) const {
  auto [row_a, row_b] = design_pair(a, b);
  return {expected_goals(row_a), expected_goals(row_b)};
}

ScoreDistribution ScoreModel::distribution(double mean, double time_factor) const {
  const double m = mean * time_factor;
  switch (family) {
    case ScoreFamily::gaussian: return ScoreDistribution::rounded_gaussian(m, dispersion * time_factor);
    case ScoreFamily::poisson: return ScoreDistribution::poisson(m);
    case ScoreFamily::dpoisson: return ScoreDistribution::double_poisson(m, dispersion);
    case ScoreFamily::negbin: return ScoreDistribution::negbin(m, dispersion);
  }
  return ScoreDistribution::poisson(m);
}

ScoreModel make_score_model(ModelFit fit, ScoreFamily family, std::span<const DesignRow> raw_rows) {
  if (fit.family.kind != regression_family(family).kind) {
    throw std::invalid_argument("fit family does not match score family " + std::string(to_string(family)));
  }
  const auto rows = fit.scaling.apply(raw_rows);
  const double pearson = estimate_dispersion(fit, rows);

  ScoreModel model;
  model.family = family;
  switch (family) {
    case ScoreFamily::gaussian:
      fit.sigma2_hat = pearson;
      model.dispersion = pearson;
      break;
    case ScoreFamily::poisson:
      fit.phi_hat = pearson;
      model.dispersion = 1.0;
      break;
    case ScoreFamily::dpoisson:
      fit.phi_hat = pearson;
      // A perfect fit gives phi = 0, which the double Poisson cannot represent.
      model.dispersion = std::max(pearson, 1e-4);
      break;
    case ScoreFamily::negbin:
      fit.phi_hat = pearson;
      model.dispersion = fit.family.nb_theta;
      break;
  }
  model.fit = std::move(fit);
  return model;
}

ScoreModel fit_score_model(std::span<const DesignRow> raw_rows, ScoreFamily family, const FitOptions& options) {
  ModelFit fit = fit_model(raw_rows, regression_family(family), options);
  return make_score_model(std::move(fit), family, raw_rows);
}

}  // namespace handball
