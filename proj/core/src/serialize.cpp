#include "handball/serialize.hpp"

#include <cmath>
#include <sstream>

#include <json.hpp>

#include "handball/csv.hpp"

namespace handball {

using nlohmann::ordered_json;

namespace {

ordered_json number_or_null(double x) {
  if (std::isfinite(x)) return x;
  return nullptr;
}

std::string_view rule_name(LambdaRule rule) { return rule == LambdaRule::min ? "min" : "1se"; }

}  // namespace

std::string fit_to_json(const ScoreModel& model) {
  const ModelFit& fit = model.fit;
  const auto& names = feature_names();
  ordered_json doc;
  doc["family"] = std::string(to_string(model.family));
  doc["lambda_rule"] = std::string(rule_name(fit.rule));
  doc["lambda"] = fit.selected_lambda();
  doc["lambda_min"] = fit.lambda_min;
  doc["lambda_1se"] = fit.lambda_1se;
  doc["intercept"] = fit.intercept;
  doc["active"] = fit.active_count();

  ordered_json coefs = ordered_json::object();
  ordered_json unscaled = ordered_json::object();
  for (std::size_t j = 0; j < fit.coefficients.size() && j < names.size(); ++j) {
    coefs[names[j]] = fit.coefficients[j];
    unscaled[names[j]] = fit.scaling.unscale_coefficient(j, fit.coefficients[j]);
  }
  doc["coefficients"] = std::move(coefs);
  doc["coefficients_unscaled"] = std::move(unscaled);

  ordered_json dispersion;
  dispersion["value"] = number_or_null(model.dispersion);
  dispersion["sigma2_hat"] = fit.sigma2_hat;
  dispersion["phi_hat"] = fit.phi_hat;
  if (fit.family.kind == FamilyKind::negbin) {
    dispersion["nb_theta"] = number_or_null(fit.family.nb_theta);
    dispersion["poisson_equivalent"] = fit.poisson_equivalent();
  }
  doc["dispersion"] = std::move(dispersion);

  ordered_json scaling;
  scaling["center"] = fit.scaling.center;
  scaling["scale"] = fit.scaling.scale;
  ordered_json flagged = ordered_json::array();
  for (std::size_t j = 0; j < fit.scaling.flagged.size(); ++j) {
    if (fit.scaling.flagged[j] && j < names.size()) flagged.push_back(names[j]);
  }
  scaling["zero_variance"] = std::move(flagged);
  doc["scaling"] = std::move(scaling);

  ordered_json path = ordered_json::array();
  for (std::size_t l = 0; l < fit.lambda_path.size(); ++l) {
    ordered_json step;
    step["lambda"] = fit.lambda_path[l];
    if (l < fit.cv_mean.size()) step["cv_mean"] = number_or_null(fit.cv_mean[l]);
    if (l < fit.cv_se.size()) step["cv_se"] = number_or_null(fit.cv_se[l]);
    if (l < fit.path.lambdas.size()) {
      std::size_t active = 0;
      for (double c : fit.path.coef(l)) active += c != 0.0 ? 1 : 0;
      step["active"] = active;
    }
    path.push_back(std::move(step));
  }
  doc["path"] = std::move(path);
  return doc.dump(2) + "\n";
}

std::string coefficients_csv(const ScoreModel& model) {
  const ModelFit& fit = model.fit;
  const auto& names = feature_names();
  std::ostringstream os;
  os << "variable,estimate,estimate_unscaled\n";
  os << "(Intercept)," << format_number(fit.intercept) << ',' << format_number(fit.intercept) << '\n';
  for (std::size_t j = 0; j < fit.coefficients.size() && j < names.size(); ++j) {
    os << csv_escape(names[j]) << ',' << format_number(fit.coefficients[j]) << ','
       << format_number(fit.scaling.unscale_coefficient(j, fit.coefficients[j])) << '\n';
  }
  return os.str();
}

}  // namespace handball
