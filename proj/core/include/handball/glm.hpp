#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "handball/design.hpp"

namespace handball {

enum class FamilyKind { gaussian, poisson, negbin };

std::string_view to_string(FamilyKind kind);

/// Response family. For the negative binomial, `nb_theta` is the size
/// parameter (Var = mu + mu^2 / theta); an infinite theta is the Poisson limit.
/// With `estimate_theta` set, the size parameter is estimated alongside the
/// coefficients and `nb_theta` is only the starting value.
struct Family {
  FamilyKind kind = FamilyKind::gaussian;
  double nb_theta = std::numeric_limits<double>::infinity();
  bool estimate_theta = false;

  static Family gaussian() { return {FamilyKind::gaussian}; }
  static Family poisson() { return {FamilyKind::poisson}; }
  static Family negbin(double theta);
  static Family negbin_estimated() {
    return {FamilyKind::negbin, std::numeric_limits<double>::infinity(), true};
  }

  bool log_link() const noexcept { return kind != FamilyKind::gaussian; }
  double mean(double eta) const;
  double variance(double mu) const;
  double unit_deviance(double y, double mu) const;
  /// Negative log-likelihood of one observation, dropping terms free of eta.
  double neg_loglik(double y, double eta) const;
  /// Derivative of the log-likelihood with respect to eta.
  double score(double y, double eta) const;
  /// Expected information with respect to eta (IRLS weight).
  double irls_weight(double eta) const;
};

/// Upper bound on the negative binomial size parameter; estimates beyond it
/// are reported as Poisson-equivalent (theta = infinity).
inline constexpr double kThetaCap = 1e6;

/// Dense column-major design with responses and a grouping used to keep
/// both observations of a match in the same cross-validation fold.
struct Dataset {
  std::size_t n = 0;
  std::size_t p = 0;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<std::size_t> group;

  std::span<const double> column(std::size_t j) const { return {x.data() + j * n, n}; }
  double at(std::size_t i, std::size_t j) const { return x[j * n + i]; }

  static Dataset from_rows(std::span<const DesignRow> rows);
  /// `row_major` holds n rows of p values. Groups default to one per row.
  static Dataset from_matrix(std::size_t n, std::size_t p, std::span<const double> row_major,
                             std::span<const double> y, std::span<const std::size_t> group = {});
  Dataset subset(std::span<const std::size_t> rows) const;
};

class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(std::size_t lambda_index, const std::string& what)
      : std::runtime_error(what), lambda_index_(lambda_index) {}
  std::size_t lambda_index() const noexcept { return lambda_index_; }

 private:
  std::size_t lambda_index_;
};

/// sign(z) * max(|z| - gamma, 0).
double soft_threshold(double z, double gamma);

struct PathOptions {
  std::size_t n_lambda = 100;
  double lambda_min_ratio = 1e-3;
  /// Convergence: max absolute coefficient change (intercept included).
  double tol = 1e-7;
  std::size_t max_sweeps = 100000;
  /// Explicit decreasing penalty sequence; overrides n_lambda/ratio.
  std::vector<double> lambdas;
  /// Called with (lambda index, penalized objective) after every
  /// coordinate-descent sweep (gaussian) or IRLS update (log-link families).
  std::function<void(std::size_t, double)> trace;
};

/// Solutions along a decreasing penalty sequence.
struct PathResult {
  std::vector<double> lambdas;
  std::vector<double> intercepts;
  /// lambdas.size() x p, row-major.
  std::vector<double> coefficients;
  /// Negative binomial size per lambda (infinity for other families).
  std::vector<double> nb_theta;
  std::size_t p = 0;

  std::span<const double> coef(std::size_t l) const { return {coefficients.data() + l * p, p}; }
  std::size_t size() const noexcept { return lambdas.size(); }
};

/// Smallest penalty at which all coefficients are zero.
double lambda_max(const Dataset& data, const Family& family);

/// Penalized objective: mean negative log-likelihood plus lambda * ||beta||_1
/// (the intercept is not penalized).
double penalized_objective(const Dataset& data, const Family& family, double intercept,
                           std::span<const double> beta, double lambda);

/// Largest violation of the Lasso optimality conditions: the intercept score
/// must vanish, active scores must equal lambda * sign(beta), inactive scores
/// must not exceed lambda in magnitude. Scores are per-observation means.
double kkt_violation(const Dataset& data, const Family& family, double intercept,
                     std::span<const double> beta, double lambda);

/// Lasso path with warm starts. Gaussian: coordinate descent on squared error.
/// Poisson/negative binomial: penalized IRLS with an inner coordinate descent.
/// A negative binomial family with `estimate_theta` is delegated to
/// fit_negbin_path.
PathResult fit_path(const Dataset& data, const Family& family, const PathOptions& options = {});

/// Negative binomial Lasso path alternating penalized IRLS for the
/// coefficients and a one-dimensional likelihood maximization for theta.
PathResult fit_negbin_path(const Dataset& data, const PathOptions& options = {});

/// Maximum-likelihood negative binomial size given fitted means. Returns
/// infinity when the likelihood keeps increasing up to kThetaCap.
double estimate_nb_theta(std::span<const double> y, std::span<const double> mu);

struct CvOptions {
  std::size_t folds = 10;
  std::uint64_t seed = 20190110;
  std::size_t threads = 1;
};

struct CvResult {
  std::vector<double> lambdas;
  std::vector<double> cv_mean;
  std::vector<double> cv_se;
  std::size_t index_min = 0;
  std::size_t index_1se = 0;
  double lambda_min = 0.0;
  double lambda_1se = 0.0;
  /// Fold of every observation.
  std::vector<std::size_t> fold;
};

/// Assigns groups (matches) to folds by a seeded shuffle.
std::vector<std::size_t> assign_folds(std::span<const std::size_t> group, std::size_t folds, std::uint64_t seed);

/// Picks the penalty minimizing the curve and the largest penalty whose
/// value is within one standard error of that minimum.
void select_lambdas(CvResult& cv);

/// k-fold cross-validation of the held-out mean deviance over the penalty
/// sequence of the full-data path.
CvResult cross_validate(const Dataset& data, const Family& family, const PathOptions& path_options = {},
                        const CvOptions& cv_options = {});

enum class LambdaRule { min, one_se };

std::string_view to_string(LambdaRule rule);

struct ModelFit {
  Family family;
  double intercept = 0.0;
  std::vector<double> coefficients;
  std::vector<double> lambda_path;
  std::vector<double> cv_mean;
  std::vector<double> cv_se;
  double lambda_min = 0.0;
  double lambda_1se = 0.0;
  std::size_t index_min = 0;
  std::size_t index_1se = 0;
  LambdaRule rule = LambdaRule::min;
  ScalingInfo scaling;
  /// Residual variance (gaussian), filled by the dispersion estimator.
  double sigma2_hat = 0.0;
  /// Pearson dispersion, filled by the dispersion estimator.
  double phi_hat = 1.0;
  PathResult path;

  /// Copy positioned at the solution for `rule`.
  ModelFit select(LambdaRule rule) const;
  std::size_t active_count() const;
  double selected_lambda() const { return rule == LambdaRule::min ? lambda_min : lambda_1se; }
  bool poisson_equivalent() const {
    return family.kind == FamilyKind::negbin && !(family.nb_theta < std::numeric_limits<double>::infinity());
  }
};

struct FitOptions {
  PathOptions path;
  CvOptions cv;
  LambdaRule rule = LambdaRule::min;
};

/// Standardizes raw design rows, fits the path, cross-validates and
/// positions the fit at the requested rule.
ModelFit fit_model(std::span<const DesignRow> rows, const Family& family, const FitOptions& options = {});

/// Linear predictor for a row standardized with fit.scaling.
double predict_eta(const ModelFit& fit, const DesignRow& standardized_row);
/// Expected response: eta for gaussian, exp(eta) otherwise.
double predict_mean(const ModelFit& fit, const DesignRow& standardized_row);

}  // namespace handball
