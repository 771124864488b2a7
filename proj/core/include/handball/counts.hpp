#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "handball/glm.hpp"
#include "handball/outcome.hpp"
#include "handball/rng.hpp"

namespace handball {

enum class ScoreKind { poisson, double_poisson, negbin, rounded_gaussian };

std::string_view to_string(ScoreKind kind);

/// Discrete distribution of the goals scored by one team in one match.
///
/// The probability masses on the truncated grid 0..K are computed once at
/// construction. K is chosen as mean + 20 standard deviations and widened
/// until the neglected tail is below 1e-12 (1e-6 at worst, else the
/// constructor throws). Double-Poisson masses are normalized on the grid.
///
/// `dispersion` is phi for the double Poisson, the size theta for the
/// negative binomial and the variance sigma^2 for the rounded Gaussian.
class ScoreDistribution {
 public:
  static ScoreDistribution poisson(double mean);
  static ScoreDistribution double_poisson(double mean, double phi);
  static ScoreDistribution negbin(double mean, double theta);
  /// Normal(mean, variance) rounded to the nearest integer; everything
  /// below 0.5 maps to 0. A zero variance gives a point mass.
  static ScoreDistribution rounded_gaussian(double mean, double variance);

  ScoreKind kind() const noexcept { return kind_; }
  double mean() const noexcept { return mean_; }
  double dispersion() const noexcept { return dispersion_; }

  /// Masses on 0..K.
  std::span<const double> masses() const noexcept { return *masses_; }
  double pmf(long y) const noexcept;
  /// P(Y <= y).
  double cdf(long y) const noexcept;
  /// Probability mass outside the grid.
  double tail_mass() const noexcept { return tail_; }

  /// Rounded Gaussian: normal draw, rounded and clamped at 0. Discrete
  /// families: inverse-CDF on the grid.
  int sample(Rng& rng) const;

 private:
  ScoreDistribution(ScoreKind kind, double mean, double dispersion);

  ScoreKind kind_;
  double mean_;
  double dispersion_;
  double tail_ = 0.0;
  std::shared_ptr<const std::vector<double>> masses_;
  std::shared_ptr<const std::vector<double>> cumulative_;
};

/// Efron's double Poisson mass at y with mean `mean` and precision
/// theta = 1/phi, normalized by summation over 0..mean + 20 sqrt(phi mean).
/// Normalizing constants are cached per thread.
double double_poisson_pmf(long y, double mean, double theta);

/// Exact win/draw/loss probabilities for two independent scores by
/// summation over the truncated grids.
OutcomeProbs outcome_probs(const ScoreDistribution& first, const ScoreDistribution& second);

/// Pearson dispersion sum(r_i^2) / (N - df) with df = active coefficients + 1.
/// Rows must be standardized with fit.scaling. For a gaussian fit this is
/// the residual variance.
double estimate_dispersion(const ModelFit& fit, std::span<const DesignRow> standardized_rows);

}  // namespace handball
