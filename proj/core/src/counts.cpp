#include "handball/counts.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

namespace handball {

namespace {

constexpr double kTailTarget = 1e-12;
constexpr double kTailLimit = 1e-6;

/// P(Z > z) for a standard normal.
double upper_tail(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

/// P(a <= X < b) for X ~ Normal(mu, sigma), computed on the side of the
/// distribution where no cancellation occurs.
double normal_interval(double a, double b, double mu, double sigma) {
  double za = (a - mu) / sigma;
  double zb = (b - mu) / sigma;
  if (za >= 0.0) return upper_tail(za) - upper_tail(zb);
  return upper_tail(-zb) - upper_tail(-za);
}

double log_double_poisson_kernel(long y, double mean, double theta) {
  double out = 0.5 * std::log(theta) - theta * mean;
  if (y == 0) return out;
  const double yd = static_cast<double>(y);
  const double log_y = std::log(yd);
  return out - yd + yd * log_y - std::lgamma(yd + 1.0) + theta * yd * (1.0 + std::log(mean) - log_y);
}

long double_poisson_grid(double mean, double phi) {
  return static_cast<long>(std::ceil(mean + 20.0 * std::sqrt(phi * mean)));
}

double log_double_poisson_normalizer(double mean, double theta) {
  thread_local std::map<std::pair<double, double>, double> cache;
  auto key = std::make_pair(mean, theta);
  if (auto it = cache.find(key); it != cache.end()) return it->second;

  const long k = double_poisson_grid(mean, 1.0 / theta);
  std::vector<double> logs(static_cast<std::size_t>(k) + 1);
  for (long y = 0; y <= k; ++y) logs[static_cast<std::size_t>(y)] = log_double_poisson_kernel(y, mean, theta);
  double top = *std::max_element(logs.begin(), logs.end());
  double sum = 0.0;
  for (double l : logs) sum += std::exp(l - top);
  double value = top + std::log(sum);

  if (cache.size() > 4096) cache.clear();
  cache.emplace(key, value);
  return value;
}

double log_poisson_pmf(long y, double mean) {
  const double yd = static_cast<double>(y);
  return yd * std::log(mean) - mean - std::lgamma(yd + 1.0);
}

double log_negbin_pmf(long y, double mean, double theta) {
  const double yd = static_cast<double>(y);
  return std::lgamma(yd + theta) - std::lgamma(theta) - std::lgamma(yd + 1.0) +
         theta * std::log(theta / (theta + mean)) + yd * std::log(mean / (theta + mean));
}

double variance_of(ScoreKind kind, double mean, double dispersion) {
  switch (kind) {
    case ScoreKind::poisson: return mean;
    case ScoreKind::double_poisson: return dispersion * mean;
    case ScoreKind::negbin: return std::isfinite(dispersion) ? mean + mean * mean / dispersion : mean;
    case ScoreKind::rounded_gaussian: return dispersion;
  }
  return mean;
}

}  // namespace

std::string_view to_string(ScoreKind kind) {
  switch (kind) {
    case ScoreKind::poisson: return "poisson";
    case ScoreKind::double_poisson: return "double_poisson";
    case ScoreKind::negbin: return "negbin";
    case ScoreKind::rounded_gaussian: return "rounded_gaussian";
  }
  return "poisson";
}

double double_poisson_pmf(long y, double mean, double theta) {
  if (!(mean > 0.0) || !(theta > 0.0) || !std::isfinite(mean) || !std::isfinite(theta)) {
    throw std::invalid_argument("double_poisson_pmf: mean and theta must be finite and positive");
  }
  if (y < 0) return 0.0;
  return std::exp(log_double_poisson_kernel(y, mean, theta) - log_double_poisson_normalizer(mean, theta));
}

ScoreDistribution ScoreDistribution::poisson(double mean) { return {ScoreKind::poisson, mean, 1.0}; }

ScoreDistribution ScoreDistribution::double_poisson(double mean, double phi) {
  return {ScoreKind::double_poisson, mean, phi};
}

ScoreDistribution ScoreDistribution::negbin(double mean, double theta) { return {ScoreKind::negbin, mean, theta}; }

ScoreDistribution ScoreDistribution::rounded_gaussian(double mean, double variance) {
  return {ScoreKind::rounded_gaussian, mean, variance};
}

ScoreDistribution::ScoreDistribution(ScoreKind kind, double mean, double dispersion)
    : kind_(kind), mean_(mean), dispersion_(dispersion) {
  if (!std::isfinite(mean)) throw std::invalid_argument("score distribution: mean must be finite");
  if (kind == ScoreKind::rounded_gaussian) {
    if (!(dispersion >= 0.0) || !std::isfinite(dispersion)) {
      throw std::invalid_argument("rounded gaussian: variance must be finite and non-negative");
    }
  } else {
    if (!(mean > 0.0)) throw std::invalid_argument(std::string(to_string(kind)) + ": mean must be positive");
    if (!(dispersion > 0.0)) {
      throw std::invalid_argument(std::string(to_string(kind)) + ": dispersion must be positive");
    }
    if (kind == ScoreKind::double_poisson && !std::isfinite(dispersion)) {
      throw std::invalid_argument("double poisson: phi must be finite");
    }
  }

  auto masses = std::make_shared<std::vector<double>>();
  const double sd = std::sqrt(variance_of(kind, mean, dispersion));

  if (kind == ScoreKind::double_poisson) {
    const long k = double_poisson_grid(mean, dispersion);
    const double theta = 1.0 / dispersion;
    const double log_norm = log_double_poisson_normalizer(mean, theta);
    masses->resize(static_cast<std::size_t>(k) + 1);
    for (long y = 0; y <= k; ++y) {
      (*masses)[static_cast<std::size_t>(y)] = std::exp(log_double_poisson_kernel(y, mean, theta) - log_norm);
    }
    tail_ = 0.0;
  } else if (kind == ScoreKind::rounded_gaussian && sd == 0.0) {
    const long g = std::max(0L, static_cast<long>(std::floor(mean + 0.5)));
    masses->assign(static_cast<std::size_t>(g) + 1, 0.0);
    masses->back() = 1.0;
    tail_ = 0.0;
  } else {
    long k = static_cast<long>(std::ceil(std::max(mean, 0.0) + 20.0 * sd)) + 1;
    for (int attempt = 0;; ++attempt) {
      masses->assign(static_cast<std::size_t>(k) + 1, 0.0);
      double total = 0.0;
      for (long y = 0; y <= k; ++y) {
        double m = 0.0;
        switch (kind) {
          case ScoreKind::poisson: m = std::exp(log_poisson_pmf(y, mean)); break;
          case ScoreKind::negbin:
            m = std::isfinite(dispersion) ? std::exp(log_negbin_pmf(y, mean, dispersion))
                                          : std::exp(log_poisson_pmf(y, mean));
            break;
          case ScoreKind::rounded_gaussian: {
            const double lo = y == 0 ? -std::numeric_limits<double>::infinity() : y - 0.5;
            m = y == 0 ? 1.0 - upper_tail((0.5 - mean) / sd) : normal_interval(lo, y + 0.5, mean, sd);
            break;
          }
          case ScoreKind::double_poisson: break;
        }
        (*masses)[static_cast<std::size_t>(y)] = m;
        total += m;
      }
      tail_ = kind == ScoreKind::rounded_gaussian ? upper_tail((k + 0.5 - mean) / sd) : std::max(0.0, 1.0 - total);
      if (tail_ <= kTailTarget) break;
      if (attempt >= 8) {
        if (tail_ <= kTailLimit) break;
        throw std::runtime_error("score distribution: truncated tail mass exceeds 1e-6");
      }
      k *= 2;
    }
  }

  auto cumulative = std::make_shared<std::vector<double>>(masses->size());
  double run = 0.0;
  for (std::size_t y = 0; y < masses->size(); ++y) {
    run += (*masses)[y];
    (*cumulative)[y] = run;
  }
  masses_ = std::move(masses);
  cumulative_ = std::move(cumulative);
}

double ScoreDistribution::pmf(long y) const noexcept {
  if (y < 0 || static_cast<std::size_t>(y) >= masses_->size()) return 0.0;
  return (*masses_)[static_cast<std::size_t>(y)];
}

double ScoreDistribution::cdf(long y) const noexcept {
  if (y < 0) return 0.0;
  if (static_cast<std::size_t>(y) >= cumulative_->size()) return cumulative_->back();
  return (*cumulative_)[static_cast<std::size_t>(y)];
}

int ScoreDistribution::sample(Rng& rng) const {
  if (kind_ == ScoreKind::rounded_gaussian) {
    const double x = dispersion_ > 0.0 ? mean_ + std::sqrt(dispersion_) * rng.normal() : mean_;
    const double g = std::floor(x + 0.5);
    return g < 0.0 ? 0 : static_cast<int>(g);
  }
  const double u = rng.uniform() * cumulative_->back();
  auto it = std::upper_bound(cumulative_->begin(), cumulative_->end(), u);
  if (it == cumulative_->end()) --it;
  return static_cast<int>(it - cumulative_->begin());
}

OutcomeProbs outcome_probs(const ScoreDistribution& first, const ScoreDistribution& second) {
  auto p = first.masses();
  auto q = second.masses();
  OutcomeProbs out;
  for (std::size_t a = 0; a < p.size(); ++a) {
    if (p[a] == 0.0) continue;
    out.win += p[a] * second.cdf(static_cast<long>(a) - 1);
    out.draw += p[a] * second.pmf(static_cast<long>(a));
  }
  for (std::size_t b = 0; b < q.size(); ++b) {
    if (q[b] == 0.0) continue;
    out.loss += q[b] * first.cdf(static_cast<long>(b) - 1);
  }
  if (std::abs(out.sum() - 1.0) > 1e-6) {
    throw std::runtime_error("outcome probabilities do not sum to one; truncation too coarse");
  }
  return out;
}

double estimate_dispersion(const ModelFit& fit, std::span<const DesignRow> rows) {
  const std::size_t df = fit.active_count() + 1;
  if (rows.size() <= df) {
    throw std::invalid_argument("dispersion needs more observations (" + std::to_string(rows.size()) +
                                ") than degrees of freedom (" + std::to_string(df) + ")");
  }
  double sum = 0.0;
  for (const auto& row : rows) {
    const double mu = predict_mean(fit, row);
    const double r = row.response_goals - mu;
    sum += r * r / fit.family.variance(mu);
  }
  return sum / static_cast<double>(rows.size() - df);
}

}  // namespace handball
