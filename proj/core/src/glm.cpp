#include "handball/glm.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include <boost/math/tools/minima.hpp>

#include "handball/parallel.hpp"
#include "handball/rng.hpp"

namespace handball {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMaxEta = 700.0;

double xlogy_ratio(double y, double mu) { return y > 0.0 ? y * std::log(y / mu) : 0.0; }

struct State {
  double intercept = 0.0;
  std::vector<double> beta;
  std::vector<double> eta;
};

void refresh_eta(const Dataset& data, State& s) {
  s.eta.assign(data.n, s.intercept);
  for (std::size_t j = 0; j < data.p; ++j) {
    if (s.beta[j] == 0.0) continue;
    auto col = data.column(j);
    for (std::size_t i = 0; i < data.n; ++i) s.eta[i] += s.beta[j] * col[i];
  }
}

double max_change(const State& a, const State& b) {
  double m = std::abs(a.intercept - b.intercept);
  for (std::size_t j = 0; j < a.beta.size(); ++j) m = std::max(m, std::abs(a.beta[j] - b.beta[j]));
  return m;
}

double mean_response(const Dataset& data) {
  return std::accumulate(data.y.begin(), data.y.end(), 0.0) / static_cast<double>(data.n);
}

double null_intercept(const Dataset& data, const Family& family) {
  double ybar = mean_response(data);
  return family.log_link() ? std::log(ybar) : ybar;
}

void check_data(const Dataset& data, const Family& family) {
  if (data.n < 2) throw std::invalid_argument("need at least two observations");
  if (data.x.size() != data.n * data.p || data.y.size() != data.n) {
    throw std::invalid_argument("dataset dimensions are inconsistent");
  }
  if (family.log_link()) {
    for (double y : data.y) {
      if (y < 0.0) throw std::invalid_argument("negative response under a count family");
    }
    if (mean_response(data) <= 0.0) throw std::invalid_argument("all responses are zero");
  }
}

bool has_variation(const Dataset& data) {
  return std::any_of(data.y.begin(), data.y.end(), [&](double y) { return y != data.y.front(); });
}

std::vector<double> make_lambdas(const Dataset& data, const Family& family, const PathOptions& opt) {
  if (!opt.lambdas.empty()) {
    for (std::size_t l = 0; l < opt.lambdas.size(); ++l) {
      if (!(opt.lambdas[l] > 0.0) || (l > 0 && opt.lambdas[l] > opt.lambdas[l - 1])) {
        throw std::invalid_argument("explicit lambdas must be positive and non-increasing");
      }
    }
    return opt.lambdas;
  }
  if (opt.n_lambda < 2) throw std::invalid_argument("n_lambda must be at least 2");
  double top = lambda_max(data, family);
  if (!(top > 0.0)) top = 1.0;
  std::vector<double> lambdas(opt.n_lambda);
  for (std::size_t l = 0; l < opt.n_lambda; ++l) {
    double frac = static_cast<double>(l) / static_cast<double>(opt.n_lambda - 1);
    lambdas[l] = top * std::pow(opt.lambda_min_ratio, frac);
  }
  return lambdas;
}

/// Weighted Lasso on the working response by cyclic coordinate descent with
/// active-set iterations. `resid` holds z - eta on entry and on exit.
class CoordinateDescent {
 public:
  CoordinateDescent(const Dataset& data, std::span<const double> w, double lambda, const PathOptions& opt,
                    std::size_t lambda_index)
      : data_(data), w_(w), lambda_(lambda), opt_(opt), lambda_index_(lambda_index), xwx_(data.p, 0.0) {
    const double inv_n = 1.0 / static_cast<double>(data.n);
    for (std::size_t j = 0; j < data.p; ++j) {
      auto col = data.column(j);
      double s = 0.0;
      for (std::size_t i = 0; i < data.n; ++i) s += w[i] * col[i] * col[i];
      xwx_[j] = s * inv_n;
    }
    wsum_ = std::accumulate(w.begin(), w.end(), 0.0);
  }

  /// `on_sweep` is invoked after every sweep.
  template <class OnSweep>
  void run(State& s, std::vector<double>& resid, std::size_t& sweeps, OnSweep&& on_sweep) {
    for (;;) {
      double change = sweep(s, resid, false);
      count(sweeps);
      on_sweep();
      if (change < opt_.tol) return;
      for (;;) {
        change = sweep(s, resid, true);
        count(sweeps);
        on_sweep();
        if (change < opt_.tol) break;
      }
    }
  }

 private:
  void count(std::size_t& sweeps) const {
    if (++sweeps > opt_.max_sweeps) {
      std::ostringstream os;
      os << "coordinate descent did not converge within " << opt_.max_sweeps << " sweeps at lambda index "
         << lambda_index_;
      throw ConvergenceError(lambda_index_, os.str());
    }
  }

  double sweep(State& s, std::vector<double>& resid, bool active_only) {
    const std::size_t n = data_.n;
    const double inv_n = 1.0 / static_cast<double>(n);
    double change = 0.0;

    if (wsum_ > 0.0) {
      double d = 0.0;
      for (std::size_t i = 0; i < n; ++i) d += w_[i] * resid[i];
      d /= wsum_;
      if (d != 0.0) {
        s.intercept += d;
        for (std::size_t i = 0; i < n; ++i) resid[i] -= d;
        change = std::abs(d);
      }
    }

    for (std::size_t j = 0; j < data_.p; ++j) {
      if (active_only && s.beta[j] == 0.0) continue;
      if (xwx_[j] <= 0.0) continue;
      auto col = data_.column(j);
      double g = 0.0;
      for (std::size_t i = 0; i < n; ++i) g += w_[i] * col[i] * resid[i];
      g = g * inv_n + xwx_[j] * s.beta[j];
      double updated = soft_threshold(g, lambda_) / xwx_[j];
      double d = updated - s.beta[j];
      if (d == 0.0) continue;
      s.beta[j] = updated;
      for (std::size_t i = 0; i < n; ++i) resid[i] -= d * col[i];
      change = std::max(change, std::abs(d));
    }
    return change;
  }

  const Dataset& data_;
  std::span<const double> w_;
  double lambda_;
  const PathOptions& opt_;
  std::size_t lambda_index_;
  std::vector<double> xwx_;
  double wsum_ = 0.0;
};

/// Solves the penalized problem at one lambda starting from `s`.
void solve_at(const Dataset& data, const Family& family, double lambda, State& s, const PathOptions& opt,
              std::size_t lambda_index) {
  const std::size_t n = data.n;
  std::size_t sweeps = 0;

  if (family.kind == FamilyKind::gaussian) {
    std::vector<double> w(n, 1.0);
    std::vector<double> resid(n);
    for (std::size_t i = 0; i < n; ++i) resid[i] = data.y[i] - s.eta[i];
    CoordinateDescent cd(data, w, lambda, opt, lambda_index);
    cd.run(s, resid, sweeps, [&] {
      if (opt.trace) opt.trace(lambda_index, penalized_objective(data, family, s.intercept, s.beta, lambda));
    });
    for (std::size_t i = 0; i < n; ++i) s.eta[i] = data.y[i] - resid[i];
    return;
  }

  std::vector<double> w(n), resid(n);
  double objective = penalized_objective(data, family, s.intercept, s.beta, lambda);
  while (sweeps <= opt.max_sweeps) {
    for (std::size_t i = 0; i < n; ++i) {
      double eta = std::min(s.eta[i], kMaxEta);
      w[i] = family.irls_weight(eta);
      double mu = family.mean(eta);
      resid[i] = (data.y[i] - mu) / mu;
    }
    State previous = s;
    CoordinateDescent cd(data, w, lambda, opt, lambda_index);
    cd.run(s, resid, sweeps, [] {});
    refresh_eta(data, s);

    double updated = penalized_objective(data, family, s.intercept, s.beta, lambda);
    // Step halving keeps the outer iteration monotone.
    for (int halvings = 0; updated > objective + 1e-13 * std::abs(objective) && halvings < 50; ++halvings) {
      s.intercept = 0.5 * (s.intercept + previous.intercept);
      for (std::size_t j = 0; j < data.p; ++j) s.beta[j] = 0.5 * (s.beta[j] + previous.beta[j]);
      refresh_eta(data, s);
      updated = penalized_objective(data, family, s.intercept, s.beta, lambda);
    }
    if (opt.trace) opt.trace(lambda_index, updated);
    objective = std::min(objective, updated);
    if (max_change(s, previous) < opt.tol) return;
  }
  std::ostringstream os;
  os << "IRLS did not converge within " << opt.max_sweeps << " sweeps at lambda index " << lambda_index;
  throw ConvergenceError(lambda_index, os.str());
}

State null_state(const Dataset& data, const Family& family) {
  State s;
  s.intercept = null_intercept(data, family);
  s.beta.assign(data.p, 0.0);
  s.eta.assign(data.n, s.intercept);
  return s;
}

void record(PathResult& path, const State& s, double theta) {
  path.intercepts.push_back(s.intercept);
  path.coefficients.insert(path.coefficients.end(), s.beta.begin(), s.beta.end());
  path.nb_theta.push_back(theta);
}


}  // namespace

// Family ---------------------------------------------------------------------

std::string_view to_string(FamilyKind kind) {
  switch (kind) {
    case FamilyKind::gaussian: return "gaussian";
    case FamilyKind::poisson: return "poisson";
    case FamilyKind::negbin: return "negbin";
  }
  return "gaussian";
}

std::string_view to_string(LambdaRule rule) { return rule == LambdaRule::min ? "min" : "1se"; }

Family Family::negbin(double theta) {
  if (!(theta > 0.0)) throw std::invalid_argument("negative binomial size must be positive");
  return {FamilyKind::negbin, theta, false};
}

double Family::mean(double eta) const { return log_link() ? std::exp(std::min(eta, kMaxEta)) : eta; }

double Family::variance(double mu) const {
  switch (kind) {
    case FamilyKind::gaussian: return 1.0;
    case FamilyKind::poisson: return mu;
    case FamilyKind::negbin: return std::isfinite(nb_theta) ? mu + mu * mu / nb_theta : mu;
  }
  return 1.0;
}

double Family::unit_deviance(double y, double mu) const {
  switch (kind) {
    case FamilyKind::gaussian: return (y - mu) * (y - mu);
    case FamilyKind::poisson: return 2.0 * (xlogy_ratio(y, mu) - (y - mu));
    case FamilyKind::negbin:
      if (!std::isfinite(nb_theta)) return 2.0 * (xlogy_ratio(y, mu) - (y - mu));
      return 2.0 * (xlogy_ratio(y, mu) - (y + nb_theta) * std::log((y + nb_theta) / (mu + nb_theta)));
  }
  return 0.0;
}

double Family::neg_loglik(double y, double eta) const {
  switch (kind) {
    case FamilyKind::gaussian: return 0.5 * (y - eta) * (y - eta);
    case FamilyKind::poisson: return mean(eta) - y * eta;
    case FamilyKind::negbin: {
      if (!std::isfinite(nb_theta)) return mean(eta) - y * eta;
      double mu = mean(eta);
      // (y + theta) log(1 + mu/theta) differs from (y + theta) log(mu + theta)
      // by a term free of eta and stays well conditioned for large theta.
      return (y + nb_theta) * std::log1p(mu / nb_theta) - y * eta;
    }
  }
  return 0.0;
}

double Family::score(double y, double eta) const {
  switch (kind) {
    case FamilyKind::gaussian: return y - eta;
    case FamilyKind::poisson: return y - mean(eta);
    case FamilyKind::negbin: {
      double mu = mean(eta);
      if (!std::isfinite(nb_theta)) return y - mu;
      return (y - mu) * nb_theta / (nb_theta + mu);
    }
  }
  return 0.0;
}

double Family::irls_weight(double eta) const {
  switch (kind) {
    case FamilyKind::gaussian: return 1.0;
    case FamilyKind::poisson: return mean(eta);
    case FamilyKind::negbin: {
      double mu = mean(eta);
      if (!std::isfinite(nb_theta)) return mu;
      return mu * nb_theta / (mu + nb_theta);
    }
  }
  return 1.0;
}

// Dataset --------------------------------------------------------------------

Dataset Dataset::from_rows(std::span<const DesignRow> rows) {
  Dataset d;
  d.n = rows.size();
  d.p = kFeatureCount;
  d.x.resize(d.n * d.p);
  d.y.resize(d.n);
  d.group.resize(d.n);
  for (std::size_t i = 0; i < d.n; ++i) {
    const DesignRow& r = rows[i];
    for (std::size_t j = 0; j < d.p; ++j) d.x[j * d.n + i] = r.feature(j);
    d.y[i] = r.response_goals;
    d.group[i] = r.match_index;
  }
  return d;
}

Dataset Dataset::from_matrix(std::size_t n, std::size_t p, std::span<const double> row_major,
                             std::span<const double> y, std::span<const std::size_t> group) {
  if (row_major.size() != n * p || y.size() != n || (!group.empty() && group.size() != n)) {
    throw std::invalid_argument("from_matrix: dimension mismatch");
  }
  Dataset d;
  d.n = n;
  d.p = p;
  d.x.resize(n * p);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < p; ++j) d.x[j * n + i] = row_major[i * p + j];
  }
  d.y.assign(y.begin(), y.end());
  if (group.empty()) {
    d.group.resize(n);
    std::iota(d.group.begin(), d.group.end(), std::size_t{0});
  } else {
    d.group.assign(group.begin(), group.end());
  }
  return d;
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  Dataset d;
  d.n = rows.size();
  d.p = p;
  d.x.resize(d.n * p);
  d.y.resize(d.n);
  d.group.resize(d.n);
  for (std::size_t k = 0; k < d.n; ++k) {
    std::size_t i = rows[k];
    for (std::size_t j = 0; j < p; ++j) d.x[j * d.n + k] = x[j * n + i];
    d.y[k] = y[i];
    d.group[k] = group[i];
  }
  return d;
}

// Solver ---------------------------------------------------------------------

double soft_threshold(double z, double gamma) {
  if (z > gamma) return z - gamma;
  if (z < -gamma) return z + gamma;
  return 0.0;
}

double lambda_max(const Dataset& data, const Family& family) {
  check_data(data, family);
  const double eta0 = null_intercept(data, family);
  double top = 0.0;
  for (std::size_t j = 0; j < data.p; ++j) {
    auto col = data.column(j);
    double g = 0.0;
    for (std::size_t i = 0; i < data.n; ++i) g += col[i] * family.score(data.y[i], eta0);
    top = std::max(top, std::abs(g) / static_cast<double>(data.n));
  }
  return top;
}

double penalized_objective(const Dataset& data, const Family& family, double intercept,
                           std::span<const double> beta, double lambda) {
  double loss = 0.0;
  for (std::size_t i = 0; i < data.n; ++i) {
    double eta = intercept;
    for (std::size_t j = 0; j < data.p; ++j) eta += data.at(i, j) * beta[j];
    loss += family.neg_loglik(data.y[i], eta);
  }
  double l1 = 0.0;
  for (double b : beta) l1 += std::abs(b);
  return loss / static_cast<double>(data.n) + lambda * l1;
}

double kkt_violation(const Dataset& data, const Family& family, double intercept, std::span<const double> beta,
                     double lambda) {
  const double inv_n = 1.0 / static_cast<double>(data.n);
  std::vector<double> score(data.n);
  for (std::size_t i = 0; i < data.n; ++i) {
    double eta = intercept;
    for (std::size_t j = 0; j < data.p; ++j) eta += data.at(i, j) * beta[j];
    score[i] = family.score(data.y[i], eta);
  }
  double worst = std::abs(std::accumulate(score.begin(), score.end(), 0.0) * inv_n);
  for (std::size_t j = 0; j < data.p; ++j) {
    auto col = data.column(j);
    double g = 0.0;
    for (std::size_t i = 0; i < data.n; ++i) g += col[i] * score[i];
    g *= inv_n;
    double v = beta[j] != 0.0 ? std::abs(g - lambda * (beta[j] > 0.0 ? 1.0 : -1.0))
                              : std::max(0.0, std::abs(g) - lambda);
    worst = std::max(worst, v);
  }
  return worst;
}

PathResult fit_path(const Dataset& data, const Family& family, const PathOptions& options) {
  if (family.kind == FamilyKind::negbin && family.estimate_theta) return fit_negbin_path(data, options);
  check_data(data, family);
  if (!has_variation(data)) throw std::invalid_argument("need at least two distinct response values");

  PathResult path;
  path.p = data.p;
  path.lambdas = make_lambdas(data, family, options);
  const double top = lambda_max(data, family);
  const double theta = family.kind == FamilyKind::negbin ? family.nb_theta : kInf;

  State s = null_state(data, family);
  for (std::size_t l = 0; l < path.lambdas.size(); ++l) {
    if (path.lambdas[l] < top * (1.0 - 1e-12)) solve_at(data, family, path.lambdas[l], s, options, l);
    record(path, s, theta);
  }
  return path;
}

double estimate_nb_theta(std::span<const double> y, std::span<const double> mu) {
  if (y.size() != mu.size() || y.empty()) throw std::invalid_argument("estimate_nb_theta: size mismatch");
  // Profile log-likelihood up to terms free of theta. For integer counts
  // lgamma(y + theta) - lgamma(theta) - y log(theta + mu) is summed as
  // log1p terms, which stays accurate when theta is large.
  auto neg_profile = [&](double log_theta) {
    const double theta = std::exp(log_theta);
    double ll = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double m = mu[i];
      const double yi = y[i];
      if (yi == std::floor(yi) && yi < 1e4) {
        for (double k = 0; k < yi; k += 1.0) ll += std::log1p((k - m) / (theta + m));
      } else {
        ll += std::lgamma(yi + theta) - std::lgamma(theta) - yi * std::log(theta + m);
      }
      ll -= theta * std::log1p(m / theta);
    }
    return -ll;
  };
  const double lo = std::log(1e-3);
  const double hi = std::log(kThetaCap);
  std::uintmax_t iters = 200;
  auto [arg, value] =
      boost::math::tools::brent_find_minima(neg_profile, lo, hi, std::numeric_limits<double>::digits / 2, iters);
  (void)value;
  if (arg > hi - 1e-2) return kInf;
  return std::exp(arg);
}

PathResult fit_negbin_path(const Dataset& data, const PathOptions& options) {
  check_data(data, Family::poisson());

  PathResult path;
  path.p = data.p;
  const double ybar = mean_response(data);
  std::vector<double> mu0(data.n, ybar);
  double theta = estimate_nb_theta(data.y, mu0);

  if (!has_variation(data)) {
    // Constant response: the intercept-only fit is exact at every penalty.
    PathOptions opt = options;
    path.lambdas = make_lambdas(data, Family::poisson(), opt);
    State s = null_state(data, Family::poisson());
    for (std::size_t l = 0; l < path.lambdas.size(); ++l) record(path, s, kInf);
    return path;
  }

  Family family = std::isfinite(theta) ? Family::negbin(theta) : Family{FamilyKind::negbin, kInf, false};
  path.lambdas = make_lambdas(data, family, options);
  const double top = lambda_max(data, family);

  State s = null_state(data, family);
  std::vector<double> mu(data.n);
  for (std::size_t l = 0; l < path.lambdas.size(); ++l) {
    const double lambda = path.lambdas[l];
    if (lambda >= top * (1.0 - 1e-12)) {
      record(path, s, theta);
      continue;
    }
    bool converged = false;
    for (int round = 0; round < 200 && !converged; ++round) {
      State previous = s;
      Family current{FamilyKind::negbin, theta, false};
      solve_at(data, current, lambda, s, options, l);
      for (std::size_t i = 0; i < data.n; ++i) mu[i] = current.mean(s.eta[i]);
      double updated = estimate_nb_theta(data.y, mu);
      // The fit sees theta only through the variance factor 1 + mu / theta.
      const double dfactor = std::abs(ybar / updated - ybar / theta);
      converged = dfactor < 1e-6 && max_change(s, previous) < options.tol;
      theta = updated;
    }
    if (!converged) {
      throw ConvergenceError(l, "negative binomial alternation did not converge at lambda index " +
                                    std::to_string(l));
    }
    record(path, s, theta);
  }
  return path;
}

// Cross-validation -----------------------------------------------------------

std::vector<std::size_t> assign_folds(std::span<const std::size_t> group, std::size_t folds, std::uint64_t seed) {
  if (folds < 2) throw std::invalid_argument("need at least two folds");
  std::vector<std::size_t> ids(group.begin(), group.end());
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());

  // Fisher-Yates on the sorted distinct groups.
  Rng rng(seed);
  for (std::size_t i = ids.size(); i > 1; --i) std::swap(ids[i - 1], ids[rng.below(i)]);

  std::map<std::size_t, std::size_t> fold_of;
  for (std::size_t pos = 0; pos < ids.size(); ++pos) fold_of[ids[pos]] = pos % folds;
  std::vector<std::size_t> out(group.size());
  for (std::size_t i = 0; i < group.size(); ++i) out[i] = fold_of[group[i]];
  return out;
}

void select_lambdas(CvResult& cv) {
  const std::size_t m = cv.cv_mean.size();
  if (m == 0) throw std::invalid_argument("empty cross-validation curve");
  std::size_t best = 0;
  for (std::size_t l = 1; l < m; ++l) {
    if (cv.cv_mean[l] < cv.cv_mean[best]) best = l;
  }
  const double threshold = cv.cv_mean[best] + cv.cv_se[best];
  std::size_t sparse = best;
  for (std::size_t l = 0; l <= best; ++l) {
    if (cv.cv_mean[l] <= threshold) {
      sparse = l;
      break;
    }
  }
  cv.index_min = best;
  cv.index_1se = sparse;
  cv.lambda_min = cv.lambdas[best];
  cv.lambda_1se = cv.lambdas[sparse];
}

namespace {

CvResult cross_validate_on_path(const Dataset& data, const Family& family, const PathResult& full,
                                const PathOptions& path_options, const CvOptions& cv_options) {
  const std::size_t k = cv_options.folds;
  CvResult cv;
  cv.lambdas = full.lambdas;
  cv.fold = assign_folds(data.group, k, cv_options.seed);

  std::vector<std::vector<std::size_t>> train(k), test(k);
  for (std::size_t i = 0; i < data.n; ++i) {
    for (std::size_t f = 0; f < k; ++f) (cv.fold[i] == f ? test[f] : train[f]).push_back(i);
  }
  for (std::size_t f = 0; f < k; ++f) {
    if (test[f].size() < 2 || train[f].size() < 2) {
      throw std::invalid_argument("fold " + std::to_string(f) + " has fewer than two observations");
    }
  }

  PathOptions opt = path_options;
  opt.lambdas = full.lambdas;
  opt.trace = nullptr;
  const std::size_t m = full.size();
  std::vector<std::vector<double>> fold_dev(k, std::vector<double>(m, 0.0));

  parallel_for(k, cv_options.threads, [&](std::size_t f) {
    Dataset tr = data.subset(train[f]);
    PathResult path = fit_path(tr, family, opt);
    for (std::size_t l = 0; l < m; ++l) {
      Family at = family;
      if (family.kind == FamilyKind::negbin) at = Family{FamilyKind::negbin, path.nb_theta[l], false};
      auto beta = path.coef(l);
      double dev = 0.0;
      for (std::size_t i : test[f]) {
        double eta = path.intercepts[l];
        for (std::size_t j = 0; j < data.p; ++j) eta += data.at(i, j) * beta[j];
        dev += at.unit_deviance(data.y[i], at.mean(eta));
      }
      fold_dev[f][l] = dev / static_cast<double>(test[f].size());
    }
  });

  cv.cv_mean.assign(m, 0.0);
  cv.cv_se.assign(m, 0.0);
  for (std::size_t l = 0; l < m; ++l) {
    double mean = 0.0;
    for (std::size_t f = 0; f < k; ++f) mean += fold_dev[f][l];
    mean /= static_cast<double>(k);
    double ss = 0.0;
    for (std::size_t f = 0; f < k; ++f) ss += (fold_dev[f][l] - mean) * (fold_dev[f][l] - mean);
    cv.cv_mean[l] = mean;
    cv.cv_se[l] = std::sqrt(ss / static_cast<double>(k - 1) / static_cast<double>(k));
  }
  select_lambdas(cv);
  return cv;
}

}  // namespace

CvResult cross_validate(const Dataset& data, const Family& family, const PathOptions& path_options,
                        const CvOptions& cv_options) {
  PathResult full = fit_path(data, family, path_options);
  return cross_validate_on_path(data, family, full, path_options, cv_options);
}

// Model fit ------------------------------------------------------------------

ModelFit ModelFit::select(LambdaRule r) const {
  ModelFit out = *this;
  out.rule = r;
  std::size_t idx = r == LambdaRule::min ? index_min : index_1se;
  out.intercept = path.intercepts.at(idx);
  auto beta = path.coef(idx);
  out.coefficients.assign(beta.begin(), beta.end());
  if (family.kind == FamilyKind::negbin) {
    out.family = Family{FamilyKind::negbin, path.nb_theta.at(idx), false};
  }
  return out;
}

std::size_t ModelFit::active_count() const {
  return static_cast<std::size_t>(
      std::count_if(coefficients.begin(), coefficients.end(), [](double b) { return b != 0.0; }));
}

ModelFit fit_model(std::span<const DesignRow> rows, const Family& family, const FitOptions& options) {
  auto [scaled, scaling] = standardize(rows);
  Dataset data = Dataset::from_rows(scaled);
  PathResult path = fit_path(data, family, options.path);
  CvResult cv = cross_validate_on_path(data, family, path, options.path, options.cv);

  ModelFit fit;
  fit.family = family;
  fit.lambda_path = cv.lambdas;
  fit.cv_mean = std::move(cv.cv_mean);
  fit.cv_se = std::move(cv.cv_se);
  fit.lambda_min = cv.lambda_min;
  fit.lambda_1se = cv.lambda_1se;
  fit.index_min = cv.index_min;
  fit.index_1se = cv.index_1se;
  fit.scaling = std::move(scaling);
  fit.path = std::move(path);
  return fit.select(options.rule);
}

double predict_eta(const ModelFit& fit, const DesignRow& row) {
  double eta = fit.intercept;
  for (std::size_t j = 0; j < fit.coefficients.size(); ++j) eta += fit.coefficients[j] * row.feature(j);
  return eta;
}

double predict_mean(const ModelFit& fit, const DesignRow& row) { return fit.family.mean(predict_eta(fit, row)); }

}  // namespace handball
