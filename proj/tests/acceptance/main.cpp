// Acceptance suite. Prints one PASS/FAIL line per criterion; `--only N`
// runs a single criterion. Exit status is nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/negative_binomial.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/poisson.hpp>

#include "commands.hpp"
#include "handball/counts.hpp"
#include "handball/evaluation.hpp"
#include "handball/glm.hpp"
#include "handball/standings.hpp"
#include "handball/tournament.hpp"
#include "standings_fixtures.hpp"
#include "test_support.hpp"

using namespace handball;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* pattern, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, pattern, args...);
  return buf;
}

// 1 -------------------------------------------------------------------------

Verdict lasso_oracle() {
  Rng rng(1);
  const std::size_t n = 50, p = 10;
  const auto x = test::orthonormal_matrix(n, p, rng);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = 1.0 + rng.normal();
    for (std::size_t j = 0; j < p; ++j) y[i] += (j % 3 == 0 ? 0.8 : 0.1 * static_cast<double>(j)) * x[i * p + j];
  }
  const auto data = Dataset::from_matrix(n, p, x, y);
  std::vector<double> z(p, 0.0);
  for (std::size_t j = 0; j < p; ++j) {
    for (std::size_t i = 0; i < n; ++i) z[j] += x[i * p + j] * y[i] / static_cast<double>(n);
  }

  Stopwatch clock;
  const auto path = fit_path(data, Family::gaussian());
  const double elapsed = clock.seconds();

  double worst = 0.0;
  for (std::size_t l = 0; l < path.size(); ++l) {
    for (std::size_t j = 0; j < p; ++j) worst = std::max(worst, std::abs(path.coef(l)[j] - soft_threshold(z[j], path.lambdas[l])));
  }
  return {path.size() == 100 && worst <= 1e-6 && elapsed < 1.0,
          fmt("%zu lambdas, max abs error %.2e, %.3f s", path.size(), worst, elapsed)};
}

// 2 -------------------------------------------------------------------------

Verdict kkt_certification() {
  const std::size_t n = 300, p = 12;
  double worst = 0.0;
  std::size_t fits = 0;
  std::string failures;
  for (int family = 0; family < 4; ++family) {
    for (std::uint64_t instance = 0; instance < 20; ++instance) {
      Rng rng(derive_seed(200 + family, instance));
      const auto x = test::normal_matrix(n, p, rng);
      std::vector<double> beta(p, 0.0);
      for (std::size_t j = 0; j < 4; ++j) beta[rng.below(p)] = (rng.uniform() - 0.5) * 0.6;
      std::vector<double> y(n);
      for (std::size_t i = 0; i < n; ++i) {
        double eta = 0.0;
        for (std::size_t j = 0; j < p; ++j) eta += x[i * p + j] * beta[j];
        switch (family) {
          case 0: y[i] = 25.0 + 5.0 * eta + 4.0 * rng.normal(); break;
          case 1: y[i] = test::poisson_draw(std::exp(3.2 + eta), rng); break;
          case 2: y[i] = ScoreDistribution::double_poisson(std::exp(3.2 + eta), 0.74).sample(rng); break;
          default: y[i] = test::negbin_draw(std::exp(3.2 + eta), 15.0, rng); break;
        }
      }
      const auto data = Dataset::from_matrix(n, p, x, y);
      try {
        const Family fam = family == 0 ? Family::gaussian() : family == 3 ? Family::negbin_estimated() : Family::poisson();
        const auto path = fit_path(data, fam);
        for (std::size_t l = 0; l < path.size(); ++l) {
          const Family at = family == 3 ? Family::negbin(path.nb_theta[l]) : fam;
          worst = std::max(worst, kkt_violation(data, at, path.intercepts[l], path.coef(l), path.lambdas[l]));
        }
        ++fits;
      } catch (const ConvergenceError& e) {
        failures += fmt(" [family %d instance %llu: %s]", family, static_cast<unsigned long long>(instance), e.what());
      }
    }
  }
  return {fits > 0 && worst <= 1e-5,
          fmt("%zu converged fits of 80, worst violation %.2e", fits, worst) + failures};
}

// 3 -------------------------------------------------------------------------

Verdict support_recovery() {
  const std::size_t n = 2000, p = 20;
  const std::vector<std::size_t> truth{1, 4, 9, 13, 17};
  const std::vector<double> effects{0.3, -0.35, 0.4, -0.3, 0.45};
  Stopwatch clock;
  int good = 0;
  std::string per_seed;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Rng rng(derive_seed(3000, seed));
    const auto x = test::normal_matrix(n, p, rng);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      double eta = std::log(27.0);
      for (std::size_t k = 0; k < truth.size(); ++k) eta += effects[k] * x[i * p + truth[k]];
      y[i] = test::poisson_draw(std::exp(eta), rng);
    }
    const auto data = Dataset::from_matrix(n, p, x, y);
    CvOptions cv;
    cv.seed = seed;
    const auto result = cross_validate(data, Family::poisson(), {}, cv);
    const auto path = fit_path(data, Family::poisson());
    const auto beta = path.coef(result.index_min);
    int missed = 0, false_in = 0;
    for (std::size_t j = 0; j < p; ++j) {
      const bool active = beta[j] != 0.0;
      const bool real = std::find(truth.begin(), truth.end(), j) != truth.end();
      missed += real && !active;
      false_in += active && !real;
    }
    if (missed == 0 && false_in <= 1) ++good;
    int false_1se = 0;
    for (std::size_t j = 0; j < p; ++j) {
      false_1se += path.coef(result.index_1se)[j] != 0.0 && std::find(truth.begin(), truth.end(), j) == truth.end();
    }
    per_seed += fmt(" %d/%d(1se %d)", missed, false_in, false_1se);
  }
  const double elapsed = clock.seconds();
  return {good >= 9 && elapsed < 30.0,
          fmt("%d of 10 seeds recover the support at lambda_min, %.1f s; missed/false per seed:", good, elapsed) + per_seed};
}

// 4 -------------------------------------------------------------------------

std::vector<DesignRow> simulated_rows(std::size_t matches, bool double_poisson, Rng& rng) {
  std::vector<DesignRow> rows;
  auto base = test::team("A");
  for (std::size_t m = 0; m < matches; ++m) {
    auto a = base, b = base;
    a.ihf_points = 100.0 + 30.0 * rng.normal();
    b.ihf_points = 100.0 + 30.0 * rng.normal();
    a.avg_height = 1.92 + 0.03 * rng.normal();
    b.avg_height = 1.92 + 0.03 * rng.normal();
    auto [ra, rb] = design_pair(a, b);
    const double diff = (a.ihf_points - b.ihf_points) / 42.0;
    const double mu_a = std::exp(3.3 + 0.15 * diff), mu_b = std::exp(3.3 - 0.15 * diff);
    if (double_poisson) {
      ra.response_goals = ScoreDistribution::double_poisson(mu_a, 0.74).sample(rng);
      rb.response_goals = ScoreDistribution::double_poisson(mu_b, 0.74).sample(rng);
    } else {
      ra.response_goals = test::poisson_draw(mu_a, rng);
      rb.response_goals = test::poisson_draw(mu_b, rng);
    }
    ra.match_index = rb.match_index = m;
    rows.push_back(std::move(ra));
    rows.push_back(std::move(rb));
  }
  return rows;
}

Verdict dispersion_estimator() {
  Rng rng(4);
  const auto pois = simulated_rows(2500, false, rng);
  const auto dp = simulated_rows(2500, true, rng);
  const double phi_pois = fit_score_model(pois, ScoreFamily::poisson).fit.phi_hat;
  const double phi_dp = fit_score_model(dp, ScoreFamily::dpoisson).dispersion;
  const bool ok = phi_pois >= 0.93 && phi_pois <= 1.07 && phi_dp >= 0.68 && phi_dp <= 0.80;
  return {ok, fmt("N = %zu; Poisson data %.4f, double Poisson (0.74) data %.4f", pois.size(), phi_pois, phi_dp)};
}

// 5 -------------------------------------------------------------------------

Verdict double_poisson_law() {
  const auto d = ScoreDistribution::double_poisson(30.0, 0.74);
  Rng rng(5);
  const int n = 1000000;
  double s = 0.0, ss = 0.0;
  for (int i = 0; i < n; ++i) {
    const double y = d.sample(rng);
    s += y;
    ss += y * y;
  }
  const double mean = s / n;
  const double var = (ss - n * mean * mean) / (n - 1);
  double total = 0.0;
  for (double m : d.masses()) total += m;
  const double sum_error = std::abs(total + d.tail_mass() - 1.0);
  return {std::abs(mean - 30.0) <= 0.05 && std::abs(var - 22.2) <= 0.6 && sum_error <= 1e-9,
          fmt("mean %.4f, variance %.4f, |pmf sum - 1| %.1e", mean, var, sum_error)};
}

// 6 -------------------------------------------------------------------------

struct OutcomeCase {
  ScoreKind kind;
  double mu1, mu2, dispersion;
};

std::string describe(const OutcomeCase& c) {
  return fmt("%s(%.2f, %.2f; %.3g)", std::string(to_string(c.kind)).c_str(), c.mu1, c.mu2, c.dispersion);
}

ScoreDistribution make(const OutcomeCase& c, double mu) {
  switch (c.kind) {
    case ScoreKind::poisson: return ScoreDistribution::poisson(mu);
    case ScoreKind::double_poisson: return ScoreDistribution::double_poisson(mu, c.dispersion);
    case ScoreKind::negbin: return ScoreDistribution::negbin(mu, c.dispersion);
    default: return ScoreDistribution::rounded_gaussian(mu, c.dispersion);
  }
}

/// Point masses on 0..200 computed independently of ScoreDistribution.
std::vector<double> oracle_masses(const OutcomeCase& c, double mu) {
  std::vector<double> p(201);
  for (int y = 0; y <= 200; ++y) {
    switch (c.kind) {
      case ScoreKind::poisson: p[y] = boost::math::pdf(boost::math::poisson_distribution<>(mu), y); break;
      case ScoreKind::double_poisson: p[y] = double_poisson_pmf(y, mu, 1.0 / c.dispersion); break;
      case ScoreKind::negbin:
        p[y] = boost::math::pdf(boost::math::negative_binomial_distribution<>(c.dispersion, c.dispersion / (c.dispersion + mu)), y);
        break;
      default: {
        const boost::math::normal_distribution<> z(mu, std::sqrt(c.dispersion));
        const double upper = boost::math::cdf(z, y + 0.5);
        p[y] = y == 0 ? upper : upper - boost::math::cdf(z, y - 0.5);
      }
    }
  }
  return p;
}

Verdict outcome_oracle() {
  Rng pick(6);
  std::vector<OutcomeCase> cases;
  const ScoreKind kinds[] = {ScoreKind::poisson, ScoreKind::double_poisson, ScoreKind::negbin, ScoreKind::rounded_gaussian};
  for (int i = 0; i < 20; ++i) {
    OutcomeCase c{kinds[i % 4], 15.0 + 20.0 * pick.uniform(), 15.0 + 20.0 * pick.uniform(), 1.0};
    if (c.kind == ScoreKind::double_poisson) c.dispersion = 0.5 + pick.uniform();
    if (c.kind == ScoreKind::negbin) c.dispersion = 20.0 + 180.0 * pick.uniform();
    if (c.kind == ScoreKind::rounded_gaussian) c.dispersion = 10.0 + 20.0 * pick.uniform();
    cases.push_back(c);
  }

  double exact_error = 0.0, worst_z = 0.0;
  std::string offenders;
  const std::uint64_t draws = 10000000;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const auto& c = cases[i];
    const auto a = make(c, c.mu1), b = make(c, c.mu2);
    const auto exact = outcome_probs(a, b);

    const auto pa = oracle_masses(c, c.mu1), pb = oracle_masses(c, c.mu2);
    double win = 0.0, draw = 0.0, loss = 0.0;
    for (int ya = 0; ya <= 200; ++ya) {
      for (int yb = 0; yb <= 200; ++yb) (ya > yb ? win : ya == yb ? draw : loss) += pa[ya] * pb[yb];
    }
    exact_error = std::max({exact_error, std::abs(exact.win - win), std::abs(exact.draw - draw), std::abs(exact.loss - loss)});

    Rng rng(derive_seed(66, i));
    std::uint64_t counts[3] = {0, 0, 0};
    for (std::uint64_t k = 0; k < draws; ++k) {
      const int ga = a.sample(rng), gb = b.sample(rng);
      ++counts[ga > gb ? 0 : ga == gb ? 1 : 2];
    }
    const double probs[3] = {exact.win, exact.draw, exact.loss};
    for (int o = 0; o < 3; ++o) {
      const double se = std::sqrt(probs[o] * (1.0 - probs[o]) / static_cast<double>(draws));
      const double z = std::abs(static_cast<double>(counts[o]) / static_cast<double>(draws) - probs[o]) / se;
      if (z > 3.0) offenders += " " + describe(c) + fmt(" outcome %d z=%.2f", o, z);
      worst_z = std::max(worst_z, z);
    }
  }
  return {exact_error <= 1e-9 && worst_z <= 3.0,
          fmt("20 cases; max exact error %.2e, max Monte Carlo |z| %.2f", exact_error, worst_z) + offenders};
}

// 7 -------------------------------------------------------------------------

Verdict metric_formulas() {
  const double r = rps({0.5, 0.3, 0.2}, Outcome::win);
  bool perfect = true;
  for (auto o : {Outcome::win, Outcome::draw, Outcome::loss}) {
    OutcomeProbs p;
    (o == Outcome::win ? p.win : o == Outcome::draw ? p.draw : p.loss) = 1.0;
    perfect = perfect && rps(p, o) == 0.0;
  }
  const auto odds = odds_to_probs(1.5, 4.0, 6.0);
  const bool odds_ok = std::abs(odds.win - 0.6154) <= 1e-4 && std::abs(odds.draw - 0.2308) <= 1e-4 &&
                       std::abs(odds.loss - 0.1538) <= 1e-4;
  return {std::abs(r - 0.145) <= 1e-15 && perfect && odds_ok,
          fmt("RPS %.17g, perfect forecasts %s, odds (%.4f, %.4f, %.4f)", r, perfect ? "0" : "nonzero", odds.win, odds.draw,
              odds.loss)};
}

// 8 -------------------------------------------------------------------------

Verdict standings_rules() {
  const auto tables = test::hand_tables();
  std::string wrong;
  for (const auto& t : tables) {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      Rng rng(seed);
      if (!test::matches_hand_order(t, rank_group(test::team_indices(t.teams), t.results, rng))) {
        wrong += " [" + t.name + "]";
        break;
      }
    }
  }
  const auto& symmetric = tables.back();
  const int lots = 10000;
  double first[3] = {0, 0, 0};
  for (int s = 0; s < lots; ++s) {
    Rng rng(derive_seed(8, static_cast<std::uint64_t>(s)));
    ++first[rank_group(test::team_indices(3), symmetric.results, rng).entries[0].team];
  }
  double chi2 = 0.0;
  for (double f : first) chi2 += (f - lots / 3.0) * (f - lots / 3.0) / (lots / 3.0);
  const double p_value = boost::math::cdf(boost::math::complement(boost::math::chi_squared_distribution<>(2), chi2));
  return {wrong.empty() && tables.size() >= 8 && p_value > 0.01,
          fmt("%zu tables, symmetric first places %.0f/%.0f/%.0f, chi2 %.3f, p %.3f", tables.size(), first[0], first[1],
              first[2], chi2, p_value) +
              (wrong.empty() ? "" : "; mismatches:" + wrong)};
}

// 9 -------------------------------------------------------------------------

Verdict simulator_symmetry() {
  auto covs = read_covariates_file(test::fixture("covariates.csv"));
  auto matches = read_matches_file(test::fixture("matches.csv"));
  const std::vector<int> years{2011, 2013, 2015, 2017};
  resolve_age_deviation(covs, years);
  const auto design = build_design(covs, matches);
  const auto model = fit_score_model(design.rows, ScoreFamily::dpoisson);

  const auto format = TournamentFormat::ihf2019();
  const auto teams = format.teams();
  const TeamCovariates* proto = nullptr;
  for (const auto& c : covs) {
    if (c.tournament_id == 2019 && c.team_id == "NOR") proto = &c;
  }
  std::vector<TeamCovariates> clones;
  for (const auto& t : teams) {
    auto c = *proto;
    c.team_id = t;
    clones.push_back(c);
  }
  const CovariateTable table(clones);
  const auto matchups = Matchups::from_model(model, table, 2019, teams);
  const TournamentSimulator sim(matchups, format);

  Stopwatch clock;
  const std::uint64_t runs = 100000;
  const auto summary = monte_carlo(sim, runs, 9, 1);
  const double elapsed = clock.seconds();

  const double p = 1.0 / 24.0;
  const double se = std::sqrt(p * (1.0 - p) / static_cast<double>(runs));
  double worst_z = 0.0, total = 0.0;
  bool monotone = true;
  for (std::size_t t = 0; t < summary.teams.size(); ++t) {
    worst_z = std::max(worst_z, std::abs(summary.p_champion(t) - p) / se);
    total += summary.p_champion(t);
    monotone = monotone && summary.main_round[t] >= summary.at_least[t][kSummaryRanks - 1];
    for (int k = 1; k < kSummaryRanks; ++k) monotone = monotone && summary.at_least[t][k] >= summary.at_least[t][k - 1];
  }
  return {worst_z <= 4.0 && std::abs(total - 1.0) <= 0.005 && monotone && elapsed < 300.0,
          fmt("max |z| %.2f, champion sum %.6f, monotone %s, %.1f s", worst_z, total, monotone ? "yes" : "no", elapsed)};
}

// 10 ------------------------------------------------------------------------

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    std::ifstream in(e.path(), std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    files[e.path().filename().string()] = os.str();
  }
  return files;
}

Verdict end_to_end_determinism() {
  const fs::path root = fs::current_path() / "acceptance_c10";
  fs::remove_all(root);
  cli::RunConfig base;
  base.covariates = test::fixture("covariates.csv");
  base.matches = test::fixture("matches.csv");
  base.odds = test::fixture("odds.csv");
  base.format = test::fixture("format.json");
  base.family = ScoreFamily::dpoisson;
  base.runs = 20000;

  std::string differing;
  std::size_t compared = 0;
  for (const char* command : {"compare", "simulate"}) {
    std::vector<std::map<std::string, std::string>> outputs;
    for (std::size_t run = 0; run < 3; ++run) {
      auto config = base;
      config.threads = run == 2 ? 8 : 1;
      config.out = (root / (std::string(command) + std::to_string(run))).string();
      if (std::strcmp(command, "compare") == 0) {
        cli::cmd_compare(config);
      } else {
        cli::cmd_simulate(config);
      }
      outputs.push_back(snapshot(config.out));
    }
    for (std::size_t run = 1; run < outputs.size(); ++run) {
      if (outputs[run] != outputs[0]) differing += fmt(" %s run %zu", command, run);
    }
    compared += outputs[0].size();
  }
  return {differing.empty() && compared > 0,
          fmt("%zu files per run set, two repeats plus threads 8", compared) + (differing.empty() ? "" : "; differ:" + differing)};
}

// 11 ------------------------------------------------------------------------

Verdict protocol_fidelity() {
  auto covs = read_covariates_file(test::fixture("covariates.csv"));
  const auto matches = read_matches_file(test::fixture("matches.csv"));
  const auto odds = read_odds_file(test::fixture("odds.csv"));
  const auto methods = all_methods();
  const auto report = leave_one_tournament_out(covs, matches, methods, odds);

  // Usable matches: complete covariates for both teams.
  const std::vector<int> years{2011, 2013, 2015, 2017};
  resolve_age_deviation(covs, years);
  std::set<std::string> usable;
  std::map<std::string, int> tournament_of;
  for (const auto& r : build_design(covs, matches).rows) {
    usable.insert(r.match_id);
    tournament_of[r.match_id] = r.tournament_id;
  }

  std::string problems;
  std::map<std::string, std::map<std::string, int>> counts;
  for (const auto& p : report.predictions) ++counts[p.method][p.match_id];
  if (counts.size() != methods.size() + 1) problems += fmt(" %zu methods predicted", counts.size());
  for (const auto& [method, seen] : counts) {
    if (seen.size() != usable.size()) problems += " " + method + " covers " + std::to_string(seen.size());
    for (const auto& [id, n] : seen) {
      if (n != 1 || !usable.count(id)) problems += " " + method + ":" + id + "x" + std::to_string(n);
    }
  }
  for (const auto& s : report.splits) {
    if (std::find(s.training_tournaments.begin(), s.training_tournaments.end(), s.held_out) != s.training_tournaments.end()) {
      problems += fmt(" split %d trains on itself", s.held_out);
    }
    for (const auto& id : s.training_match_ids) {
      if (tournament_of.count(id) && tournament_of[id] == s.held_out) problems += " " + id + " leaked";
    }
    for (const auto& id : s.test_match_ids) {
      if (tournament_of[id] != s.held_out) problems += " " + id + " tested in wrong split";
    }
    auto ids = s.training_match_ids;
    std::sort(ids.begin(), ids.end());
    if (fingerprint(ids) != s.fingerprint) problems += fmt(" split %d fingerprint mismatch", s.held_out);
  }
  return {problems.empty() && report.splits.size() == 4,
          fmt("%zu usable matches, %zu splits, %zu prediction rows", usable.size(), report.splits.size(),
              report.predictions.size()) +
              (problems.empty() ? "" : ";" + problems)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria{
      {"lasso oracle equivalence", lasso_oracle},
      {"KKT certification", kkt_certification},
      {"support recovery", support_recovery},
      {"dispersion estimator", dispersion_estimator},
      {"double Poisson law", double_poisson_law},
      {"outcome probability oracle", outcome_oracle},
      {"metric formulas", metric_formulas},
      {"standings rules", standings_rules},
      {"simulator symmetry", simulator_symmetry},
      {"end-to-end determinism", end_to_end_determinism},
      {"protocol fidelity", protocol_fidelity},
  };
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else {
      std::fprintf(stderr, "usage: %s [--only N]\n", argv[0]);
      return 2;
    }
  }
  if (only < 0 || only > static_cast<int>(criteria.size())) {
    std::fprintf(stderr, "no criterion %d\n", only);
    return 2;
  }

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (only != 0 && static_cast<int>(i) + 1 != only) continue;
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s %2zu %s: %s\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, v.detail.c_str());
    std::fflush(stdout);
    failed += !v.pass;
  }
  return failed == 0 ? 0 : 1;
}
