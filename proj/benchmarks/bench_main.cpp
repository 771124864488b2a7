#include <benchmark/benchmark.h>

#include <cmath>

#include "handball/counts.hpp"
#include "handball/glm.hpp"
#include "handball/tournament.hpp"

using namespace handball;

namespace {

Dataset poisson_dataset(std::size_t n, std::size_t p) {
  Rng rng(1);
  std::vector<double> x(n * p), y(n);
  for (double& v : x) v = rng.normal();
  for (std::size_t i = 0; i < n; ++i) {
    const double eta = 3.3 + 0.2 * x[i * p] - 0.15 * x[i * p + 1];
    y[i] = std::poisson_distribution<int>(std::exp(eta))(rng.engine());
  }
  return Dataset::from_matrix(n, p, x, y);
}

void BM_PoissonPath(benchmark::State& state) {
  const auto data = poisson_dataset(static_cast<std::size_t>(state.range(0)), 22);
  for (auto _ : state) benchmark::DoNotOptimize(fit_path(data, Family::poisson()));
}
BENCHMARK(BM_PoissonPath)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_GaussianPath(benchmark::State& state) {
  const auto data = poisson_dataset(static_cast<std::size_t>(state.range(0)), 22);
  for (auto _ : state) benchmark::DoNotOptimize(fit_path(data, Family::gaussian()));
}
BENCHMARK(BM_GaussianPath)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_OutcomeProbs(benchmark::State& state) {
  const auto a = ScoreDistribution::double_poisson(29.0, 0.74);
  const auto b = ScoreDistribution::double_poisson(26.0, 0.74);
  for (auto _ : state) benchmark::DoNotOptimize(outcome_probs(a, b));
}
BENCHMARK(BM_OutcomeProbs);

void BM_DoublePoissonConstruct(benchmark::State& state) {
  double mean = 20.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(ScoreDistribution::double_poisson(mean, 0.74));
    mean = mean > 35.0 ? 20.0 : mean + 0.37;
  }
}
BENCHMARK(BM_DoublePoissonConstruct);

void BM_Tournament(benchmark::State& state) {
  const auto format = TournamentFormat::ihf2019();
  const auto matchups = Matchups::from_means(
      format.teams(), [](std::size_t a, std::size_t b) { return std::pair{20.0 + 0.4 * a, 20.0 + 0.4 * b}; },
      [](double mean, double tf) { return ScoreDistribution::double_poisson(mean * tf, 0.74); });
  const TournamentSimulator sim(matchups, format);
  Rng rng(7);
  for (auto _ : state) benchmark::DoNotOptimize(sim.run(rng));
}
BENCHMARK(BM_Tournament)->Unit(benchmark::kMicrosecond);

}  // namespace
BENCHMARK_MAIN();
