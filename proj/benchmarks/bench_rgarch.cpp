#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

#include "rgarch/inference.hpp"
#include "rgarch/link.hpp"
#include "rgarch/mallows.hpp"
#include "rgarch/permutation.hpp"
#include "rgarch/process.hpp"
#include "rgarch/rng.hpp"

namespace {

using rgarch::Coefficients;
using rgarch::DistanceKind;
using rgarch::MallowsSampler;
using rgarch::MallowsSpec;
using rgarch::Permutation;
using rgarch::RankingSeries;
using rgarch::Rng;

/// A fixed pool of random permutation pairs so the distance benchmarks see
/// varied inputs without paying generation cost inside the timed loop.
std::vector<std::pair<Permutation, Permutation>> make_pairs(int k, int n) {
  Rng rng(0x9e3779b97f4a7c15ULL ^ static_cast<std::uint64_t>(k));
  std::vector<std::pair<Permutation, Permutation>> pairs;
  pairs.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    pairs.emplace_back(Permutation::random_uniform(k, rng),
                       Permutation::random_uniform(k, rng));
  }
  return pairs;
}

void BM_kendall_distance(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  const auto pairs = make_pairs(k, 64);
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& [a, b] = pairs[i++ & 63];
    benchmark::DoNotOptimize(rgarch::kendall_distance(a, b));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_kendall_distance)->Arg(10)->Arg(31)->Arg(128);

void BM_hamming_distance(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  const auto pairs = make_pairs(k, 64);
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& [a, b] = pairs[i++ & 63];
    benchmark::DoNotOptimize(rgarch::hamming_distance(a, b));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_hamming_distance)->Arg(10)->Arg(31)->Arg(128);

/// Solving theta from a target mean is the inner step of every likelihood
/// term, so its cost bounds the whole fitter.
void BM_link_solve_kendall(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  const double mu = 0.4 * rgarch::uniform_mean(k, DistanceKind::kendall);
  for (auto _ : state) {
    benchmark::DoNotOptimize(rgarch::theta_from_mean(mu, k, DistanceKind::kendall));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_link_solve_kendall)->Arg(10)->Arg(31)->Arg(128);

void BM_link_solve_hamming(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  const double mu = 0.4 * rgarch::uniform_mean(k, DistanceKind::hamming);
  for (auto _ : state) {
    benchmark::DoNotOptimize(rgarch::theta_from_mean(mu, k, DistanceKind::hamming));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_link_solve_hamming)->Arg(10)->Arg(31)->Arg(128);

void BM_sampler_kendall(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  Rng rng(7);
  MallowsSampler sampler(MallowsSpec(Permutation::identity(k), 1.0, DistanceKind::kendall));
  for (auto _ : state) {
    benchmark::DoNotOptimize(sampler.draw(rng));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_sampler_kendall)->Arg(10)->Arg(31);

void BM_sampler_hamming(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  Rng rng(7);
  MallowsSampler sampler(MallowsSpec(Permutation::identity(k), 1.0, DistanceKind::hamming));
  for (auto _ : state) {
    benchmark::DoNotOptimize(sampler.draw(rng));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_sampler_hamming)->Arg(10)->Arg(31);

RankingSeries simulated_series(int k, int n) {
  Rng rng(4242);
  const Coefficients coef{3.0, {0.2}, {0.3}};
  return rgarch::simulate(k, n, coef, DistanceKind::kendall, rng).series;
}

/// One full pass of the analytic score and information over a series: the
/// dominant cost of each Newton iteration inside the fitter.
void BM_score_and_information(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const RankingSeries series = simulated_series(10, n);
  const Coefficients coef{3.0, {0.2}, {0.3}};
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        rgarch::score_and_information(series, {1, 1}, coef, DistanceKind::kendall));
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_score_and_information)->Arg(500)->Arg(5000);

void BM_simulate(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Coefficients coef{3.0, {0.2}, {0.3}};
  std::uint64_t seed = 1;
  for (auto _ : state) {
    Rng rng(seed++);
    benchmark::DoNotOptimize(rgarch::simulate(10, n, coef, DistanceKind::kendall, rng));
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_simulate)->Arg(500);

void BM_fit_autoregressive(benchmark::State& state) {
  const RankingSeries series = simulated_series(10, 300);
  for (auto _ : state) {
    benchmark::DoNotOptimize(rgarch::fit_mle(series, {1, 0}, DistanceKind::kendall));
  }
}
BENCHMARK(BM_fit_autoregressive)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
