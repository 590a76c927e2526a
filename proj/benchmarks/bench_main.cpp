#include <benchmark/benchmark.h>

#include <Eigen/Dense>

#include "mixem/em.hpp"
#include "mixem/matching.hpp"
#include "mixem/mixture.hpp"
#include "mixem/population.hpp"
#include "mixem/rng.hpp"

namespace {

Eigen::MatrixXd random_means(int K, int d, std::uint64_t seed) {
  mixem::Rng rng(seed);
  Eigen::MatrixXd m(K, d);
  for (int i = 0; i < K; ++i) {
    for (int j = 0; j < d; ++j) m(i, j) = 2.0 * rng.next_normal();
  }
  return m;
}

struct Workload {
  Workload()
      : truth(random_means(9, 3, 11)),
        model(mixem::Family::Gaussian, truth),
        samples(mixem::sample(model, 10000, 12)),
        init(random_means(9, 3, 13)) {}

  Eigen::MatrixXd truth;
  mixem::MixtureModel model;
  mixem::SampleSet samples;
  Eigen::MatrixXd init;
};

const Workload& workload() {
  static const Workload w;
  return w;
}

void bm_responsibilities(benchmark::State& state) {
  const Workload& w = workload();
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        mixem::responsibility_matrix(w.model, w.samples.data));
  }
}
BENCHMARK(bm_responsibilities)->Unit(benchmark::kMillisecond);

void bm_log_likelihood(benchmark::State& state) {
  const Workload& w = workload();
  for (auto _ : state) {
    benchmark::DoNotOptimize(mixem::log_likelihood(w.model, w.samples));
  }
}
BENCHMARK(bm_log_likelihood)->Unit(benchmark::kMillisecond);

void bm_naive_step(benchmark::State& state) {
  const Workload& w = workload();
  for (auto _ : state) {
    benchmark::DoNotOptimize(mixem::naive_em_step(w.init, w.samples));
  }
}
BENCHMARK(bm_naive_step)->Unit(benchmark::kMillisecond);

void bm_regularized_step(benchmark::State& state) {
  const Workload& w = workload();
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        mixem::regularized_em_step(w.init, w.samples, 0.1));
  }
}
BENCHMARK(bm_regularized_step)->Unit(benchmark::kMillisecond);

void bm_sample_10k(benchmark::State& state) {
  const Workload& w = workload();
  for (auto _ : state) {
    benchmark::DoNotOptimize(mixem::sample(w.model, 10000, 21));
  }
}
BENCHMARK(bm_sample_10k)->Unit(benchmark::kMillisecond);

void bm_population_map(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(mixem::em_map_quadrature(0.5, 1.0));
  }
}
BENCHMARK(bm_population_map)->Unit(benchmark::kMicrosecond);

void bm_population_deviation_tiny_gap(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(mixem::em_map_deviation(1.0 - 1e-10, 1.0));
  }
}
BENCHMARK(bm_population_deviation_tiny_gap)->Unit(benchmark::kMicrosecond);

void bm_match_components(benchmark::State& state) {
  const Eigen::MatrixXd truth = random_means(9, 3, 31);
  const Eigen::MatrixXd est = random_means(9, 3, 32);
  for (auto _ : state) {
    benchmark::DoNotOptimize(mixem::match_components(est, truth));
  }
}
BENCHMARK(bm_match_components)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
