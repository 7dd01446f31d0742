// OpenMP kernels vs the serial reference on one 960x540 frame.
// Parallel variants take the thread count as the benchmark argument.

#include <benchmark/benchmark.h>
#include <omp.h>

#include <random>
#include <vector>

#include "mmcm/kernels.hpp"

namespace k = mmcm::kernels;

namespace {

constexpr std::uint32_t kW = 960;
constexpr std::uint32_t kH = 540;
constexpr std::size_t kN = std::size_t{kW} * kH;

struct Frame {
  std::vector<std::uint16_t> la, lb;
  std::vector<double> ca, cb, depth;
  Frame() {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::size_t i = 0; i < kN; ++i) {
      la.push_back(static_cast<std::uint16_t>(rng() % 19));
      lb.push_back(u(rng) < 0.8 ? la.back() : static_cast<std::uint16_t>(rng() % 19));
      ca.push_back(u(rng));
      cb.push_back(u(rng));
      depth.push_back(80.0 * u(rng));
    }
  }
};

const Frame& frame() {
  static const Frame f;
  return f;
}

void threads(benchmark::State& state) { omp_set_num_threads(static_cast<int>(state.range(0))); }

void finish(benchmark::State& state) {
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * static_cast<std::int64_t>(kN));
}

void BM_Agreement(benchmark::State& state) {
  threads(state);
  const auto& f = frame();
  for (auto _ : state) benchmark::DoNotOptimize(k::weighted_agreement_sum(f.la, f.lb, f.ca, f.cb));
  finish(state);
}

void BM_AgreementSerial(benchmark::State& state) {
  const auto& f = frame();
  for (auto _ : state) benchmark::DoNotOptimize(k::serial::weighted_agreement_sum(f.la, f.lb, f.ca, f.cb));
  finish(state);
}

void BM_Sum(benchmark::State& state) {
  threads(state);
  const auto& f = frame();
  for (auto _ : state) benchmark::DoNotOptimize(k::sum(f.ca));
  finish(state);
}

void BM_SumSerial(benchmark::State& state) {
  const auto& f = frame();
  for (auto _ : state) benchmark::DoNotOptimize(k::serial::sum(f.ca));
  finish(state);
}

void BM_Histogram(benchmark::State& state) {
  threads(state);
  const auto& f = frame();
  std::vector<std::uint64_t> counts(256);
  for (auto _ : state) {
    k::histogram(f.depth, 0.0, 80.0, counts);
    benchmark::DoNotOptimize(counts.data());
  }
  finish(state);
}

void BM_HistogramSerial(benchmark::State& state) {
  const auto& f = frame();
  std::vector<std::uint64_t> counts(256);
  for (auto _ : state) {
    k::serial::histogram(f.depth, 0.0, 80.0, counts);
    benchmark::DoNotOptimize(counts.data());
  }
  finish(state);
}

void BM_GradientCount(benchmark::State& state) {
  threads(state);
  const auto& f = frame();
  for (auto _ : state) benchmark::DoNotOptimize(k::count_gradient_above(f.depth, kW, kH, 8.0));
  finish(state);
}

void BM_GradientCountSerial(benchmark::State& state) {
  const auto& f = frame();
  for (auto _ : state) benchmark::DoNotOptimize(k::serial::count_gradient_above(f.depth, kW, kH, 8.0));
  finish(state);
}

void BM_Sobel(benchmark::State& state) {
  threads(state);
  const auto& f = frame();
  std::vector<double> gx(kN), gy(kN), m(kN);
  for (auto _ : state) {
    k::sobel(f.depth, kW, kH, gx, gy, m);
    benchmark::DoNotOptimize(m.data());
  }
  finish(state);
}

void BM_SobelSerial(benchmark::State& state) {
  const auto& f = frame();
  std::vector<double> gx(kN), gy(kN), m(kN);
  for (auto _ : state) {
    k::serial::sobel(f.depth, kW, kH, gx, gy, m);
    benchmark::DoNotOptimize(m.data());
  }
  finish(state);
}

}  // namespace

#define MMCM_THREADS ->Arg(1)->Arg(2)->Arg(4)->UseRealTime()

BENCHMARK(BM_Agreement) MMCM_THREADS;
BENCHMARK(BM_AgreementSerial)->UseRealTime();
BENCHMARK(BM_Sum) MMCM_THREADS;
BENCHMARK(BM_SumSerial)->UseRealTime();
BENCHMARK(BM_Histogram) MMCM_THREADS;
BENCHMARK(BM_HistogramSerial)->UseRealTime();
BENCHMARK(BM_GradientCount) MMCM_THREADS;
BENCHMARK(BM_GradientCountSerial)->UseRealTime();
BENCHMARK(BM_Sobel) MMCM_THREADS;
BENCHMARK(BM_SobelSerial)->UseRealTime();

BENCHMARK_MAIN();
