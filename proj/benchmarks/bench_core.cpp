// Copyright 2026 The rctc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <benchmark/benchmark.h>

#include <cmath>

#include "rctc/channel.hpp"
#include "rctc/codec.hpp"
#include "rctc/designer.hpp"
#include "rctc/lqg.hpp"
#include "rctc/quantizer.hpp"
#include "rctc/source_model.hpp"

namespace {

using namespace rctc;

Matrix s1(double v) { return Matrix::Constant(1, 1, v); }

const PlantModel kPlant{s1(1.49), s1(0.05), s1(1.0), s1(0.01), s1(0.001)};
const LqgWeights kWeights{s1(1.0), s1(0.01)};

void BM_Riccati(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(solve_riccati(kPlant, kWeights));
}
BENCHMARK(BM_Riccati);

void BM_AmWmseExact(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto kx = ar1_covariance(0.9, 1.0, n);
  const auto t = plt_design(kx, 1).transform;
  const auto moments = AvailabilityMoments::exact(ChannelModel::from_violation_probability(0.1, 0.05, 0.0125, n));
  const Matrix kq = 1e-3 * Matrix::Identity(n, n);
  const Matrix w = Matrix::Identity(n, n);
  for (auto _ : state) benchmark::DoNotOptimize(am_wmse(t, moments, kx.matrix(), kq, w));
}
BENCHMARK(BM_AmWmseExact)->Arg(6)->Arg(8)->Arg(16);

void BM_AvailabilityStats(benchmark::State& state) {
  const auto model = ChannelModel::from_violation_probability(0.1, 0.05, 0.0125, 8);
  for (auto _ : state) {
    benchmark::DoNotOptimize(availability_stats(model, static_cast<std::size_t>(state.range(0)), 1,
                                                DelayCorrelation::MonteCarlo));
  }
}
BENCHMARK(BM_AvailabilityStats)->Arg(2000);

void BM_EncodeDecode(benchmark::State& state) {
  const int n = 8;
  const auto plt = plt_design(ar1_covariance(0.9, 1.0, n), 1);
  const auto bank = QuantizerBank::modeled(std::vector<double>(n, 5.0), plt.input_variances, 1, 1.0);
  const auto channel = ChannelModel::from_violation_probability(0.1, 0.05, 0.0125, n);
  const auto path = sample_path(GaussMarkovModel::ar1(0.9, 1.0), n, 1);
  Rng rng(2);
  for (auto _ : state) {
    const auto enc = encode(path, plt.transform, bank, rng);
    const auto b = sample_availability(channel, DelayCorrelation::MonteCarlo, rng);
    benchmark::DoNotOptimize(decode({enc.codevalues.data(), static_cast<std::size_t>(n)}, plt.transform, b));
  }
}
BENCHMARK(BM_EncodeDecode);

void BM_ToeplitzDesign(benchmark::State& state) {
  const int n = 6;
  const auto model = ChannelModel::from_violation_probability(0.2, 0.05, 0.0125, n);
  const DesignProblem prob{ar1_covariance(0.9, 1.0, n),
                           availability_stats(model, 2000, 1, DelayCorrelation::MonteCarlo),
                           Matrix::Identity(n, n),
                           5.0,
                           n,
                           1,
                           TransformKind::Toeplitz,
                           1.0,
                           0.0,
                           {},
                           std::nullopt};
  for (auto _ : state) benchmark::DoNotOptimize(design_code(prob, SearchConfig{}));
}
BENCHMARK(BM_ToeplitzDesign)->Unit(benchmark::kMillisecond);

void BM_ClosedLoop(benchmark::State& state) {
  const int n = 8;
  const auto sol = solve_controller(kPlant, kWeights);
  const auto plt = plt_design(ar1_covariance(0.8677, 0.03, n), 1);
  const auto bank = QuantizerBank::modeled(std::vector<double>(n, 5.0), plt.input_variances, 1, 1.0);
  const auto channel = ChannelModel::from_violation_probability(0.1, 0.05, 0.0125, n);
  ClosedLoopOptions opt;
  opt.horizon = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(simulate_closed_loop(kPlant, kWeights, sol, plt.transform, bank, channel, opt, 1));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ClosedLoop)->Arg(100000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
