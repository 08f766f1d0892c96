// Copyright 2026 The homsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Serial reference kernels against their OpenMP counterparts.

#include <vector>

#include <benchmark/benchmark.h>

#include "homsim/execute.hpp"
#include "homsim/noise.hpp"
#include "homsim/permanent.hpp"
#include "homsim/pulse_program.hpp"
#include "homsim/rng.hpp"

namespace {

using namespace homsim;

constexpr const char* kDipProgram =
    "prepare s1\nprepare s2\nraman duration=154ns\nread s1\nread s2\n";

const TrialRunner& dip_runner() {
  static const TrialRunner runner(parse(kDipProgram), NoiseParams{}, DetectionParams{}, Physics{});
  return runner;
}

template <auto Kernel>
void BM_RunTrials(benchmark::State& state) {
  const auto trials = static_cast<std::uint64_t>(state.range(0));
  std::uint64_t point = 0;
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(dip_runner(), 1, point++, trials));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RunTrials<kernels::run_trials_serial>)->Name("run_trials/serial")->Arg(100'000);
BENCHMARK(BM_RunTrials<kernels::run_trials_omp>)->Name("run_trials/omp")->Arg(100'000);

struct Distribution {
  Interferometer net;
  std::vector<int> input;
  std::vector<Occupation> outputs;
};

Distribution make_distribution(int modes, int bosons) {
  Rng rng(42);
  std::vector<int> input(static_cast<std::size_t>(modes), 0);
  for (int i = 0; i < bosons; ++i) input[static_cast<std::size_t>(i)] = 1;
  return {Interferometer(haar_unitary(modes, rng)), input, sector_occupations(modes, bosons)};
}

template <auto Kernel>
void BM_OutputProbabilities(benchmark::State& state) {
  const auto d = make_distribution(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(d.net, d.input, d.outputs));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(d.outputs.size()));
}
BENCHMARK(BM_OutputProbabilities<kernels::output_probabilities_serial>)
    ->Name("output_probabilities/serial")
    ->Args({8, 4})
    ->Args({12, 6});
BENCHMARK(BM_OutputProbabilities<kernels::output_probabilities_omp>)
    ->Name("output_probabilities/omp")
    ->Args({8, 4})
    ->Args({12, 6});

void BM_Permanent(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Rng rng(7);
  Eigen::MatrixXcd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = {rng.normal(), rng.normal()};
  for (auto _ : state) benchmark::DoNotOptimize(permanent(a));
}
BENCHMARK(BM_Permanent)->Name("permanent/ryser")->DenseRange(12, 16, 2)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
