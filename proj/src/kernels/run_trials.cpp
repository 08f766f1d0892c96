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

#include <cstdint>
#include <vector>

#include <omp.h>

#include "homsim/execute.hpp"
#include "homsim/rng.hpp"

namespace homsim::kernels {

CountsHistogram run_trials_serial(const TrialRunner& runner, std::uint64_t seed,
                                  std::uint64_t point, std::uint64_t trials) {
  CountsHistogram hist;
  for (std::uint64_t t = 0; t < trials; ++t) {
    Rng rng = Rng::substream(seed, point, t);
    hist.add(runner.run(rng));
  }
  return hist;
}

CountsHistogram run_trials_omp(const TrialRunner& runner, std::uint64_t seed,
                               std::uint64_t point, std::uint64_t trials) {
  std::vector<CountsHistogram> partial(static_cast<std::size_t>(omp_get_max_threads()));
  const auto n = static_cast<std::int64_t>(trials);
#pragma omp parallel
  {
    CountsHistogram& local = partial[static_cast<std::size_t>(omp_get_thread_num())];
#pragma omp for schedule(static)
    for (std::int64_t t = 0; t < n; ++t) {
      Rng rng = Rng::substream(seed, point, static_cast<std::uint64_t>(t));
      local.add(runner.run(rng));
    }
  }
  CountsHistogram hist;
  for (const auto& h : partial) hist.merge(h);
  return hist;
}

}  // namespace homsim::kernels
