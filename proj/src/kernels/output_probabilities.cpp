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

#include <cstddef>
#include <vector>

#include "homsim/permanent.hpp"

namespace homsim::kernels {

std::vector<double> output_probabilities_serial(const Interferometer& u,
                                                std::span<const int> input,
                                                const std::vector<Occupation>& outputs) {
  std::vector<double> probs(outputs.size());
  for (std::size_t i = 0; i < outputs.size(); ++i)
    probs[i] = std::norm(transition_amplitude(u, input, outputs[i]));
  return probs;
}

std::vector<double> output_probabilities_omp(const Interferometer& u, std::span<const int> input,
                                             const std::vector<Occupation>& outputs) {
  std::vector<double> probs(outputs.size());
  const auto count = static_cast<std::ptrdiff_t>(outputs.size());
  // Each permanent is independent; exceptions cannot cross the parallel region,
  // so inputs are validated by the first serial call.
  if (count > 0) probs[0] = std::norm(transition_amplitude(u, input, outputs[0]));
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t i = 1; i < count; ++i)
    probs[i] = std::norm(transition_amplitude(u, input, outputs[i]));
  return probs;
}

}  // namespace homsim::kernels
