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

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "homsim/fock.hpp"

namespace homsim {

using Occupation = std::vector<int>;

inline constexpr int kMaxPermanentSize = 20;
inline constexpr std::size_t kMaxOutputStates = 100'000;

/// M x M linear-optical network; validated unitary on construction.
class Interferometer {
 public:
  explicit Interferometer(Eigen::MatrixXcd u, double tolerance = 1e-10);

  const Eigen::MatrixXcd& matrix() const noexcept { return u_; }
  int modes() const noexcept { return static_cast<int>(u_.rows()); }

 private:
  Eigen::MatrixXcd u_;
};

/**
 * Ryser's formula with Gray-code subset order: each step flips one column in
 * or out of the running row sums, so a full pass costs O(2^n n). The empty
 * matrix has permanent 1.
 */
Complex permanent(const Eigen::MatrixXcd& a);

/// <output| U |input> = Per(U_{output,input}) / sqrt(prod input_j! prod output_i!).
Complex transition_amplitude(const Interferometer& u, std::span<const int> input,
                             std::span<const int> output);

/// All occupations of `modes` modes holding `total` quanta, in the canonical
/// (descending lexicographic) order shared with FockBasis sectors.
std::vector<Occupation> sector_occupations(int modes, int total);

struct OutputProbability {
  Occupation occupation;
  double probability = 0.0;
};

std::vector<OutputProbability> output_distribution(const Interferometer& u,
                                                   std::span<const int> input);

/// Inverse-CDF sampling from the enumerated distribution; one uniform draw per sample.
std::vector<Occupation> boson_sample(const Interferometer& u, std::span<const int> input,
                                     std::size_t n_samples, Rng& rng);

/// Haar-random unitary: QR of a complex Ginibre matrix with R's diagonal phases divided out.
Eigen::MatrixXcd haar_unitary(int modes, Rng& rng);

/// Mode matrix of the two-mode beam splitter used by apply_beamsplitter.
Eigen::MatrixXcd beamsplitter_matrix(double angle);

namespace kernels {

/// |amplitude|^2 for each output, reference loop.
std::vector<double> output_probabilities_serial(const Interferometer& u,
                                                std::span<const int> input,
                                                const std::vector<Occupation>& outputs);
/// Same values, outputs spread across OpenMP threads.
std::vector<double> output_probabilities_omp(const Interferometer& u, std::span<const int> input,
                                             const std::vector<Occupation>& outputs);

}  // namespace kernels

}  // namespace homsim
