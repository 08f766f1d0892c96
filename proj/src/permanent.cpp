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

#include "homsim/permanent.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

#include "homsim/rng.hpp"

namespace homsim {

namespace {

double factorial_product(std::span<const int> occ) {
  double f = 1.0;
  for (int v : occ)
    for (int k = 2; k <= v; ++k) f *= k;
  return f;
}

int checked_total(std::span<const int> occ, int modes, const char* what) {
  if (static_cast<int>(occ.size()) != modes)
    throw std::invalid_argument(fmt::format("{} occupation has {} entries, expected {}", what,
                                            occ.size(), modes));
  int n = 0;
  for (int v : occ) {
    if (v < 0) throw std::invalid_argument(fmt::format("{} occupation is negative", what));
    n += v;
  }
  return n;
}

void fill_sector(int n, std::size_t m, Occupation& cur, std::vector<Occupation>& out) {
  if (m + 1 == cur.size()) {
    cur[m] = n;
    out.push_back(cur);
    return;
  }
  for (int v = n; v >= 0; --v) {
    cur[m] = v;
    fill_sector(n - v, m + 1, cur, out);
  }
}

std::size_t sector_size(int modes, int total) {
  // C(total + modes - 1, modes - 1), in floating point to survive overflow checks.
  double s = 1.0;
  for (int i = 1; i < modes; ++i) s = s * (total + i) / i;
  return s > 1e15 ? static_cast<std::size_t>(-1) : static_cast<std::size_t>(std::llround(s));
}

}  // namespace

Interferometer::Interferometer(Eigen::MatrixXcd u, double tolerance) : u_(std::move(u)) {
  if (u_.rows() != u_.cols() || u_.rows() == 0)
    throw std::invalid_argument("interferometer matrix must be square and non-empty");
  const auto defect =
      (u_ * u_.adjoint() - Eigen::MatrixXcd::Identity(u_.rows(), u_.cols())).cwiseAbs().maxCoeff();
  if (defect > tolerance)
    throw std::invalid_argument(fmt::format("matrix is not unitary (defect {:.3g})", defect));
}

Complex permanent(const Eigen::MatrixXcd& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("permanent needs a square matrix");
  const int n = static_cast<int>(a.rows());
  if (n > kMaxPermanentSize)
    throw std::invalid_argument(fmt::format("permanent size {} exceeds guard {}", n,
                                            kMaxPermanentSize));
  if (n == 0) return 1.0;

  Eigen::VectorXcd row_sums = Eigen::VectorXcd::Zero(n);
  Complex total{};
  const std::uint64_t subsets = std::uint64_t{1} << n;
  std::uint64_t gray = 0;
  for (std::uint64_t k = 1; k < subsets; ++k) {
    const int j = std::countr_zero(k);
    gray ^= std::uint64_t{1} << j;
    if (gray >> j & 1U)
      row_sums += a.col(j);
    else
      row_sums -= a.col(j);
    Complex prod = row_sums[0];
    for (int i = 1; i < n; ++i) prod *= row_sums[i];
    // (-1)^(n - |S|)
    if ((n - std::popcount(gray)) & 1)
      total -= prod;
    else
      total += prod;
  }
  return total;
}

Complex transition_amplitude(const Interferometer& u, std::span<const int> input,
                             std::span<const int> output) {
  const int M = u.modes();
  const int n_in = checked_total(input, M, "input");
  const int n_out = checked_total(output, M, "output");
  if (n_in != n_out)
    throw std::invalid_argument(fmt::format("input carries {} quanta but output {}", n_in, n_out));

  Eigen::MatrixXcd sub(n_in, n_in);
  std::vector<int> rows, cols;
  for (int i = 0; i < M; ++i) rows.insert(rows.end(), output[i], i);
  for (int j = 0; j < M; ++j) cols.insert(cols.end(), input[j], j);
  for (int r = 0; r < n_in; ++r)
    for (int c = 0; c < n_in; ++c) sub(r, c) = u.matrix()(rows[r], cols[c]);
  return permanent(sub) / std::sqrt(factorial_product(input) * factorial_product(output));
}

std::vector<Occupation> sector_occupations(int modes, int total) {
  if (modes < 1 || total < 0) throw std::invalid_argument("invalid sector request");
  if (sector_size(modes, total) > kMaxOutputStates)
    throw std::invalid_argument(fmt::format(
        "{} quanta in {} modes exceed the {} output-state guard", total, modes, kMaxOutputStates));
  std::vector<Occupation> out;
  Occupation cur(modes, 0);
  fill_sector(total, 0, cur, out);
  return out;
}

std::vector<OutputProbability> output_distribution(const Interferometer& u,
                                                   std::span<const int> input) {
  const int n = checked_total(input, u.modes(), "input");
  auto outputs = sector_occupations(u.modes(), n);
  const auto probs = kernels::output_probabilities_omp(u, input, outputs);
  std::vector<OutputProbability> dist;
  dist.reserve(outputs.size());
  for (std::size_t i = 0; i < outputs.size(); ++i)
    dist.push_back({std::move(outputs[i]), probs[i]});
  return dist;
}

std::vector<Occupation> boson_sample(const Interferometer& u, std::span<const int> input,
                                     std::size_t n_samples, Rng& rng) {
  const auto dist = output_distribution(u, input);
  std::vector<double> cum(dist.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < dist.size(); ++i) cum[i] = acc += dist[i].probability;
  std::vector<Occupation> samples;
  samples.reserve(n_samples);
  for (std::size_t s = 0; s < n_samples; ++s)
    samples.push_back(dist[sample_index(cum, rng)].occupation);
  return samples;
}

Eigen::MatrixXcd haar_unitary(int modes, Rng& rng) {
  if (modes < 1) throw std::invalid_argument("need at least one mode");
  Eigen::MatrixXcd z(modes, modes);
  for (int j = 0; j < modes; ++j)
    for (int i = 0; i < modes; ++i) z(i, j) = Complex(rng.normal(), rng.normal()) / std::sqrt(2.0);
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(z);
  Eigen::MatrixXcd q = qr.householderQ();
  const Eigen::MatrixXcd& r = qr.matrixQR();
  for (int j = 0; j < modes; ++j) {
    const Complex d = r(j, j);
    q.col(j) *= std::abs(d) > 0.0 ? d / std::abs(d) : Complex(1.0);
  }
  return q;
}

Eigen::MatrixXcd beamsplitter_matrix(double angle) {
  const double c = std::cos(0.5 * angle);
  const Complex is(0.0, std::sin(0.5 * angle));
  Eigen::MatrixXcd u(2, 2);
  u << c, is, is, c;
  return u;
}

}  // namespace homsim
