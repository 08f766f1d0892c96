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

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "homsim/fock.hpp"
#include "homsim/permanent.hpp"
#include "homsim/rng.hpp"

namespace homsim {
namespace {

// Sum over all permutations, O(n * n!).
Complex naive_permanent(const Eigen::MatrixXcd& a) {
  const int n = static_cast<int>(a.rows());
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  Complex total = 0;
  do {
    Complex term = 1;
    for (int i = 0; i < n; ++i) term *= a(i, perm[static_cast<std::size_t>(i)]);
    total += term;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return total;
}

Eigen::MatrixXcd random_matrix(int n, Rng& rng) {
  Eigen::MatrixXcd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = {rng.normal(), rng.normal()};
  return m;
}

TEST(Permanent, SmallKnownValues) {
  EXPECT_EQ(permanent(Eigen::MatrixXcd::Identity(3, 3)), Complex(1, 0));
  EXPECT_NEAR(std::abs(permanent(Eigen::MatrixXcd::Ones(3, 3)) - Complex(6, 0)), 0.0, 1e-12);
  EXPECT_EQ(permanent(Eigen::MatrixXcd(0, 0)), Complex(1, 0));
}

TEST(Permanent, AllOnesIsFactorial) {
  double f = 1;
  for (int n = 1; n <= 10; ++n) {
    f *= n;
    EXPECT_NEAR(permanent(Eigen::MatrixXcd::Ones(n, n)).real(), f, 1e-9 * f);
  }
}

TEST(Permanent, PermutationMatrixIsExactlyOne) {
  Rng rng(4);
  for (int n = 1; n <= 8; ++n) {
    std::vector<int> p(static_cast<std::size_t>(n));
    std::iota(p.begin(), p.end(), 0);
    std::shuffle(p.begin(), p.end(), rng);
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
    for (int i = 0; i < n; ++i) m(i, p[static_cast<std::size_t>(i)]) = 1;
    EXPECT_EQ(permanent(m), Complex(1, 0));
  }
}

TEST(Permanent, MatchesNaiveExpansion) {
  Rng rng(99);
  for (int n = 1; n <= 6; ++n)
    for (int rep = 0; rep < 5; ++rep) {
      const auto m = random_matrix(n, rng);
      const Complex want = naive_permanent(m);
      EXPECT_LT(std::abs(permanent(m) - want), 1e-12 * std::max(1.0, std::abs(want))) << n;
    }
}

TEST(Permanent, Guards) {
  EXPECT_THROW(permanent(Eigen::MatrixXcd::Ones(2, 3)), std::invalid_argument);
  EXPECT_THROW(permanent(Eigen::MatrixXcd::Ones(21, 21)), std::invalid_argument);
}

TEST(Permanent, Size16UnderOneSecond) {
  Rng rng(16);
  const auto m = random_matrix(16, rng);
  const auto start = std::chrono::steady_clock::now();
  const Complex p = permanent(m);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  EXPECT_TRUE(std::isfinite(p.real()));
  EXPECT_LT(secs, 1.0);
}

TEST(Interferometer, RejectsNonUnitary) {
  EXPECT_THROW(Interferometer(Eigen::MatrixXcd::Ones(2, 2)), std::invalid_argument);
  EXPECT_NO_THROW(Interferometer(beamsplitter_matrix(0.7)));
}

TEST(TransitionAmplitude, SymmetricBeamsplitter) {
  const Interferometer u(beamsplitter_matrix(std::numbers::pi / 2));
  const std::vector<int> in = {1, 1};
  EXPECT_LT(std::abs(transition_amplitude(u, in, std::vector<int>{1, 1})), 1e-15);
  const Complex a = transition_amplitude(u, in, std::vector<int>{2, 0});
  EXPECT_LT(std::abs(a - Complex(0, 1 / std::sqrt(2.0))), 1e-15);
  EXPECT_NEAR(std::norm(a), 0.5, 1e-15);
  EXPECT_THROW(transition_amplitude(u, in, std::vector<int>{1, 0}), std::invalid_argument);
}

TEST(TransitionAmplitude, IdentityIsDiagonal) {
  const Interferometer u(Eigen::MatrixXcd::Identity(3, 3));
  const std::vector<int> in = {2, 0, 1};
  for (const auto& out : sector_occupations(3, 3))
    EXPECT_EQ(transition_amplitude(u, in, out), Complex(out == in ? 1.0 : 0.0, 0.0));
}

TEST(OutputDistribution, HongOuMandel) {
  const Interferometer u(beamsplitter_matrix(std::numbers::pi / 2));
  const auto dist = output_distribution(u, std::vector<int>{1, 1});
  std::map<Occupation, double> p;
  for (const auto& o : dist) p[o.occupation] = o.probability;
  EXPECT_NEAR((p[{2, 0}]), 0.5, 1e-15);
  EXPECT_NEAR((p[{0, 2}]), 0.5, 1e-15);
  EXPECT_NEAR((p[{1, 1}]), 0.0, 1e-15);
}

TEST(OutputDistribution, NormalizedAndMatchesFockEvolution) {
  Rng rng(2);
  for (int m = 2; m <= 5; ++m)
    for (int n = 1; n <= 4; ++n) {
      const Eigen::MatrixXcd mat = haar_unitary(m, rng);
      std::vector<int> in(static_cast<std::size_t>(m), 0);
      for (int q = 0; q < n; ++q) in[static_cast<std::size_t>(q % m)] += 1;
      const auto dist = output_distribution(Interferometer(mat), in);
      double total = 0;
      for (const auto& o : dist) total += o.probability;
      EXPECT_NEAR(total, 1.0, 1e-9);

      std::vector<ModeLabel> modes;
      for (int i = 0; i < m; ++i) modes.push_back({Spin::S1, i});
      const auto state = apply_mode_unitary(FockState::number_state(build_basis(modes, n), in), mat);
      for (const auto& o : dist) EXPECT_NEAR(std::norm(amplitude(state, o.occupation)), o.probability, 1e-10);
    }
}

TEST(OutputDistribution, RowPermutationPermutesOutputs) {
  Rng rng(31);
  const Eigen::MatrixXcd mat = haar_unitary(4, rng);
  const std::vector<int> perm = {2, 0, 3, 1};
  Eigen::MatrixXcd permuted(4, 4);
  for (int i = 0; i < 4; ++i) permuted.row(perm[static_cast<std::size_t>(i)]) = mat.row(i);
  const std::vector<int> in = {1, 1, 1, 0};
  std::map<Occupation, double> base;
  for (const auto& o : output_distribution(Interferometer(mat), in)) base[o.occupation] = o.probability;
  for (const auto& o : output_distribution(Interferometer(permuted), in)) {
    Occupation orig(4);
    for (int i = 0; i < 4; ++i) orig[static_cast<std::size_t>(i)] = o.occupation[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])];
    EXPECT_NEAR(o.probability, base[orig], 1e-12);
  }
}

TEST(OutputDistribution, SerialAndParallelKernelsAgree) {
  Rng rng(12);
  const Interferometer u(haar_unitary(6, rng));
  const std::vector<int> in = {1, 1, 1, 0, 0, 0};
  const auto outs = sector_occupations(6, 3);
  EXPECT_EQ(kernels::output_probabilities_serial(u, in, outs), kernels::output_probabilities_omp(u, in, outs));
}

TEST(OutputDistribution, Guard) {
  Rng rng(1);
  const Interferometer u(haar_unitary(16, rng));
  std::vector<int> in(16, 0);
  in[0] = 8;
  EXPECT_THROW(output_distribution(u, in), std::invalid_argument);
}

TEST(BosonSample, PointMass) {
  Rng rng(3);
  const Interferometer u(Eigen::MatrixXcd::Identity(3, 3));
  for (const auto& s : boson_sample(u, std::vector<int>{1, 0, 1}, 1000, rng))
    EXPECT_EQ(s, (Occupation{1, 0, 1}));
}

TEST(BosonSample, HongOuMandelFrequencies) {
  Rng rng(5);
  const Interferometer u(beamsplitter_matrix(std::numbers::pi / 2));
  const int n = 100'000;
  int twenty = 0;
  for (const auto& s : boson_sample(u, std::vector<int>{1, 1}, n, rng)) {
    ASSERT_NE(s, (Occupation{1, 1}));
    twenty += s[0] == 2 ? 1 : 0;
  }
  EXPECT_NEAR(twenty, n / 2.0, 3 * std::sqrt(n * 0.25));
}

TEST(BosonSample, SevenModeTotalVariation) {
  Rng rng(7);
  const Interferometer u(haar_unitary(7, rng));
  const std::vector<int> in = {1, 1, 0, 0, 0, 0, 0};
  std::map<Occupation, double> exact;
  for (const auto& o : output_distribution(u, in)) exact[o.occupation] = o.probability;
  const int n = 100'000;
  std::map<Occupation, double> empirical;
  for (const auto& s : boson_sample(u, in, n, rng)) empirical[s] += 1.0 / n;
  double tv = 0;
  for (const auto& [occ, p] : exact) tv += std::abs(p - empirical[occ]);
  EXPECT_LT(tv / 2, 0.02);
}

TEST(BosonSample, DeterministicPerSeed) {
  Rng a(10), b(10);
  Rng urng(1);
  const Interferometer u(haar_unitary(4, urng));
  const std::vector<int> in = {1, 1, 0, 0};
  EXPECT_EQ(boson_sample(u, in, 500, a), boson_sample(u, in, 500, b));
}

TEST(HaarUnitary, IsUnitary) {
  Rng rng(6);
  for (int m = 1; m <= 8; ++m) {
    const auto u = haar_unitary(m, rng);
    EXPECT_LT((u * u.adjoint() - Eigen::MatrixXcd::Identity(m, m)).norm(), 1e-12);
  }
}

}  // namespace
}  // namespace homsim
