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

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "homsim/fock.hpp"
#include "homsim/permanent.hpp"
#include "homsim/rng.hpp"

namespace homsim {
namespace {

using std::numbers::pi;
const ModeLabel kA{Spin::S1, 0};
const ModeLabel kB{Spin::S2, 0};

BasisPtr two_mode(int nmax) { return build_basis({kA, kB}, nmax); }

FockState fock(const BasisPtr& basis, std::vector<int> occ) { return FockState::number_state(basis, occ); }

Complex amp(const FockState& s, std::vector<int> occ) { return amplitude(s, occ); }

FockState random_state(const BasisPtr& basis, Rng& rng) {
  std::vector<Complex> a(basis->size());
  double norm = 0.0;
  for (auto& x : a) {
    x = {rng.normal(), rng.normal()};
    norm += std::norm(x);
  }
  for (auto& x : a) x /= std::sqrt(norm);
  return FockState(basis, std::move(a));
}

double distance(const FockState& a, const FockState& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.amplitudes().size(); ++i) d = std::max(d, std::abs(a.amplitudes()[i] - b.amplitudes()[i]));
  return d;
}

// Stars and bars, computed independently of the basis' own table.
std::size_t count_states(int modes, int nmax) {
  std::size_t total = 0;
  for (int n = 0; n <= nmax; ++n) {
    double c = 1.0;
    for (int i = 1; i <= modes - 1; ++i) c = c * (n + i) / i;
    total += static_cast<std::size_t>(std::llround(c));
  }
  return total;
}

TEST(FockBasis, TwoModesCanonicalOrder) {
  const auto basis = two_mode(2);
  ASSERT_EQ(basis->size(), 6u);
  const std::vector<std::vector<int>> expected = {{0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}};
  for (std::size_t i = 0; i < expected.size(); ++i) {
    const auto occ = basis->occupation(i);
    EXPECT_EQ(std::vector<int>(occ.begin(), occ.end()), expected[i]) << i;
  }
}

TEST(FockBasis, VacuumOnlyBasis) {
  const auto basis = build_basis({kA}, 0);
  EXPECT_EQ(basis->size(), 1u);
  EXPECT_EQ(basis->occupation(0)[0], 0);
}

TEST(FockBasis, SizeMatchesBruteForce) {
  EXPECT_EQ(build_basis(grid_modes(0), 2)->size(), count_states(2, 2));
  const std::vector<ModeLabel> four = {{Spin::S1, -1}, {Spin::S1, 0}, {Spin::S2, 0}, {Spin::S2, 1}};
  EXPECT_EQ(build_basis(four, 2)->size(), 15u);
  for (int k = 0; k <= 2; ++k)
    for (int n = 0; n <= 4; ++n)
      EXPECT_EQ(build_basis(grid_modes(k), n)->size(), count_states(2 * (2 * k + 1), n));
}

TEST(FockBasis, IndexLookupInvertsEnumeration) {
  const auto basis = build_basis(grid_modes(1), 3);
  for (std::size_t i = 0; i < basis->size(); ++i) EXPECT_EQ(basis->index_of(basis->occupation(i)), i);
  const std::vector<int> too_many = {4, 0, 0, 0, 0, 0};
  EXPECT_FALSE(basis->find(too_many).has_value());
  EXPECT_THROW(basis->index_of(too_many), std::out_of_range);
}

TEST(FockBasis, RejectsBadInput) {
  EXPECT_THROW(build_basis({kA, kA}, 1), std::invalid_argument);
  EXPECT_THROW(build_basis({}, 1), std::invalid_argument);
  EXPECT_THROW(build_basis({kA}, -1), std::invalid_argument);
}

TEST(Beamsplitter, SingleQuantumHalfPulse) {
  const auto basis = two_mode(1);
  const auto out = apply_beamsplitter(fock(basis, {1, 0}), kA, kB, pi / 2);
  EXPECT_NEAR(std::abs(amp(out, {1, 0}) - Complex(1 / std::sqrt(2.0), 0)), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(amp(out, {0, 1}) - Complex(0, 1 / std::sqrt(2.0))), 0.0, 1e-12);
}

TEST(Beamsplitter, ZeroAngleIsIdentity) {
  Rng rng(3);
  const auto basis = two_mode(3);
  const auto s = random_state(basis, rng);
  EXPECT_LT(distance(apply_beamsplitter(s, kA, kB, 0.0), s), 1e-15);
}

TEST(Beamsplitter, HongOuMandelZero) {
  const auto basis = two_mode(2);
  const auto out = apply_beamsplitter(fock(basis, {1, 1}), kA, kB, pi / 2);
  const Complex expected(0, 1 / std::sqrt(2.0));
  EXPECT_LT(std::abs(amp(out, {1, 1})), 1e-12);
  EXPECT_LT(std::abs(amp(out, {2, 0}) - expected), 1e-12);
  EXPECT_LT(std::abs(amp(out, {0, 2}) - expected), 1e-12);
}

TEST(Beamsplitter, CoincidenceProbabilityClosedForm) {
  const auto basis = two_mode(2);
  for (int i = 0; i <= 40; ++i) {
    const double theta = 0.17 * i;
    const auto out = apply_beamsplitter(fock(basis, {1, 1}), kA, kB, theta);
    EXPECT_NEAR(std::norm(amp(out, {1, 1})), std::pow(std::cos(theta), 2), 1e-9) << theta;
  }
}

TEST(Beamsplitter, UnitarityCompositionInverse) {
  Rng rng(11);
  const auto basis = build_basis(grid_modes(1), 3);
  const ModeLabel a{Spin::S1, -1}, b{Spin::S2, 1};
  for (int rep = 0; rep < 20; ++rep) {
    const auto s = random_state(basis, rng);
    const double t1 = 6 * rng.uniform() - 3, t2 = 6 * rng.uniform() - 3;
    const auto once = apply_beamsplitter(s, a, b, t1);
    EXPECT_NEAR(once.norm(), 1.0, 1e-9);
    EXPECT_LT(distance(apply_beamsplitter(once, a, b, t2), apply_beamsplitter(s, a, b, t1 + t2)), 1e-9);
    EXPECT_LT(distance(apply_beamsplitter(once, a, b, -t1), s), 1e-9);
  }
}

TEST(Beamsplitter, ConservesExcitationNumber) {
  const auto basis = build_basis(grid_modes(1), 3);
  std::vector<int> occ(6, 0);
  occ[1] = 1;
  occ[4] = 1;
  auto s = FockState::number_state(basis, occ);
  s = apply_beamsplitter(s, {Spin::S1, 0}, {Spin::S2, 0}, 1.1);
  s = apply_beamsplitter(s, {Spin::S1, 1}, {Spin::S2, 0}, 0.4);
  s = apply_phase(s, {Spin::S2, 0}, 0.9);
  for (std::size_t i = 0; i < basis->size(); ++i)
    if (basis->total(i) != 2) EXPECT_LT(std::abs(s.amplitudes()[i]), 1e-12);
}

TEST(Beamsplitter, Errors) {
  const auto basis = two_mode(1);
  const auto s = fock(basis, {1, 0});
  EXPECT_THROW(apply_beamsplitter(s, kA, kA, 1.0), std::invalid_argument);
  EXPECT_THROW(apply_beamsplitter(s, kA, {Spin::S2, 3}, 1.0), std::invalid_argument);
}

TEST(Raman, ShiftedPartners) {
  const auto basis = build_basis(grid_modes(1), 1);
  std::vector<int> s1(6, 0), s2(6, 0);
  s1[basis->require_mode({Spin::S1, 0})] = 1;
  s2[basis->require_mode({Spin::S2, 0})] = 1;
  const double h = 1 / std::sqrt(2.0);

  auto out = apply_raman_pairs(FockState::number_state(basis, s1), 1, pi / 2);
  std::vector<int> shifted(6, 0);
  shifted[basis->require_mode({Spin::S2, 1})] = 1;
  EXPECT_LT(std::abs(amplitude(out, s1) - Complex(h, 0)), 1e-12);
  EXPECT_LT(std::abs(amplitude(out, shifted) - Complex(0, h)), 1e-12);

  out = apply_raman_pairs(FockState::number_state(basis, s2), 1, pi / 2);
  std::fill(shifted.begin(), shifted.end(), 0);
  shifted[basis->require_mode({Spin::S1, -1})] = 1;
  EXPECT_LT(std::abs(amplitude(out, s2) - Complex(h, 0)), 1e-12);
  EXPECT_LT(std::abs(amplitude(out, shifted) - Complex(0, h)), 1e-12);
}

TEST(Raman, ZeroShiftEqualsBeamsplitter) {
  Rng rng(5);
  const auto basis = build_basis(grid_modes(0), 3);
  const auto s = random_state(basis, rng);
  const RamanPulse pulse{2 * pi * 1.626e6, 120e-9, 0};
  EXPECT_LT(distance(apply_raman_with_angle(s, pulse), apply_beamsplitter(s, kA, kB, pulse.angle())), 1e-14);
}

TEST(Raman, PartnerOutsideGridIsAnError) {
  const auto basis = build_basis(grid_modes(1), 1);
  std::vector<int> occ(6, 0);
  occ[basis->require_mode({Spin::S1, 1})] = 1;
  EXPECT_THROW(apply_raman_pairs(FockState::number_state(basis, occ), 1, 0.3), std::out_of_range);
  EXPECT_THROW(apply_raman_with_angle(FockState::vacuum(basis), {-1.0, 1e-7, 0}), std::invalid_argument);
  EXPECT_THROW(apply_raman_with_angle(FockState::vacuum(basis), {1.0, -1e-7, 0}), std::invalid_argument);
}

TEST(Phase, MultipliesByOccupation) {
  const auto basis = two_mode(2);
  auto out = apply_phase(fock(basis, {0, 1}), kB, pi);
  EXPECT_LT(std::abs(amp(out, {0, 1}) + 1.0), 1e-15);
  out = apply_phase(fock(basis, {0, 2}), kB, 0.3);
  EXPECT_LT(std::abs(amp(out, {0, 2}) - std::polar(1.0, 0.6)), 1e-15);
  EXPECT_THROW(apply_phase(out, {Spin::S1, 1}, 0.3), std::invalid_argument);
}

TEST(Phase, RamseySandwich) {
  const auto basis = two_mode(1);
  for (int i = 0; i < 24; ++i) {
    const double phi = 0.3 * i;
    auto s = apply_beamsplitter(fock(basis, {1, 0}), kA, kB, pi / 2);
    s = apply_phase(s, kB, phi);
    s = apply_beamsplitter(s, kA, kB, pi / 2);
    // cos^2(phi/2 - pi/2) form; with this convention it reads cos^2(phi/2).
    EXPECT_NEAR(std::norm(amp(s, {0, 1})), std::pow(std::cos(phi / 2), 2), 1e-12);
  }
}

TEST(Amplitude, VacuumAndErrors) {
  const auto basis = two_mode(1);
  EXPECT_EQ(amp(FockState::vacuum(basis), {0, 0}), Complex(1, 0));
  EXPECT_THROW(amp(FockState::vacuum(basis), {2, 0}), std::out_of_range);
  EXPECT_THROW(amp(FockState::vacuum(basis), {0}), std::out_of_range);
}

TEST(Creation, BuildsNumberStates) {
  const auto basis = two_mode(2);
  auto s = apply_creation(FockState::vacuum(basis), kA, 1);
  s = apply_creation(s, kB, 1);
  EXPECT_LT(distance(s, fock(basis, {1, 1})), 1e-15);
  EXPECT_THROW(apply_creation(s, kB, 1), std::out_of_range);
}

TEST(BornSample, DeterministicState) {
  Rng rng(1);
  const auto basis = two_mode(2);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(born_sample(fock(basis, {1, 1}), rng), (std::vector<int>{1, 1}));
}

TEST(BornSample, BalancedSingleQuantumWithinBinomialBound) {
  Rng rng(2024);
  const auto basis = two_mode(1);
  const auto s = apply_beamsplitter(fock(basis, {1, 0}), kA, kB, pi / 2);
  const int n = 100'000;
  int first = 0;
  for (int i = 0; i < n; ++i) first += born_sample(s, rng)[0];
  const double sigma = std::sqrt(n * 0.25);
  EXPECT_NEAR(first, n / 2.0, 3 * sigma);
}

TEST(BornSample, NeverYieldsZeroAmplitudeOutcome) {
  Rng rng(9);
  const auto basis = two_mode(2);
  const auto s = apply_beamsplitter(fock(basis, {1, 1}), kA, kB, pi / 2);
  for (int i = 0; i < 20'000; ++i) EXPECT_NE(born_sample(s, rng), (std::vector<int>{1, 1}));
}

TEST(BornSample, RejectsUnnormalizedState) {
  Rng rng(1);
  const auto basis = two_mode(1);
  FockState bad(basis, {Complex(0.5, 0), Complex(0, 0), Complex(0, 0)});
  EXPECT_THROW(born_sample(bad, rng), std::domain_error);
}

TEST(BornSample, DeterministicPerStream) {
  const auto basis = build_basis(grid_modes(1), 2);
  Rng seed_rng(77);
  const auto s = random_state(basis, seed_rng);
  Rng a(123), b(123);
  for (int i = 0; i < 200; ++i) EXPECT_EQ(born_sample(s, a), born_sample(s, b));
}

// Independent route: arbitrary mode unitary by polynomial expansion against
// permanent-based transition amplitudes.
TEST(ModeUnitary, MatchesPermanentAmplitudes) {
  Rng rng(42);
  for (int m = 2; m <= 4; ++m) {
    const Eigen::MatrixXcd u = haar_unitary(m, rng);
    std::vector<ModeLabel> modes;
    for (int i = 0; i < m; ++i) modes.push_back({Spin::S1, i});
    const auto basis = build_basis(modes, 3);
    std::vector<int> input(static_cast<std::size_t>(m), 0);
    input[0] = 2;
    input[static_cast<std::size_t>(m - 1)] += 1;
    const auto out = apply_mode_unitary(FockState::number_state(basis, input), u);
    const Interferometer ifm(u);
    for (const auto& occ : sector_occupations(m, 3))
      EXPECT_LT(std::abs(amplitude(out, occ) - transition_amplitude(ifm, input, occ)), 1e-10);
  }
}

TEST(ModeUnitary, BeamsplitterMatrixAgreesWithClosedForm) {
  const auto basis = two_mode(3);
  Rng rng(8);
  const auto s = random_state(basis, rng);
  for (double theta : {0.3, pi / 2, 2.0}) {
    EXPECT_LT(distance(apply_mode_unitary(s, beamsplitter_matrix(theta)), apply_beamsplitter(s, kA, kB, theta)),
              1e-12);
  }
}

}  // namespace
}  // namespace homsim
