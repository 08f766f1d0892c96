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

#include <complex>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace homsim {

class Rng;

using Complex = std::complex<double>;

enum class Spin : std::uint8_t { S1 = 0, S2 = 1 };

constexpr Spin other(Spin s) noexcept { return s == Spin::S1 ? Spin::S2 : Spin::S1; }
constexpr int spin_index(Spin s) noexcept { return static_cast<int>(s); }
const char* to_string(Spin s) noexcept;

/// One collective mode: internal state plus wave-vector index in units of one Raman shift.
struct ModeLabel {
  Spin spin = Spin::S1;
  int kidx = 0;

  friend constexpr auto operator<=>(const ModeLabel&, const ModeLabel&) = default;
};

std::string to_string(const ModeLabel& m);

/// (S1,-K..K) followed by (S2,-K..K).
std::vector<ModeLabel> grid_modes(int half_width);

/// Hard cap on the number of modes a basis may hold; keeps per-trial buffers on the stack.
inline constexpr int kMaxModes = 32;

/**
 * Occupation-number basis over an ordered list of modes, truncated at total
 * excitation nmax. States are ordered by total excitation number, then in
 * descending lexicographic order within a sector, so for two modes and
 * nmax = 2 the order is 00, 10, 01, 20, 11, 02. Lookup is a closed-form
 * combinatorial rank, no hashing.
 */
class FockBasis {
 public:
  FockBasis(std::vector<ModeLabel> modes, int nmax);

  std::size_t size() const noexcept { return size_; }
  int num_modes() const noexcept { return static_cast<int>(modes_.size()); }
  int nmax() const noexcept { return nmax_; }
  const std::vector<ModeLabel>& modes() const noexcept { return modes_; }

  std::span<const int> occupation(std::size_t index) const {
    return {occupations_.data() + index * modes_.size(), modes_.size()};
  }
  int total(std::size_t index) const noexcept { return totals_[index]; }

  /// Throws std::out_of_range when the vector is not a member of this basis.
  std::size_t index_of(std::span<const int> occupation) const;
  std::optional<std::size_t> find(std::span<const int> occupation) const;

  std::optional<int> mode_index(const ModeLabel& m) const;
  int require_mode(const ModeLabel& m) const;

 private:
  std::uint64_t binom(int n, int k) const;

  std::vector<ModeLabel> modes_;
  int nmax_;
  std::size_t size_ = 0;
  std::vector<int> occupations_;
  std::vector<int> totals_;
  std::vector<std::uint64_t> binom_;  // (nmax + M + 1)^2 Pascal table
  int binom_dim_ = 0;
};

using BasisPtr = std::shared_ptr<const FockBasis>;

/// Throws std::invalid_argument on empty or duplicate labels, nmax < 0, or too many modes.
BasisPtr build_basis(std::vector<ModeLabel> modes, int nmax);

/// Pure state on a FockBasis. Immutable; every operation returns a new state.
class FockState {
 public:
  FockState(BasisPtr basis, std::vector<Complex> amplitudes);

  static FockState vacuum(BasisPtr basis);
  static FockState number_state(BasisPtr basis, std::span<const int> occupation);

  const FockBasis& basis() const noexcept { return *basis_; }
  const BasisPtr& basis_ptr() const noexcept { return basis_; }
  std::span<const Complex> amplitudes() const noexcept { return amplitudes_; }
  double norm() const;

 private:
  BasisPtr basis_;
  std::vector<Complex> amplitudes_;
};

/// Angular Rabi frequency (rad/s), duration (s) and wave-vector kick in grid units.
struct RamanPulse {
  double rabi_frequency = 0.0;
  double duration = 0.0;
  int kshift = 0;

  double angle() const noexcept { return rabi_frequency * duration; }
};

/**
 * Two-mode beam splitter of rotation angle theta = Omega t:
 *
 *   a^dag -> cos(theta/2) a^dag + i sin(theta/2) b^dag
 *   b^dag -> i sin(theta/2) a^dag + cos(theta/2) b^dag
 *
 * Applied exactly by expanding the transformed creation operators on every
 * basis state. Other conventions differ from this one only by mode-local
 * phases, which no count statistic can see.
 */
FockState apply_beamsplitter(const FockState& state, const ModeLabel& a, const ModeLabel& b,
                             double angle);

/// Couples (S1,k) with (S2,k+kshift) for every k of the grid.
FockState apply_raman_with_angle(const FockState& state, const RamanPulse& pulse);
FockState apply_raman_pairs(const FockState& state, int kshift, double angle);

/// Multiplies each amplitude by exp(i n phi), n the occupation of `mode`.
FockState apply_phase(const FockState& state, const ModeLabel& mode, double phi);

/// Applies (a^dag)^count and renormalizes. Throws if the result leaves the basis cutoff.
FockState apply_creation(const FockState& state, const ModeLabel& mode, int count);

/// Linear-optical evolution a_j^dag -> sum_i u(i, j) a_i^dag over all basis modes.
/// Computed by direct polynomial expansion, independent of any permanent routine.
FockState apply_mode_unitary(const FockState& state, const Eigen::MatrixXcd& u);

Complex amplitude(const FockState& state, std::span<const int> occupation);

std::vector<double> probabilities(const FockState& state);

/// Running sum of |amplitude|^2 in basis order; the last entry is the total weight.
std::vector<double> cumulative_probabilities(const FockState& state);

/// Inverse-CDF pick over a cumulative table; consumes exactly one uniform draw.
std::size_t sample_index(std::span<const double> cumulative, Rng& rng);

/// Born-rule projection. Throws std::domain_error if the norm is off by more than 1e-6.
std::vector<int> born_sample(const FockState& state, Rng& rng);
std::size_t born_sample_index(const FockState& state, Rng& rng);

}  // namespace homsim
