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

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "homsim/fock.hpp"
#include "homsim/noise.hpp"
#include "homsim/pulse_program.hpp"

namespace homsim {

class Rng;

struct Physics {
  double rabi_mhz = 1.626;    // Omega / 2 pi
  double larmor_mhz = 1.401;  // S1-S2 Zeeman beat frequency

  double rabi_angular() const noexcept;
  void validate() const;
};

/// Largest |kidx| reachable from the k = 0 modes under the program's Raman kicks.
int reachable_half_width(const PulseProgram& program);

/// Per-Raman angle replacement used for dephased pulses; nullopt keeps Omega t.
using AngleOverrides = std::span<const std::optional<double>>;

/**
 * Coherent part of one trial: starting from vacuum, Prepare creates the given
 * number of quanta in its k = 0 mode, Raman applies the k-shifted beam splitter
 * with angle Omega t, and Wait advances the Larmor phase 2 pi f_L t on every S2
 * mode (the S1 frame is held fixed).
 */
FockState evolve(const PulseProgram& program, std::span<const int> prepared,
                 const Physics& physics, AngleOverrides overrides = {});

/**
 * Monte Carlo trial engine for one program and parameter set; `run` is const and
 * safe to call concurrently.
 *
 * Per trial: prepare_excitation per Prepare; each Raman pulse stays coherent with
 * probability exp(-t / tau_raman), otherwise its angle is uniform on [0, 2 pi);
 * Born sampling; memory decay over the interval from the end of the first Prepare
 * to the start of the first Read; detection of the read spins.
 *
 * With at most kMaxCachedRamans pulses, construction tabulates the outcome
 * distribution for every (preparation outcome, dephasing pattern). Outcome
 * probabilities are trigonometric polynomials of degree <= N in each pulse angle
 * for N quanta, so the uniform-angle average is exact on 2N + 2 equally spaced
 * angles. Longer programs draw the random angle per trial instead.
 */
class TrialRunner {
 public:
  static constexpr std::size_t kMaxCachedRamans = 3;

  TrialRunner(PulseProgram program, NoiseParams noise, DetectionParams detection,
              Physics physics);

  TrialOutcome run(Rng& rng) const;

  const PulseProgram& program() const noexcept { return program_; }
  const std::vector<ModeLabel>& modes() const noexcept { return modes_; }
  double storage_time() const noexcept { return storage_time_; }

 private:
  struct Cached {
    BasisPtr basis;
    std::vector<double> cumulative;
  };

  PulseProgram program_;
  NoiseParams noise_;
  DetectionParams detection_;
  Physics physics_;
  std::vector<ModeLabel> modes_;
  std::vector<Spin> prepare_targets_;
  std::vector<double> raman_keep_;  // coherence probability per Raman pulse
  std::array<bool, 2> read_{};
  double storage_time_ = 0.0;
  bool tabulated_dephasing_ = false;
  std::vector<Cached> cache_;  // key * 2^R + dephasing mask, or key alone
};

TrialOutcome execute(const PulseProgram& program, const NoiseParams& noise,
                     const DetectionParams& detection, const Physics& physics, Rng& rng);

namespace kernels {

/// Trials [0, trials) of sweep point `point`; each trial draws from
/// Rng::substream(seed, point, trial).
CountsHistogram run_trials_serial(const TrialRunner& runner, std::uint64_t seed,
                                  std::uint64_t point, std::uint64_t trials);
/// Identical histogram for any thread count.
CountsHistogram run_trials_omp(const TrialRunner& runner, std::uint64_t seed,
                               std::uint64_t point, std::uint64_t trials);

}  // namespace kernels

}  // namespace homsim
