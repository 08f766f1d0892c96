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

#include "homsim/fock.hpp"

namespace homsim {

class Rng;
struct DampedCosineFit;

enum class DecayEnvelope { Gaussian, Exponential };

/// Preparation and storage imperfections. Defaults are the calibrated values of the
/// reference experiment; p2 values reproduce g2 = 0.046 (S1) and 0.062 (S2).
struct NoiseParams {
  double eta_r = 0.85;  // ground -> Rydberg transfer
  double eta_s = 0.65;  // Rydberg -> ground-state excitation
  double p2_s1 = 0.023;
  double p2_s2 = 0.031;
  double tau_memory = 29e-6;  // 1/e storage time, s
  double tau_raman = 5e-6;    // 1/e contrast time of the Raman oscillation, s
  DecayEnvelope envelope = DecayEnvelope::Gaussian;

  double p2(Spin s) const noexcept { return s == Spin::S1 ? p2_s1 : p2_s2; }
  double preparation_efficiency() const noexcept { return eta_r * eta_s; }
  void validate() const;

  /// Unit efficiencies, no contamination, infinite lifetimes.
  static NoiseParams ideal();
};

/// Misroute: a read-out quantum is emitted in the other window instead of its own.
/// Duplicate: a detected photon also clicks a detector of the other window.
enum class CrosstalkModel { Misroute, Duplicate };

struct DetectionParams {
  double eta_det_s1 = 0.003;
  double eta_det_s2 = 0.012;
  double sigma_k = 0.3;  // collection width in grid units
  double p_dark = 1e-4;  // per detector, per read window
  double p_crosstalk = 0.01;
  bool split_same_mode = false;
  CrosstalkModel crosstalk = CrosstalkModel::Misroute;

  double eta_det(Spin s) const noexcept { return s == Spin::S1 ? eta_det_s1 : eta_det_s2; }
  /// eta_det(spin) * exp(-kidx^2 / (2 sigma_k^2))
  double efficiency(const ModeLabel& m) const noexcept;
  int detectors_per_window() const noexcept { return split_same_mode ? 2 : 1; }
  void validate() const;

  /// Unit efficiency, no dark counts or crosstalk; sigma_k and the split flag are kept.
  DetectionParams idealized() const;
};

/// Detector record of one trial. Window index is spin_index(); detector 1 exists only
/// when the window is split.
struct TrialOutcome {
  std::array<int, 2> counts{};
  std::array<std::array<bool, 2>, 2> clicks{};

  int counts_s1() const noexcept { return counts[0]; }
  int counts_s2() const noexcept { return counts[1]; }
  friend bool operator==(const TrialOutcome&, const TrialOutcome&) = default;
};

/// Click-pattern table {n1, n2} -> trials. Merging is plain integer addition, so any
/// merge order yields the same table.
class CountsHistogram {
 public:
  static constexpr int kMaxClicks = 2;

  void add(const TrialOutcome& outcome) noexcept;
  void merge(const CountsHistogram& other) noexcept;

  std::uint64_t count(int n1, int n2) const;
  std::uint64_t total_trials() const noexcept { return total_; }
  /// Trials in which the given detector of the given window clicked.
  std::uint64_t detector_clicks(Spin window, int detector) const;
  /// Trials with at least one click in the window.
  std::uint64_t window_clicks(Spin window) const noexcept;

  friend bool operator==(const CountsHistogram&, const CountsHistogram&) = default;

 private:
  std::array<std::array<std::uint64_t, kMaxClicks + 1>, kMaxClicks + 1> table_{};
  std::array<std::array<std::uint64_t, 2>, 2> detector_{};
  std::uint64_t total_ = 0;
};

/**
 * Draws the number of excitations left in `target` by one preparation attempt.
 * The blockade step yields a spurious second excitation with probability p2; each
 * excitation then completes the Rydberg round trip independently with probability
 * eta_r * eta_s. With p2 = 0 this is a single Bernoulli(eta_r eta_s) excitation,
 * and the loss-like thinning keeps g2 = 2 p2 / (1 + p2)^2 independent of efficiency.
 */
int prepare_excitation(Spin target, const NoiseParams& params, Rng& rng);

/// exp(-(t/tau)^2) or exp(-t/tau). Throws std::invalid_argument for t < 0.
double survival_probability(double storage_time, const NoiseParams& params);

/// Each stored quantum is independently kept with survival_probability(); lost quanta
/// leave the system. One draw per quantum.
void apply_memory_decay(std::span<int> occupation, double storage_time,
                        const NoiseParams& params, Rng& rng);

/**
 * Read-out and detection cascade. Each quantum of a read spin is emitted in its own
 * window, is detected with efficiency(mode), and lands on one of the window's
 * detectors (50:50 when split). Crosstalk with probability p_crosstalk per quantum
 * follows `params.crosstalk`. Every detector of a read window then adds a dark click with p_dark.
 * Detectors are not number resolving. Draw consumption is independent of the
 * parameter values, so sweeps with one seed use common random numbers.
 */
TrialOutcome sample_detection(std::span<const int> occupation, std::span<const ModeLabel> modes,
                              std::array<bool, 2> read, const DetectionParams& params,
                              Rng& rng);

/// Pulsed g2 = p_c / (p_A p_B) for a split window; nullopt when p_A p_B = 0.
std::optional<double> estimate_g2(const CountsHistogram& hist, Spin window);

/// 1 - 2 c_dip / c_ref. Throws std::invalid_argument unless c_ref > 0.
double hom_visibility(double c_dip, double c_ref);

inline constexpr double kNoonClassicalBound = 1.0 / 3.0;

struct RamseyVisibility {
  double visibility = 0.0;
  bool above_classical_bound = false;
};

/// Amplitude over offset of a converged fit; throws FitError otherwise.
RamseyVisibility ramsey_visibility(const DampedCosineFit& fit);

}  // namespace homsim
