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

#include "homsim/noise.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <fmt/format.h>

#include "homsim/fitting.hpp"
#include "homsim/rng.hpp"

namespace homsim {

namespace {

void check_probability(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0))
    throw std::invalid_argument(fmt::format("{} must be a probability, got {}", name, p));
}

}  // namespace

void NoiseParams::validate() const {
  check_probability(eta_r, "noise.eta_r");
  check_probability(eta_s, "noise.eta_s");
  check_probability(p2_s1, "noise.p2_s1");
  check_probability(p2_s2, "noise.p2_s2");
  if (!(tau_memory > 0.0)) throw std::invalid_argument("noise.tau_memory must be > 0");
  if (!(tau_raman > 0.0)) throw std::invalid_argument("noise.tau_raman must be > 0");
}

NoiseParams NoiseParams::ideal() {
  NoiseParams p;
  p.eta_r = p.eta_s = 1.0;
  p.p2_s1 = p.p2_s2 = 0.0;
  p.tau_memory = p.tau_raman = std::numeric_limits<double>::infinity();
  return p;
}

double DetectionParams::efficiency(const ModeLabel& m) const noexcept {
  if (m.kidx == 0) return eta_det(m.spin);
  const double k = m.kidx;
  return eta_det(m.spin) * std::exp(-k * k / (2.0 * sigma_k * sigma_k));
}

void DetectionParams::validate() const {
  check_probability(eta_det_s1, "detection.eta_det_s1");
  check_probability(eta_det_s2, "detection.eta_det_s2");
  check_probability(p_dark, "detection.p_dark");
  check_probability(p_crosstalk, "detection.p_crosstalk");
  if (!(sigma_k > 0.0)) throw std::invalid_argument("detection.sigma_k must be > 0");
}

DetectionParams DetectionParams::idealized() const {
  DetectionParams p = *this;
  p.eta_det_s1 = p.eta_det_s2 = 1.0;
  p.p_dark = p.p_crosstalk = 0.0;
  return p;
}

void CountsHistogram::add(const TrialOutcome& o) noexcept {
  ++table_[o.counts[0]][o.counts[1]];
  for (int w = 0; w < 2; ++w)
    for (int d = 0; d < 2; ++d) detector_[w][d] += o.clicks[w][d];
  ++total_;
}

void CountsHistogram::merge(const CountsHistogram& other) noexcept {
  for (int a = 0; a <= kMaxClicks; ++a)
    for (int b = 0; b <= kMaxClicks; ++b) table_[a][b] += other.table_[a][b];
  for (int w = 0; w < 2; ++w)
    for (int d = 0; d < 2; ++d) detector_[w][d] += other.detector_[w][d];
  total_ += other.total_;
}

std::uint64_t CountsHistogram::count(int n1, int n2) const {
  if (n1 < 0 || n2 < 0 || n1 > kMaxClicks || n2 > kMaxClicks)
    throw std::out_of_range("click pattern outside the histogram");
  return table_[n1][n2];
}

std::uint64_t CountsHistogram::detector_clicks(Spin window, int detector) const {
  if (detector < 0 || detector > 1) throw std::out_of_range("detector index must be 0 or 1");
  return detector_[spin_index(window)][detector];
}

std::uint64_t CountsHistogram::window_clicks(Spin window) const noexcept {
  std::uint64_t s = 0;
  for (int a = 0; a <= kMaxClicks; ++a)
    for (int b = 0; b <= kMaxClicks; ++b)
      if ((window == Spin::S1 ? a : b) > 0) s += table_[a][b];
  return s;
}

int prepare_excitation(Spin target, const NoiseParams& params, Rng& rng) {
  const int attempts = rng.bernoulli(params.p2(target)) ? 2 : 1;
  const double eta = params.preparation_efficiency();
  int n = 0;
  for (int i = 0; i < attempts; ++i) n += rng.bernoulli(eta);
  return n;
}

double survival_probability(double storage_time, const NoiseParams& params) {
  if (storage_time < 0.0) throw std::invalid_argument("storage time must be >= 0");
  const double x = storage_time / params.tau_memory;
  return params.envelope == DecayEnvelope::Gaussian ? std::exp(-x * x) : std::exp(-x);
}

void apply_memory_decay(std::span<int> occupation, double storage_time,
                        const NoiseParams& params, Rng& rng) {
  const double keep = survival_probability(storage_time, params);
  for (int& n : occupation) {
    int kept = 0;
    for (int q = 0; q < n; ++q) kept += rng.bernoulli(keep);
    n = kept;
  }
}

TrialOutcome sample_detection(std::span<const int> occupation, std::span<const ModeLabel> modes,
                              std::array<bool, 2> read, const DetectionParams& params,
                              Rng& rng) {
  if (occupation.size() != modes.size())
    throw std::invalid_argument("occupation and mode list differ in length");
  TrialOutcome out;
  const int detectors = params.detectors_per_window();
  for (std::size_t m = 0; m < modes.size(); ++m) {
    const int n = occupation[m];
    if (n == 0) continue;
    const double eff = params.efficiency(modes[m]);
    for (int q = 0; q < n; ++q) {
      const double u_ct = rng.uniform();
      const double u_det = rng.uniform();
      const double u_route = rng.uniform();
      const bool crossed = u_ct < params.p_crosstalk;
      const bool misrouted = crossed && params.crosstalk == CrosstalkModel::Misroute;
      const bool duplicated = crossed && params.crosstalk == CrosstalkModel::Duplicate;
      const int w = spin_index(misrouted ? other(modes[m].spin) : modes[m].spin);
      if (!read[w] || !(u_det < eff)) continue;
      const int d = (detectors == 2 && u_route >= 0.5) ? 1 : 0;
      out.clicks[w][d] = true;
      if (duplicated && read[1 - w]) out.clicks[1 - w][d] = true;
    }
  }
  for (int w = 0; w < 2; ++w) {
    for (int d = 0; d < 2; ++d) {
      const bool dark = rng.uniform() < params.p_dark;
      if (read[w] && d < detectors && dark) out.clicks[w][d] = true;
    }
    out.counts[w] = int{out.clicks[w][0]} + int{out.clicks[w][1]};
  }
  return out;
}

std::optional<double> estimate_g2(const CountsHistogram& hist, Spin window) {
  const double n = static_cast<double>(hist.total_trials());
  if (n <= 0.0) return std::nullopt;
  std::uint64_t both = 0;
  for (int other_count = 0; other_count <= CountsHistogram::kMaxClicks; ++other_count)
    both += window == Spin::S1 ? hist.count(2, other_count) : hist.count(other_count, 2);
  const double pa = static_cast<double>(hist.detector_clicks(window, 0)) / n;
  const double pb = static_cast<double>(hist.detector_clicks(window, 1)) / n;
  if (pa * pb == 0.0) return std::nullopt;
  return (static_cast<double>(both) / n) / (pa * pb);
}

double hom_visibility(double c_dip, double c_ref) {
  if (!(c_ref > 0.0)) throw std::invalid_argument("reference coincidence rate must be > 0");
  return 1.0 - 2.0 * c_dip / c_ref;
}

RamseyVisibility ramsey_visibility(const DampedCosineFit& fit) {
  if (!fit.converged) throw FitError("Ramsey visibility needs a converged fit");
  if (!(fit.params.offset > 0.0)) throw FitError("fitted offset must be positive");
  const double v = fit.params.amplitude / fit.params.offset;
  return {v, v > kNoonClassicalBound};
}

}  // namespace homsim
