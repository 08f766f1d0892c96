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

#include "homsim/execute.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <stdexcept>

#include "homsim/rng.hpp"

namespace homsim {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

template <class... Fs>
struct Overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

int total_of(std::span<const int> v) {
  int n = 0;
  for (int x : v) n += x;
  return n;
}

FockState evolve_on(const BasisPtr& basis, const PulseProgram& program,
                    std::span<const int> prepared, const Physics& physics,
                    AngleOverrides overrides) {
  FockState state = FockState::vacuum(basis);
  std::size_t prep_i = 0, raman_i = 0;
  const double larmor = kTwoPi * physics.larmor_mhz * 1e6;
  for (const auto& s : program.statements) {
    std::visit(Overloaded{
                   [&](const Prepare& p) {
                     state = apply_creation(state, {p.target, 0}, prepared[prep_i++]);
                   },
                   [&](const Raman& r) {
                     const double omega =
                         r.rabi_mhz ? kTwoPi * *r.rabi_mhz * 1e6 : physics.rabi_angular();
                     double angle = omega * static_cast<double>(r.duration_ns) * 1e-9;
                     if (raman_i < overrides.size() && overrides[raman_i]) angle = *overrides[raman_i];
                     ++raman_i;
                     state = apply_raman_pairs(state, r.angle, angle);
                   },
                   [&](const Wait& w) {
                     const double phi = larmor * static_cast<double>(w.duration_ns) * 1e-9;
                     for (const auto& m : basis->modes())
                       if (m.spin == Spin::S2) state = apply_phase(state, m, phi);
                   },
                   [](const Read&) {},
               },
               s);
  }
  return state;
}

std::size_t count_prepares(const PulseProgram& program) {
  return std::count_if(program.statements.begin(), program.statements.end(),
                       [](const Statement& s) { return std::holds_alternative<Prepare>(s); });
}

}  // namespace

double Physics::rabi_angular() const noexcept { return kTwoPi * rabi_mhz * 1e6; }

void Physics::validate() const {
  if (!(rabi_mhz > 0.0)) throw std::invalid_argument("physics.rabi_mhz must be > 0");
  if (!(larmor_mhz >= 0.0)) throw std::invalid_argument("physics.larmor_mhz must be >= 0");
}

int reachable_half_width(const PulseProgram& program) {
  std::set<ModeLabel> reach{{Spin::S1, 0}, {Spin::S2, 0}};
  for (const auto& s : program.statements) {
    const auto* r = std::get_if<Raman>(&s);
    if (r == nullptr || r->angle == 0) continue;
    std::set<ModeLabel> next = reach;
    for (const auto& m : reach)
      next.insert(m.spin == Spin::S1 ? ModeLabel{Spin::S2, m.kidx + r->angle}
                                     : ModeLabel{Spin::S1, m.kidx - r->angle});
    reach = std::move(next);
  }
  int k = 0;
  for (const auto& m : reach) k = std::max(k, std::abs(m.kidx));
  return k;
}

FockState evolve(const PulseProgram& program, std::span<const int> prepared,
                 const Physics& physics, AngleOverrides overrides) {
  validate_structure(program);
  physics.validate();
  if (prepared.size() != count_prepares(program))
    throw std::invalid_argument("one prepared count per Prepare statement is required");
  for (int n : prepared)
    if (n < 0) throw std::invalid_argument("prepared counts must be >= 0");
  auto basis = build_basis(grid_modes(reachable_half_width(program)), total_of(prepared));
  return evolve_on(basis, program, prepared, physics, overrides);
}

TrialRunner::TrialRunner(PulseProgram program, NoiseParams noise, DetectionParams detection,
                         Physics physics)
    : program_(std::move(program)),
      noise_(noise),
      detection_(detection),
      physics_(physics) {
  validate_structure(program_);
  noise_.validate();
  detection_.validate();
  physics_.validate();

  modes_ = grid_modes(reachable_half_width(program_));
  if (modes_.size() > static_cast<std::size_t>(kMaxModes))
    throw std::invalid_argument("Raman kicks reach beyond the supported wave-vector grid");

  std::int64_t t = 0;
  std::optional<std::int64_t> first_prepare_end, first_read_start;
  for (const auto& s : program_.statements) {
    if (const auto* p = std::get_if<Prepare>(&s)) {
      prepare_targets_.push_back(p->target);
      if (!first_prepare_end) first_prepare_end = t + kPrepareDurationNs;
    } else if (const auto* r = std::get_if<Raman>(&s)) {
      raman_keep_.push_back(std::exp(-static_cast<double>(r->duration_ns) * 1e-9 / noise_.tau_raman));
    } else if (const auto* rd = std::get_if<Read>(&s)) {
      read_[spin_index(rd->target)] = true;
      if (!first_read_start) first_read_start = t;
    }
    t += statement_duration_ns(s);
  }
  if (first_prepare_end && first_read_start && *first_read_start > *first_prepare_end)
    storage_time_ = static_cast<double>(*first_read_start - *first_prepare_end) * 1e-9;

  // Each prepare yields 0, 1 or 2 quanta.
  const std::size_t np = prepare_targets_.size();
  const std::size_t nr = raman_keep_.size();
  std::size_t keys = 1;
  for (std::size_t i = 0; i < np; ++i) keys *= 3;
  tabulated_dephasing_ = nr <= kMaxCachedRamans;
  const std::size_t masks = tabulated_dephasing_ ? std::size_t{1} << nr : 1;
  std::vector<BasisPtr> bases(2 * np + 1);
  cache_.resize(keys * masks);
  std::vector<int> counts(np);
  for (std::size_t key = 0; key < keys; ++key) {
    std::size_t rest = key;
    for (std::size_t i = np; i-- > 0;) {
      counts[i] = static_cast<int>(rest % 3);
      rest /= 3;
    }
    const int total = total_of(counts);
    if (!bases[total]) bases[total] = build_basis(modes_, total);
    const int nodes = 2 * total + 2;
    for (std::size_t mask = 0; mask < masks; ++mask) {
      std::vector<std::size_t> dephased;
      for (std::size_t r = 0; r < nr; ++r)
        if (mask >> r & 1) dephased.push_back(r);
      std::size_t grid = 1;
      for (std::size_t d = 0; d < dephased.size(); ++d) grid *= static_cast<std::size_t>(nodes);

      std::vector<double> mean(bases[total]->size(), 0.0);
      std::vector<std::optional<double>> overrides(nr);
      for (std::size_t g = 0; g < grid; ++g) {
        std::size_t digits = g;
        for (std::size_t r : dephased) {
          overrides[r] = kTwoPi * static_cast<double>(digits % nodes) / nodes;
          digits /= static_cast<std::size_t>(nodes);
        }
        const auto p = probabilities(evolve_on(bases[total], program_, counts, physics_, overrides));
        for (std::size_t i = 0; i < p.size(); ++i) mean[i] += p[i];
      }
      std::vector<double> cumulative(mean.size());
      double acc = 0.0;
      for (std::size_t i = 0; i < mean.size(); ++i) cumulative[i] = acc += mean[i] / static_cast<double>(grid);
      cache_[key * masks + mask] = {bases[total], std::move(cumulative)};
    }
  }
}

TrialOutcome TrialRunner::run(Rng& rng) const {
  std::array<int, 2> counts{};
  std::size_t key = 0;
  for (std::size_t i = 0; i < prepare_targets_.size(); ++i) {
    counts[i] = prepare_excitation(prepare_targets_[i], noise_, rng);
    key = key * 3 + static_cast<std::size_t>(counts[i]);
  }

  std::size_t index = 0;
  std::vector<std::optional<double>> overrides;
  if (tabulated_dephasing_) {
    std::size_t mask = 0;
    for (std::size_t i = 0; i < raman_keep_.size(); ++i)
      if (rng.uniform() >= raman_keep_[i]) mask |= std::size_t{1} << i;
    key = (key << raman_keep_.size()) | mask;
  } else {
    for (std::size_t i = 0; i < raman_keep_.size(); ++i) {
      if (rng.uniform() < raman_keep_[i]) continue;
      overrides.resize(raman_keep_.size());
      overrides[i] = kTwoPi * rng.uniform();
    }
  }

  const Cached& cached = cache_[key];
  if (overrides.empty()) {
    index = sample_index(cached.cumulative, rng);
  } else {
    const FockState state = evolve_on(
        cached.basis, program_, std::span<const int>(counts.data(), prepare_targets_.size()),
        physics_, overrides);
    index = sample_index(cumulative_probabilities(state), rng);
  }

  std::array<int, kMaxModes> occ{};
  const auto sampled = cached.basis->occupation(index);
  std::copy(sampled.begin(), sampled.end(), occ.begin());
  const std::span<int> view(occ.data(), modes_.size());
  apply_memory_decay(view, storage_time_, noise_, rng);
  return sample_detection(view, modes_, read_, detection_, rng);
}

TrialOutcome execute(const PulseProgram& program, const NoiseParams& noise,
                     const DetectionParams& detection, const Physics& physics, Rng& rng) {
  return TrialRunner(program, noise, detection, physics).run(rng);
}

}  // namespace homsim
