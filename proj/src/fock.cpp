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

#include "homsim/fock.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

#include <fmt/format.h>

#include "homsim/rng.hpp"

namespace homsim {

namespace {

constexpr std::size_t kMaxBasisSize = 10'000'000;

double factorial(int n) {
  static const auto table = [] {
    std::array<double, 171> t{};
    t[0] = 1.0;
    for (int i = 1; i < 171; ++i) t[i] = t[i - 1] * i;
    return t;
  }();
  return table.at(static_cast<std::size_t>(n));
}

double binomial(int n, int k) { return factorial(n) / (factorial(k) * factorial(n - k)); }

void enumerate_sector(int n, int m, std::vector<int>& cur, std::vector<int>& out) {
  const int M = static_cast<int>(cur.size());
  if (m == M - 1) {
    cur[m] = n;
    out.insert(out.end(), cur.begin(), cur.end());
    return;
  }
  for (int v = n; v >= 0; --v) {
    cur[m] = v;
    enumerate_sector(n - v, m + 1, cur, out);
  }
}

}  // namespace

const char* to_string(Spin s) noexcept { return s == Spin::S1 ? "S1" : "S2"; }

std::string to_string(const ModeLabel& m) {
  return fmt::format("({},{:+d})", to_string(m.spin), m.kidx);
}

std::vector<ModeLabel> grid_modes(int half_width) {
  if (half_width < 0) throw std::invalid_argument("grid half-width must be >= 0");
  std::vector<ModeLabel> modes;
  for (Spin s : {Spin::S1, Spin::S2})
    for (int k = -half_width; k <= half_width; ++k) modes.push_back({s, k});
  return modes;
}

FockBasis::FockBasis(std::vector<ModeLabel> modes, int nmax) : modes_(std::move(modes)), nmax_(nmax) {
  if (modes_.empty()) throw std::invalid_argument("basis needs at least one mode");
  if (nmax_ < 0) throw std::invalid_argument(fmt::format("nmax must be >= 0, got {}", nmax_));
  if (modes_.size() > static_cast<std::size_t>(kMaxModes))
    throw std::invalid_argument(fmt::format("at most {} modes supported", kMaxModes));
  std::set<ModeLabel> seen(modes_.begin(), modes_.end());
  if (seen.size() != modes_.size()) throw std::invalid_argument("duplicate mode label in basis");

  const int M = num_modes();
  binom_dim_ = nmax_ + M + 1;
  binom_.assign(static_cast<std::size_t>(binom_dim_) * binom_dim_, 0);
  for (int n = 0; n < binom_dim_; ++n) {
    binom_[n * binom_dim_] = 1;
    for (int k = 1; k <= n; ++k) {
      const auto a = binom_[(n - 1) * binom_dim_ + k - 1];
      const auto b = binom_[(n - 1) * binom_dim_ + k];
      binom_[n * binom_dim_ + k] = (a + b < a) ? UINT64_MAX : a + b;
    }
  }
  const std::uint64_t total = binom(nmax_ + M, M);
  if (total > kMaxBasisSize)
    throw std::invalid_argument(fmt::format("basis of {} modes at nmax {} is too large", M, nmax_));
  size_ = static_cast<std::size_t>(total);

  occupations_.reserve(size_ * M);
  std::vector<int> cur(M, 0);
  for (int n = 0; n <= nmax_; ++n) {
    const std::size_t before = occupations_.size() / M;
    enumerate_sector(n, 0, cur, occupations_);
    totals_.insert(totals_.end(), occupations_.size() / M - before, n);
  }
}

std::uint64_t FockBasis::binom(int n, int k) const {
  if (k < 0 || n < 0 || k > n) return 0;
  return binom_[n * binom_dim_ + k];
}

std::optional<std::size_t> FockBasis::find(std::span<const int> occ) const {
  const int M = num_modes();
  if (static_cast<int>(occ.size()) != M) return std::nullopt;
  int n = 0;
  for (int v : occ) {
    if (v < 0) return std::nullopt;
    n += v;
  }
  if (n > nmax_) return std::nullopt;
  // States with total < n come first.
  std::uint64_t rank = n == 0 ? 0 : binom(n - 1 + M, M);
  int remaining = n;
  for (int m = 0; m + 1 < M; ++m) {
    const int parts = M - m;
    const int x = occ[m];
    // Compositions of `remaining` into `parts` whose first part exceeds x.
    if (remaining - x - 1 >= 0) rank += binom(remaining - x - 1 + parts - 1, parts - 1);
    remaining -= x;
  }
  return static_cast<std::size_t>(rank);
}

std::size_t FockBasis::index_of(std::span<const int> occ) const {
  if (auto idx = find(occ)) return *idx;
  std::string s;
  for (int v : occ) s += std::to_string(v) + ' ';
  throw std::out_of_range("occupation not in basis: " + s);
}

std::optional<int> FockBasis::mode_index(const ModeLabel& m) const {
  auto it = std::find(modes_.begin(), modes_.end(), m);
  if (it == modes_.end()) return std::nullopt;
  return static_cast<int>(it - modes_.begin());
}

int FockBasis::require_mode(const ModeLabel& m) const {
  if (auto i = mode_index(m)) return *i;
  throw std::invalid_argument("unknown mode " + to_string(m));
}

BasisPtr build_basis(std::vector<ModeLabel> modes, int nmax) {
  return std::make_shared<const FockBasis>(std::move(modes), nmax);
}

FockState::FockState(BasisPtr basis, std::vector<Complex> amplitudes)
    : basis_(std::move(basis)), amplitudes_(std::move(amplitudes)) {
  if (!basis_) throw std::invalid_argument("null basis");
  if (amplitudes_.size() != basis_->size())
    throw std::invalid_argument("amplitude vector does not match basis size");
}

FockState FockState::vacuum(BasisPtr basis) {
  std::vector<Complex> amps(basis->size());
  amps[0] = 1.0;
  return {std::move(basis), std::move(amps)};
}

FockState FockState::number_state(BasisPtr basis, std::span<const int> occupation) {
  std::vector<Complex> amps(basis->size());
  amps[basis->index_of(occupation)] = 1.0;
  return {std::move(basis), std::move(amps)};
}

double FockState::norm() const {
  double s = 0.0;
  for (const auto& a : amplitudes_) s += std::norm(a);
  return std::sqrt(s);
}

FockState apply_beamsplitter(const FockState& state, const ModeLabel& a, const ModeLabel& b,
                             double angle) {
  const FockBasis& basis = state.basis();
  const int ia = basis.require_mode(a);
  const int ib = basis.require_mode(b);
  if (ia == ib) throw std::invalid_argument("beam splitter needs two distinct modes");

  const double c = std::cos(0.5 * angle);
  const Complex is(0.0, std::sin(0.5 * angle));
  const int nmax = basis.nmax();

  // Powers up to nmax of the two matrix entries.
  std::vector<Complex> cpow(nmax + 1), ispow(nmax + 1);
  cpow[0] = ispow[0] = 1.0;
  for (int p = 1; p <= nmax; ++p) {
    cpow[p] = cpow[p - 1] * c;
    ispow[p] = ispow[p - 1] * is;
  }

  const auto in = state.amplitudes();
  std::vector<Complex> out(in.size());
  std::vector<Complex> poly(nmax + 1);
  std::array<int, kMaxModes> buf{};
  const int M = basis.num_modes();

  for (std::size_t idx = 0; idx < in.size(); ++idx) {
    const Complex amp = in[idx];
    if (amp == Complex{}) continue;
    const auto occ = basis.occupation(idx);
    std::copy(occ.begin(), occ.end(), buf.begin());
    const int na = occ[ia], nb = occ[ib], n = na + nb;

    // (c a + is b)^na (is a + c b)^nb, coefficient of a^m b^(n-m) in poly[m].
    std::fill(poly.begin(), poly.begin() + n + 1, Complex{});
    for (int j = 0; j <= na; ++j) {
      const Complex ca = binomial(na, j) * cpow[j] * ispow[na - j];
      for (int k = 0; k <= nb; ++k)
        poly[j + k] += ca * binomial(nb, k) * ispow[k] * cpow[nb - k];
    }
    const double in_norm = std::sqrt(factorial(na) * factorial(nb));
    for (int m = 0; m <= n; ++m) {
      if (poly[m] == Complex{}) continue;
      buf[ia] = m;
      buf[ib] = n - m;
      const double out_norm = std::sqrt(factorial(m) * factorial(n - m));
      out[basis.index_of({buf.data(), static_cast<std::size_t>(M)})] +=
          amp * poly[m] * (out_norm / in_norm);
    }
  }
  return {state.basis_ptr(), std::move(out)};
}

FockState apply_raman_pairs(const FockState& state, int kshift, double angle) {
  const FockBasis& basis = state.basis();
  const auto amps = state.amplitudes();
  auto populated = [&](int mode) {
    for (std::size_t i = 0; i < amps.size(); ++i)
      if (basis.occupation(i)[mode] > 0 && std::norm(amps[i]) > 1e-24) return true;
    return false;
  };

  FockState out = state;
  std::set<int> paired_s2;
  for (int m = 0; m < basis.num_modes(); ++m) {
    const ModeLabel& label = basis.modes()[m];
    if (label.spin != Spin::S1) continue;
    const ModeLabel partner{Spin::S2, label.kidx + kshift};
    const auto p = basis.mode_index(partner);
    if (!p) {
      if (populated(m))
        throw std::out_of_range("Raman partner of " + to_string(label) + " is outside the grid");
      continue;
    }
    paired_s2.insert(*p);
    out = apply_beamsplitter(out, label, partner, angle);
  }
  for (int m = 0; m < basis.num_modes(); ++m) {
    const ModeLabel& label = basis.modes()[m];
    if (label.spin == Spin::S2 && !paired_s2.contains(m) && populated(m))
      throw std::out_of_range("Raman partner of " + to_string(label) + " is outside the grid");
  }
  return out;
}

FockState apply_raman_with_angle(const FockState& state, const RamanPulse& pulse) {
  if (!(pulse.rabi_frequency > 0.0)) throw std::invalid_argument("Rabi frequency must be > 0");
  if (pulse.duration < 0.0) throw std::invalid_argument("pulse duration must be >= 0");
  return apply_raman_pairs(state, pulse.kshift, pulse.angle());
}

FockState apply_phase(const FockState& state, const ModeLabel& mode, double phi) {
  const FockBasis& basis = state.basis();
  const int im = basis.require_mode(mode);
  std::vector<Complex> factors(basis.nmax() + 1);
  for (int n = 0; n <= basis.nmax(); ++n) factors[n] = std::polar(1.0, n * phi);
  const auto in = state.amplitudes();
  std::vector<Complex> out(in.begin(), in.end());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= factors[basis.occupation(i)[im]];
  return {state.basis_ptr(), std::move(out)};
}

FockState apply_creation(const FockState& state, const ModeLabel& mode, int count) {
  if (count < 0) throw std::invalid_argument("creation count must be >= 0");
  if (count == 0) return state;
  const FockBasis& basis = state.basis();
  const int im = basis.require_mode(mode);
  const int M = basis.num_modes();
  const auto in = state.amplitudes();
  std::vector<Complex> out(in.size());
  std::array<int, kMaxModes> buf{};
  double norm2 = 0.0;
  for (std::size_t i = 0; i < in.size(); ++i) {
    if (in[i] == Complex{}) continue;
    const auto occ = basis.occupation(i);
    std::copy(occ.begin(), occ.end(), buf.begin());
    const int n = occ[im];
    buf[im] = n + count;
    const auto j = basis.find({buf.data(), static_cast<std::size_t>(M)});
    if (!j) throw std::out_of_range("creation exceeds the basis cutoff");
    out[*j] = in[i] * std::sqrt(factorial(n + count) / factorial(n));
    norm2 += std::norm(out[*j]);
  }
  if (norm2 == 0.0) throw std::domain_error("creation on a zero state");
  const double inv = 1.0 / std::sqrt(norm2);
  for (auto& a : out) a *= inv;
  return {state.basis_ptr(), std::move(out)};
}

FockState apply_mode_unitary(const FockState& state, const Eigen::MatrixXcd& u) {
  const FockBasis& basis = state.basis();
  const int M = basis.num_modes();
  if (u.rows() != M || u.cols() != M)
    throw std::invalid_argument("mode unitary must be M x M for the basis modes");
  const auto in = state.amplitudes();
  std::vector<Complex> out(in.size());
  std::vector<Complex> poly(in.size()), next(in.size());
  std::array<int, kMaxModes> buf{};
  const std::span<const int> view(buf.data(), static_cast<std::size_t>(M));

  for (std::size_t idx = 0; idx < in.size(); ++idx) {
    const Complex amp = in[idx];
    if (amp == Complex{}) continue;
    const auto occ = basis.occupation(idx);
    std::fill(poly.begin(), poly.end(), Complex{});
    poly[0] = 1.0;  // vacuum monomial
    double in_fact = 1.0;
    for (int j = 0; j < M; ++j) {
      in_fact *= factorial(occ[j]);
      for (int rep = 0; rep < occ[j]; ++rep) {
        std::fill(next.begin(), next.end(), Complex{});
        for (std::size_t p = 0; p < poly.size(); ++p) {
          if (poly[p] == Complex{}) continue;
          const auto po = basis.occupation(p);
          std::copy(po.begin(), po.end(), buf.begin());
          for (int i = 0; i < M; ++i) {
            if (u(i, j) == Complex{}) continue;
            ++buf[i];
            next[basis.index_of(view)] += poly[p] * u(i, j);
            --buf[i];
          }
        }
        std::swap(poly, next);
      }
    }
    const double inv_in = 1.0 / std::sqrt(in_fact);
    for (std::size_t p = 0; p < poly.size(); ++p) {
      if (poly[p] == Complex{}) continue;
      double out_fact = 1.0;
      for (int v : basis.occupation(p)) out_fact *= factorial(v);
      out[p] += amp * poly[p] * std::sqrt(out_fact) * inv_in;
    }
  }
  return {state.basis_ptr(), std::move(out)};
}

Complex amplitude(const FockState& state, std::span<const int> occupation) {
  return state.amplitudes()[state.basis().index_of(occupation)];
}

std::vector<double> probabilities(const FockState& state) {
  std::vector<double> p;
  p.reserve(state.amplitudes().size());
  for (const auto& a : state.amplitudes()) p.push_back(std::norm(a));
  return p;
}

std::vector<double> cumulative_probabilities(const FockState& state) {
  auto p = probabilities(state);
  std::partial_sum(p.begin(), p.end(), p.begin());
  return p;
}

std::size_t sample_index(std::span<const double> cumulative, Rng& rng) {
  const double u = rng.uniform() * cumulative.back();
  auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  if (it == cumulative.end()) --it;
  return static_cast<std::size_t>(it - cumulative.begin());
}

std::size_t born_sample_index(const FockState& state, Rng& rng) {
  const auto cum = cumulative_probabilities(state);
  if (std::abs(std::sqrt(cum.back()) - 1.0) > 1e-6)
    throw std::domain_error(fmt::format("state norm {} is not 1", std::sqrt(cum.back())));
  return sample_index(cum, rng);
}

std::vector<int> born_sample(const FockState& state, Rng& rng) {
  const auto occ = state.basis().occupation(born_sample_index(state, rng));
  return {occ.begin(), occ.end()};
}

}  // namespace homsim
