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

#include "homsim/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <numeric>

#include <fmt/format.h>

namespace homsim {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr int kNumParams = 5;
constexpr int kZeroPad = 8;

double wrap_phase(double phi) {
  phi = std::remainder(phi, kTwoPi);
  return phi <= -std::numbers::pi ? phi + kTwoPi : phi;
}

double nyquist(const Series& s) {
  std::vector<double> dt(s.t.size() - 1);
  for (std::size_t i = 0; i + 1 < s.t.size(); ++i) dt[i] = s.t[i + 1] - s.t[i];
  std::nth_element(dt.begin(), dt.begin() + dt.size() / 2, dt.end());
  return 0.5 / dt[dt.size() / 2];
}

// Internally time is measured in units of `scale` so all parameters are O(1);
// frequency and decay rate are carried as f*scale and gamma*scale.
struct Problem {
  std::vector<double> u;
  std::vector<double> y;
  std::vector<double> sqrt_w;
  std::array<bool, kNumParams> free{true, true, true, true, true};
  double max_freq = 0.0;  // scaled Nyquist

  double model(const Eigen::VectorXd& p, double u_i) const {
    return p[0] + p[1] * std::exp(-p[4] * u_i) * std::cos(kTwoPi * p[2] * u_i + p[3]);
  }

  double chi2(const Eigen::VectorXd& p) const {
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      const double r = sqrt_w[i] * (y[i] - model(p, u[i]));
      s += r * r;
    }
    return s;
  }

  void residuals(const Eigen::VectorXd& p, Eigen::VectorXd& r) const {
    for (std::size_t i = 0; i < u.size(); ++i) r[i] = sqrt_w[i] * (y[i] - model(p, u[i]));
  }

  // Weighted Jacobian of the model over the free parameters only.
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& p) const {
    const DampedCosineParams dp{p[0], p[1], p[2], p[3], p[4]};
    const Eigen::MatrixXd full = damped_cosine_jacobian(u, dp);
    int nfree = 0;
    for (bool f : free) nfree += f;
    Eigen::MatrixXd j(u.size(), nfree);
    for (int c = 0, k = 0; c < kNumParams; ++c) {
      if (!free[c]) continue;
      for (std::size_t i = 0; i < u.size(); ++i) j(i, k) = sqrt_w[i] * full(i, c);
      ++k;
    }
    return j;
  }
};

}  // namespace

double DampedCosineParams::operator()(double t) const {
  return offset + amplitude * std::exp(-decay_rate * t) * std::cos(kTwoPi * frequency * t + phase);
}

void Series::validate() const {
  if (t.size() != y.size()) throw FitError("series t and y differ in length");
  if (!weights.empty() && weights.size() != t.size())
    throw FitError("series weights differ in length");
  if (t.size() < 8) throw FitError(fmt::format("need at least 8 points, got {}", t.size()));
  for (std::size_t i = 0; i + 1 < t.size(); ++i)
    if (!(t[i + 1] > t[i])) throw FitError("series times must be strictly increasing");
  for (double v : y)
    if (!std::isfinite(v)) throw FitError("series contains a non-finite value");
}

Eigen::MatrixXd damped_cosine_jacobian(const std::vector<double>& t,
                                       const DampedCosineParams& p) {
  Eigen::MatrixXd j(t.size(), kNumParams);
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double env = std::exp(-p.decay_rate * t[i]);
    const double arg = kTwoPi * p.frequency * t[i] + p.phase;
    const double c = std::cos(arg), s = std::sin(arg);
    j(i, 0) = 1.0;
    j(i, 1) = env * c;
    j(i, 2) = -p.amplitude * env * s * kTwoPi * t[i];
    j(i, 3) = -p.amplitude * env * s;
    j(i, 4) = -t[i] * p.amplitude * env * c;
  }
  return j;
}

DampedCosineParams initial_guess(const Series& series) {
  series.validate();
  const auto& t = series.t;
  const auto& y = series.y;
  const std::size_t n = y.size();
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
  const double range = *hi - *lo;
  if (!(range > 1e-12 * std::max(1.0, std::abs(mean))))
    throw FitError("constant series has no dominant frequency");

  const double span = t.back() - t.front();
  const double df = 1.0 / (kZeroPad * span * static_cast<double>(n) / static_cast<double>(n - 1));
  const double f_max = nyquist(series);
  double best_mag = -1.0, best_f = 0.0, best_phase = 0.0;
  for (int k = 1; k * df < f_max; ++k) {
    const double f = k * df;
    std::complex<double> acc{};
    for (std::size_t i = 0; i < n; ++i) acc += (y[i] - mean) * std::polar(1.0, -kTwoPi * f * t[i]);
    if (std::abs(acc) > best_mag) {
      best_mag = std::abs(acc);
      best_f = f;
      best_phase = std::arg(acc);
    }
  }
  if (best_f <= 0.0) throw FitError("no usable frequency bin below Nyquist");
  return {mean, 0.5 * range, best_f, wrap_phase(best_phase), 1.0 / span};
}

DampedCosineFit fit_damped_cosine(const Series& series, const FitOptions& options) {
  return fit_damped_cosine(series, options, initial_guess(series));
}

DampedCosineFit fit_damped_cosine(const Series& series, const FitOptions& options,
                                  const DampedCosineParams& start) {
  series.validate();
  if (options.max_iter < 1) throw FitError("max_iter must be >= 1");
  if (options.pin_tau && !(*options.pin_tau > 0.0)) throw FitError("pinned tau must be > 0");

  const std::size_t n = series.t.size();
  const double scale = std::max(std::abs(series.t.front()), std::abs(series.t.back()));
  Problem pb;
  pb.u.resize(n);
  pb.y = series.y;
  pb.sqrt_w.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    pb.u[i] = series.t[i] / scale;
    double w = 1.0;
    if (!series.weights.empty())
      w = series.weights[i];
    else if (options.weighting == Weighting::Poisson)
      w = 1.0 / std::max(series.y[i], 1.0);
    pb.sqrt_w[i] = std::sqrt(w);
  }
  pb.max_freq = nyquist(series) * scale;

  Eigen::VectorXd p(kNumParams);
  p << start.offset, start.amplitude, start.frequency * scale, start.phase,
      start.decay_rate * scale;
  if (options.pin_tau) {
    pb.free[4] = false;
    p[4] = std::isinf(*options.pin_tau) ? 0.0 : scale / *options.pin_tau;
  }
  if (!(p[2] > 0.0 && p[2] < pb.max_freq))
    throw FitError("starting frequency outside (0, Nyquist)");

  auto expand = [&](const Eigen::VectorXd& delta) {
    Eigen::VectorXd out = p;
    for (int c = 0, k = 0; c < kNumParams; ++c)
      if (pb.free[c]) out[c] += delta[k++];
    return out;
  };

  double chi2 = pb.chi2(p);
  double lambda = 1e-3;
  bool converged = false;
  int iter = 0;
  Eigen::VectorXd r(n);
  for (; iter < options.max_iter && !converged; ++iter) {
    const Eigen::MatrixXd j = pb.jacobian(p);
    pb.residuals(p, r);
    const Eigen::MatrixXd h = j.transpose() * j;
    const Eigen::VectorXd g = j.transpose() * r;

    bool accepted = false;
    while (lambda < 1e16) {
      Eigen::MatrixXd a = h;
      for (int d = 0; d < a.rows(); ++d) a(d, d) += lambda * std::max(h(d, d), 1e-300);
      const Eigen::VectorXd delta = a.ldlt().solve(g);
      const Eigen::VectorXd trial = expand(delta);
      const bool in_bounds = trial[2] > 0.0 && trial[2] < pb.max_freq && trial.allFinite();
      const double trial_chi2 = in_bounds ? pb.chi2(trial) : std::numeric_limits<double>::infinity();
      if (trial_chi2 < chi2) {
        const double rel = (chi2 - trial_chi2) / std::max(chi2, std::numeric_limits<double>::min());
        double step = 0.0;
        for (int c = 0; c < kNumParams; ++c)
          step = std::max(step, std::abs(trial[c] - p[c]) / std::max(std::abs(p[c]), 1.0));
        p = trial;
        chi2 = trial_chi2;
        lambda = std::max(lambda * 0.1, 1e-12);
        accepted = true;
        // Small decrease alone can stall in a flat valley; the step must vanish too.
        if (rel < options.tol && step < 1e-9) converged = true;
        break;
      }
      lambda *= 10.0;
    }
    // No descent step at any damping: the gradient vanishes to working precision.
    if (!accepted) converged = true;
  }

  // Comparing chi2 values resolves parameters only to ~sqrt(epsilon); finish with a
  // few undamped Gauss-Newton steps driven by the gradient alone.
  for (int k = 0; converged && k < 4; ++k) {
    const Eigen::MatrixXd j = pb.jacobian(p);
    pb.residuals(p, r);
    const Eigen::VectorXd delta = (j.transpose() * j).ldlt().solve(j.transpose() * r);
    const Eigen::VectorXd trial = expand(delta);
    double step = 0.0;
    for (int c = 0; c < kNumParams; ++c)
      step = std::max(step, std::abs(trial[c] - p[c]) / std::max(std::abs(p[c]), 1.0));
    if (!(step < 1e-6) || !(trial[2] > 0.0 && trial[2] < pb.max_freq)) break;
    p = trial;
    if (step < 1e-15) break;
  }
  chi2 = pb.chi2(p);

  DampedCosineFit fit;
  fit.iterations = iter;
  fit.converged = converged;
  fit.residual_norm = std::sqrt(chi2);
  fit.tau_pinned = options.pin_tau.has_value();

  double amp = p[1], phase = p[3];
  if (amp < 0.0) {
    amp = -amp;
    phase += std::numbers::pi;
  }
  fit.params = {p[0], amp, p[2] / scale, wrap_phase(phase), p[4] / scale};
  fit.tau = fit.params.decay_rate > 0.0 ? 1.0 / fit.params.decay_rate
                                        : std::numeric_limits<double>::infinity();
  if (options.pin_tau) fit.tau = *options.pin_tau;

  // Covariance in internal units, mapped back to physical ones.
  const Eigen::MatrixXd j = pb.jacobian(p);
  const Eigen::MatrixXd h = j.transpose() * j;
  const int nfree = static_cast<int>(h.rows());
  const double dof = static_cast<double>(n) - nfree;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(h);
  if (dof > 0 && lu.isInvertible()) {
    const Eigen::MatrixXd cov = lu.inverse() * (chi2 / dof);
    std::array<double, kNumParams> var{};
    for (int c = 0, k = 0; c < kNumParams; ++c) {
      if (pb.free[c]) var[c] = cov(k, k);
      k += pb.free[c];
    }
    fit.variance[0] = var[0];
    fit.variance[1] = var[1];
    fit.variance[2] = var[2] / (scale * scale);
    fit.variance[3] = var[3];
    const double gamma = fit.params.decay_rate;
    const double var_gamma = var[4] / (scale * scale);
    fit.variance[4] = (pb.free[4] && gamma > 0.0) ? var_gamma / std::pow(gamma, 4) : 0.0;
  }
  return fit;
}

double visibility_from_fit(const DampedCosineFit& fit, double at_t) {
  if (!(fit.params.offset > 0.0)) throw FitError("fitted offset must be positive");
  return fit.params.amplitude * std::exp(-fit.params.decay_rate * at_t) / fit.params.offset;
}

}  // namespace homsim
