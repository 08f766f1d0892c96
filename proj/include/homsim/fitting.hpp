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
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace homsim {

class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Sampled signal. `weights` may be empty, in which case the fit options decide.
struct Series {
  std::vector<double> t;
  std::vector<double> y;
  std::vector<double> weights;

  /// Throws FitError unless t is strictly increasing, sizes agree and there are >= 8 points.
  void validate() const;
};

/// y(t) = offset + amplitude * exp(-decay_rate * t) * cos(2 pi frequency t + phase)
struct DampedCosineParams {
  double offset = 0.0;
  double amplitude = 0.0;
  double frequency = 0.0;   // Hz
  double phase = 0.0;       // rad
  double decay_rate = 0.0;  // 1/s; zero for an undamped cosine

  double operator()(double t) const;
};

enum class Weighting { Poisson, Uniform };

struct FitOptions {
  /// Fixes the decay time; +infinity pins a pure cosine.
  std::optional<double> pin_tau;
  int max_iter = 200;
  double tol = 1e-10;
  /// Poisson: w_i = 1 / max(y_i, 1). Ignored when the series carries explicit weights.
  Weighting weighting = Weighting::Poisson;
};

struct DampedCosineFit {
  DampedCosineParams params;
  double tau = 0.0;  // 1/decay_rate, +infinity when undamped
  bool tau_pinned = false;
  double residual_norm = 0.0;  // sqrt of the weighted sum of squares
  bool converged = false;
  int iterations = 0;
  /// Variances of (offset, amplitude, frequency, phase, tau); (J^T W J)^-1 scaled by
  /// the reduced chi-square, so only approximate.
  std::array<double, 5> variance{};

  double offset() const { return params.offset; }
  double amplitude() const { return params.amplitude; }
  double frequency() const { return params.frequency; }
  double phase() const { return params.phase; }
};

/**
 * Offset = mean, amplitude = half the range, frequency and phase from the
 * largest non-DC bin of a zero-padded direct Fourier transform, decay time =
 * series span. Throws FitError on a constant series.
 */
DampedCosineParams initial_guess(const Series& series);

DampedCosineFit fit_damped_cosine(const Series& series, const FitOptions& options = {});
DampedCosineFit fit_damped_cosine(const Series& series, const FitOptions& options,
                                  const DampedCosineParams& start);

/// Analytic model Jacobian, columns (offset, amplitude, frequency, phase, decay_rate).
Eigen::MatrixXd damped_cosine_jacobian(const std::vector<double>& t,
                                       const DampedCosineParams& p);

/// A exp(-t/tau) / B at time t. Throws FitError when B <= 0.
double visibility_from_fit(const DampedCosineFit& fit, double at_t);

}  // namespace homsim
