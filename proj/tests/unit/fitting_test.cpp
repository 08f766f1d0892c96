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
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "homsim/fitting.hpp"
#include "homsim/rng.hpp"

namespace homsim {
namespace {

using std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

Series sample(const DampedCosineParams& p, int n, double span) {
  Series s;
  for (int i = 0; i < n; ++i) {
    const double t = span * i / (n - 1);
    s.t.push_back(t);
    s.y.push_back(p(t));
  }
  return s;
}

// Poisson counts drawn through std::poisson_distribution seeded from our generator.
Series poisson(const DampedCosineParams& p, int n, double span, std::uint64_t seed) {
  Series s = sample(p, n, span);
  Rng rng(seed);
  for (auto& y : s.y) y = static_cast<double>(std::poisson_distribution<int>(y)(rng));
  return s;
}

double wrap(double a) { return std::remainder(a, 2 * pi); }

TEST(InitialGuess, PureCosineFrequency) {
  const auto s = sample({10, 5, 1e6, 0.3, 0}, 81, 4e-6);
  const auto g = initial_guess(s);
  EXPECT_NEAR(g.frequency, 1e6, 1e5);
  EXPECT_NEAR(g.offset, 10, 0.5);
}

TEST(InitialGuess, ConstantSeriesIsAnError) {
  Series s = sample({3, 0, 1e6, 0, 0}, 20, 1e-6);
  EXPECT_THROW(initial_guess(s), FitError);
}

TEST(InitialGuess, TwoTonePicksLarger) {
  Series s = sample({0, 1, 1e6, 0, 0}, 200, 10e-6);
  for (std::size_t i = 0; i < s.t.size(); ++i) s.y[i] += 3 * std::cos(2 * pi * 3.1e6 * s.t[i] + 1.0);
  EXPECT_NEAR(initial_guess(s).frequency, 3.1e6, 0.1e6);
}

TEST(Series, Validation) {
  Series s = sample({1, 1, 1e6, 0, 0}, 7, 1e-6);
  EXPECT_THROW(fit_damped_cosine(s), FitError);
  s = sample({1, 1, 1e6, 0, 0}, 10, 1e-6);
  s.t[4] = s.t[3];
  EXPECT_THROW(fit_damped_cosine(s), FitError);
  s = sample({1, 1, 1e6, 0, 0}, 10, 1e-6);
  s.y[2] = std::nan("");
  EXPECT_THROW(fit_damped_cosine(s), FitError);
}

TEST(Fit, NoiselessDampedCosineRecoversParameters) {
  const DampedCosineParams truth{100, 80, 1.626e6, 0.0, 1 / 5e-6};
  const auto fit = fit_damped_cosine(sample(truth, 64, 1.2e-6));
  ASSERT_TRUE(fit.converged);
  EXPECT_NEAR(fit.offset(), 100, 0.1);
  EXPECT_NEAR(fit.amplitude(), 80, 0.08);
  EXPECT_NEAR(fit.frequency(), 1.626e6, 1.626e3);
  EXPECT_NEAR(wrap(fit.phase()), 0.0, 1e-3);
  EXPECT_NEAR(fit.tau, 5e-6, 5e-9);
}

TEST(Fit, NegativeAmplitudeFoldsIntoPhase) {
  const auto fit = fit_damped_cosine(sample({50, -20, 2e6, 0.4, 0}, 40, 2e-6), {.pin_tau = kInf});
  ASSERT_TRUE(fit.converged);
  EXPECT_GT(fit.amplitude(), 0);
  EXPECT_NEAR(std::abs(wrap(fit.phase() - 0.4 - pi)), 0.0, 1e-6);
  EXPECT_TRUE(fit.tau_pinned);
  EXPECT_EQ(fit.params.decay_rate, 0.0);
}

TEST(Fit, JacobianMatchesCentralDifferences) {
  Rng rng(1);
  std::vector<double> t;
  for (int i = 0; i < 30; ++i) t.push_back(i * 4e-8);
  for (int rep = 0; rep < 20; ++rep) {
    const DampedCosineParams p{50 + 50 * rng.uniform(), 10 + 40 * rng.uniform(), 0.5e6 + 3e6 * rng.uniform(),
                               2 * pi * rng.uniform(), 1e5 + 1e6 * rng.uniform()};
    const Eigen::MatrixXd j = damped_cosine_jacobian(t, p);
    for (int k = 0; k < 5; ++k) {
      DampedCosineParams hi = p, lo = p;
      double* fh[] = {&hi.offset, &hi.amplitude, &hi.frequency, &hi.phase, &hi.decay_rate};
      double* fl[] = {&lo.offset, &lo.amplitude, &lo.frequency, &lo.phase, &lo.decay_rate};
      const double h = 1e-6 * std::max(1.0, std::abs(*fh[k]));
      *fh[k] += h;
      *fl[k] -= h;
      for (std::size_t i = 0; i < t.size(); ++i) {
        const double fd = (hi(t[i]) - lo(t[i])) / (2 * h);
        const double an = j(static_cast<Eigen::Index>(i), k);
        EXPECT_LE(std::abs(fd - an), 1e-6 * std::max(1.0, std::abs(an))) << "param " << k;
      }
    }
  }
}

TEST(Fit, RefitFromOptimumIsIdempotent) {
  const auto s = poisson({100, 60, 1.4e6, 0.7, 2e5}, 60, 2e-6, 5);
  const auto first = fit_damped_cosine(s);
  ASSERT_TRUE(first.converged);
  const auto second = fit_damped_cosine(s, {}, first.params);
  ASSERT_TRUE(second.converged);
  EXPECT_NEAR(second.frequency(), first.frequency(), 1e-8 * first.frequency());
  EXPECT_NEAR(second.offset(), first.offset(), 1e-8 * first.offset());
  EXPECT_NEAR(second.amplitude(), first.amplitude(), 1e-8 * first.amplitude());
  EXPECT_NEAR(wrap(second.phase() - first.phase()), 0.0, 1e-8);
}

TEST(Fit, ScaleEquivarianceUniformWeights) {
  const auto s = poisson({80, 50, 2.2e6, -0.4, 3e5}, 50, 1.5e-6, 9);
  FitOptions opts;
  opts.weighting = Weighting::Uniform;
  const auto base = fit_damped_cosine(s, opts);
  Series scaled = s;
  for (auto& y : scaled.y) y *= 3.5;
  const auto fit = fit_damped_cosine(scaled, opts);
  ASSERT_TRUE(base.converged && fit.converged);
  EXPECT_NEAR(fit.offset(), 3.5 * base.offset(), 1e-9 * fit.offset());
  EXPECT_NEAR(fit.amplitude(), 3.5 * base.amplitude(), 1e-9 * fit.amplitude());
  EXPECT_NEAR(fit.frequency(), base.frequency(), 1e-9 * base.frequency());
  EXPECT_NEAR(wrap(fit.phase() - base.phase()), 0.0, 1e-9);
  EXPECT_NEAR(fit.tau, base.tau, 1e-9 * base.tau);
}

TEST(Fit, TimeShiftMovesOnlyPhase) {
  const auto s = poisson({120, 90, 1.401e6, 0.9, 0}, 61, 1.5e-6, 13);
  const auto base = fit_damped_cosine(s, {.pin_tau = kInf});
  const double delta = 8e-7;
  Series shifted = s;
  for (auto& t : shifted.t) t += delta;
  const auto fit = fit_damped_cosine(shifted, {.pin_tau = kInf});
  ASSERT_TRUE(base.converged && fit.converged);
  EXPECT_NEAR(fit.frequency(), base.frequency(), 1e-6 * base.frequency());
  EXPECT_NEAR(fit.offset(), base.offset(), 1e-6 * base.offset());
  EXPECT_NEAR(fit.amplitude(), base.amplitude(), 1e-6 * base.amplitude());
  EXPECT_NEAR(wrap(fit.phase() - (base.phase() - 2 * pi * base.frequency() * delta)), 0.0, 1e-6);
}

TEST(Fit, IterationBudgetReportsNonConvergence) {
  const auto s = poisson({100, 80, 1.626e6, 0, 2e5}, 64, 1.2e-6, 3);
  FitOptions opts;
  opts.max_iter = 1;
  const auto fit = fit_damped_cosine(s, opts);
  EXPECT_FALSE(fit.converged);
  EXPECT_GT(fit.frequency(), 0);
}

// Poisson counts at peak ~200 over 64 samples in 1.2 us: the frequency spread must
// sit at the Cramer-Rao bound and the 0.5% hit rate must match what that bound implies.
TEST(Fit, PoissonRobustnessAtCramerRaoBound) {
  const DampedCosineParams truth{100, 80, 1.626e6, 0.0, 1 / 5e-6};
  const int n = 64;
  const double span = 1.2e-6;
  std::vector<double> t;
  for (int i = 0; i < n; ++i) t.push_back(span * i / (n - 1));
  const Eigen::MatrixXd j = damped_cosine_jacobian(t, truth);
  Eigen::MatrixXd fisher = Eigen::MatrixXd::Zero(5, 5);
  for (int i = 0; i < n; ++i) fisher += j.row(i).transpose() * j.row(i) / truth(t[static_cast<std::size_t>(i)]);
  const double sigma_f = std::sqrt(fisher.inverse()(2, 2));

  const int reps = 100;
  int within = 0, converged = 0;
  double sq = 0;
  for (int r = 0; r < reps; ++r) {
    const auto fit = fit_damped_cosine(poisson(truth, n, span, 1000 + r));
    converged += fit.converged;
    const double err = fit.frequency() - truth.frequency;
    sq += err * err;
    within += std::abs(err) <= 0.005 * truth.frequency;
  }
  EXPECT_EQ(converged, reps);
  EXPECT_LT(std::sqrt(sq / reps), 1.3 * sigma_f);
  const double expected = std::erf(0.005 * truth.frequency / (sigma_f * std::sqrt(2.0)));
  EXPECT_GE(within, reps * expected - 3 * std::sqrt(reps * expected * (1 - expected)));
}

TEST(Fit, CovarianceTracksScatter) {
  const auto fit = fit_damped_cosine(poisson({100, 80, 1.626e6, 0.0, 2e5}, 64, 1.2e-6, 77));
  ASSERT_TRUE(fit.converged);
  for (double v : fit.variance) EXPECT_GT(v, 0);
  EXPECT_LT(std::sqrt(fit.variance[2]), 0.02 * fit.frequency());
}

TEST(Visibility, FromFit) {
  DampedCosineFit fit;
  fit.converged = true;
  fit.params = {2.0, 2.0, 1e6, 0, 0};
  fit.tau = kInf;
  fit.tau_pinned = true;
  EXPECT_EQ(visibility_from_fit(fit, 1e-6), 1.0);
  fit.params.amplitude = 0;
  EXPECT_EQ(visibility_from_fit(fit, 0), 0.0);
  fit.params = {2.0, 1.0, 1e6, 0, 1e6};
  fit.tau = 1e-6;
  EXPECT_NEAR(visibility_from_fit(fit, 1e-6), 0.5 * std::exp(-1.0), 1e-15);
  fit.params.offset = 0;
  EXPECT_THROW(visibility_from_fit(fit, 0), FitError);
}

}  // namespace
}  // namespace homsim
