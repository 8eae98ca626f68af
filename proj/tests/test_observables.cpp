// Copyright 2026 The hexmag Authors
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

#include <gtest/gtest.h>

#include <numbers>

#include "hexmag/observables.hpp"
#include "test_support.hpp"

namespace hexmag {
namespace {

using testutil::uniform;

SystemParams random_params() { return {uniform(-2, 2), uniform(0, 1.5), uniform(-3, 3)}; }

TEST(L1Coherence, DiagonalStateHasNone) {
  ComplexMatrix d = ComplexMatrix::Zero(4, 4);
  d(0, 0) = 0.1;
  d(1, 1) = 0.2;
  d(2, 2) = 0.3;
  d(3, 3) = 0.4;
  EXPECT_EQ(l1_coherence(DensityMatrix(d), false), 0.0);
  EXPECT_EQ(l1_coherence(DensityMatrix(d), true), 0.0);
}

TEST(L1Coherence, MaximallyCoherentInitialState) {
  const DensityMatrix rho0 = density_from_pure(initial_state_plus_minus());
  EXPECT_EQ(l1_coherence(rho0, false), 3.0);
  EXPECT_EQ(l1_coherence(rho0, true), 1.0);
}

TEST(L1Coherence, AveragedStateFollowsClosedForm) {
  for (int trial = 0; trial < 200; ++trial) {
    const SystemParams p = random_params();
    const double t = uniform(0, 5);
    const double expected = (1.0 + 2.0 * std::exp(-8.0 * p.epsilon * p.epsilon * t * t)) / 3.0;
    EXPECT_NEAR(l1_coherence(analytic_averaged_density(p, t), true), expected, 1e-12);
    EXPECT_NEAR(l1_coherence(analytic_averaged_density(p, t), true), analytic_l1_coherence(p, t), 1e-12);
  }
}

TEST(ReturnProbability, SelfOverlapIsOne) {
  for (int trial = 0; trial < 20; ++trial) {
    const PureState psi = testutil::random_state();
    EXPECT_NEAR(return_probability(density_from_pure(psi), psi), 1.0, 1e-12);
  }
}

TEST(ReturnProbability, NoiselessQuarterPeriodIsZero) {
  const PureState psi0 = initial_state_plus_minus();
  const double t = std::numbers::pi / 4.0;
  const DensityMatrix rho = evolve_density(density_from_pure(psi0), build_h_ex(1.0), t);
  EXPECT_NEAR(return_probability(rho, psi0), 0.0, 1e-12);
}

TEST(ReturnProbability, AveragedSpotValue) {
  const DensityMatrix rho = analytic_averaged_density({1.0, 0.5, 0.0}, 1.0);
  const double pr = return_probability(rho, initial_state_plus_minus());
  EXPECT_NEAR(pr, 0.5 * (1.0 + std::cos(4.0) * std::exp(-2.0)), 1e-12);
  EXPECT_NEAR(pr, 0.4558, 5e-5);
}

TEST(ReturnProbability, ImaginaryResidueIsAnError) {
  // Hermitian to within the 1e-12 tolerance but with an anti-Hermitian part
  // whose quadratic form on |++> exceeds 1e-12.
  const PureState psi = initial_state_plus_plus();
  ComplexMatrix rho = density_from_pure(psi).matrix();
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      if (i != j) rho(i, j) += cplx(0.0, 0.45e-12);
  const DensityMatrix skewed(rho);
  EXPECT_THROW(return_probability(skewed, psi), ConsistencyError);
}

TEST(AnalyticReturnProbability, Examples) {
  EXPECT_EQ(analytic_return_probability({1.0, 0.5, 0.9}, 0.0), 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const double j0 = uniform(-2, 2), eps = uniform(0, 1), t = uniform(0, 10);
    EXPECT_NEAR(analytic_return_probability({j0, eps, 0.0}, t),
                0.5 * (1.0 + std::cos(4.0 * j0 * t) * std::exp(-8.0 * eps * eps * t * t)), 1e-15);
  }
  const SystemParams p{1.0, 0.5, 0.7};
  const double t = 50.0;  // exp(-8 eps^2 t^2) underflows
  EXPECT_NEAR(analytic_return_probability(p, t), 0.375 + 0.125 * std::cos(4.0 * p.m * t), 1e-15);
}

TEST(AnalyticReturnProbability, AgreesWithDensityRoute) {
  const PureState psi0 = initial_state_plus_minus();
  for (int trial = 0; trial < 200; ++trial) {
    const SystemParams p = random_params();
    const double t = uniform(0, 5);
    EXPECT_NEAR(return_probability(analytic_averaged_density(p, t), psi0), analytic_return_probability(p, t), 1e-12);
  }
}

TEST(AnalyticL1Coherence, Examples) {
  EXPECT_EQ(analytic_l1_coherence({1.0, 0.7, 0.3}, 0.0), 1.0);
  EXPECT_EQ(analytic_l1_coherence({1.0, 0.0, 0.3}, 17.0), 1.0);
  for (double m : {1.0, 3.0, -2.5}) {
    EXPECT_EQ(analytic_l1_coherence({1.0, 0.5, m}, 0.8), analytic_l1_coherence({1.0, 0.5, 0.0}, 0.8));
  }
}

TEST(AnalyticL1Coherence, MonotoneInTimeAndNoise) {
  double prev = 2.0;
  for (int i = 0; i <= 200; ++i) {
    const double c = analytic_l1_coherence({1.0, 0.5, 0.0}, 0.02 * i);
    EXPECT_LE(c, prev);
    prev = c;
  }
  prev = 2.0;
  for (int i = 0; i <= 200; ++i) {
    const double c = analytic_l1_coherence({1.0, 0.01 * i, 0.0}, 1.0);
    EXPECT_LE(c, prev);
    prev = c;
  }
}

TEST(Coherence, FieldInvarianceOnMonteCarloPath) {
  const NoiseEnsemble ens{200000, 31};
  const PureState psi0 = initial_state_plus_minus();
  for (double t : {0.3, 1.0}) {
    const double c0 = l1_coherence(mc_averaged_density({1.0, 0.5, 0.0}, t, ens, psi0), true);
    const double c1 = l1_coherence(mc_averaged_density({1.0, 0.5, 1.5}, t, ens, psi0), true);
    EXPECT_LE(std::abs(c1 - c0), 1e-2);
  }
}

TEST(ObservableSeriesType, Validation) {
  ObservableSeries s{{0.0, 1.0}, {0.5}, ObservableKind::return_prob, SeriesSource::mc};
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s.values = {0.5, 1.2};
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s.kind = ObservableKind::coherence_raw;
  EXPECT_NO_THROW(s.validate());
  s.times = {1.0, 1.0};
  EXPECT_THROW(s.validate(), std::invalid_argument);
}

}  // namespace
}  // namespace hexmag
