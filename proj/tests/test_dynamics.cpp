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

#include "hexmag/dynamics.hpp"
#include "hexmag/observables.hpp"
#include "test_support.hpp"

namespace hexmag {
namespace {

using namespace std::complex_literals;
using testutil::uniform;

TEST(DensityFromPure, BasisState) {
  const DensityMatrix rho = density_from_pure(PureState::basis(0));
  ComplexMatrix expected = ComplexMatrix::Zero(4, 4);
  expected(0, 0) = 1.0;
  EXPECT_EQ(max_abs_diff(rho.matrix(), expected), 0.0);
}

TEST(DensityFromPure, PlusMinusHasQuarterEntries) {
  const DensityMatrix rho = density_from_pure(initial_state_plus_minus());
  const double sign[] = {1, -1, 1, -1};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) EXPECT_EQ(rho(i, j), cplx(0.25 * sign[i] * sign[j]));
  EXPECT_EQ(rho.trace(), 1.0);
  EXPECT_NEAR(rho.purity(), 1.0, 1e-12);
}

TEST(DensityFromPure, RandomStatesArePure) {
  for (int trial = 0; trial < 50; ++trial) {
    const DensityMatrix rho = density_from_pure(testutil::random_state());
    EXPECT_NEAR(rho.trace(), 1.0, 1e-12);
    EXPECT_NEAR(rho.purity(), 1.0, 1e-12);
  }
}

TEST(DensityMatrixType, RejectsInvalidMatrices) {
  ComplexMatrix rho = density_from_pure(initial_state_plus_minus()).matrix();
  ComplexMatrix bad = rho;
  bad(0, 1) += 1e-9;
  EXPECT_THROW(DensityMatrix{bad}, std::invalid_argument);
  bad = rho;
  bad(0, 0) += 1e-9;
  EXPECT_THROW(DensityMatrix{bad}, std::invalid_argument);
  // diag(1.5, -0.5, 0, 0): unit trace, Hermitian, not PSD
  bad = ComplexMatrix::Zero(4, 4);
  bad(0, 0) = 1.5;
  bad(1, 1) = -0.5;
  EXPECT_THROW(DensityMatrix{bad}, std::invalid_argument);
  EXPECT_THROW(DensityMatrix{ComplexMatrix::Identity(2, 2)}, std::invalid_argument);
}

TEST(EvolveDensity, ZeroTimeIsIdentityMap) {
  const DensityMatrix rho0 = testutil::random_density();
  const DensityMatrix rho = evolve_density(rho0, testutil::random_hermitian(4), 0.0);
  EXPECT_LE(max_abs_diff(rho.matrix(), rho0.matrix()), 1e-12);
}

TEST(EvolveDensity, ReproducesExchangeOnlyState) {
  const DensityMatrix rho0 = density_from_pure(initial_state_plus_minus());
  for (double j : {1.0, 0.4, -1.7}) {
    for (double t : {0.0, 0.3, 1.0, 5.5}) {
      const DensityMatrix rho = evolve_density(rho0, build_h_ex(j), t);
      EXPECT_LE(max_abs_diff(rho.matrix(), testutil::reference_rho_m(j, 0.0, t)), 1e-10)
          << "j=" << j << " t=" << t;
    }
  }
}

TEST(EvolveDensity, ReproducesFieldState) {
  const DensityMatrix rho0 = density_from_pure(initial_state_plus_minus());
  for (auto [j, m] : {std::pair{1.0, 1.0}, {1.0, 0.7}, {2.0, -0.3}}) {
    for (double t : {0.25, 1.0, 3.0}) {
      const DensityMatrix rho = evolve_density(rho0, build_total(j, m), t);
      EXPECT_LE(max_abs_diff(rho.matrix(), testutil::reference_rho_m(j, m, t)), 1e-10);
    }
  }
}

TEST(EvolveDensity, PreservesInvariantsOnRandomInputs) {
  for (int trial = 0; trial < 200; ++trial) {
    const DensityMatrix rho0 = testutil::random_density();
    const double p0 = rho0.purity();
    const DensityMatrix rho = evolve_density(rho0, testutil::random_hermitian(4), uniform(-10, 10));
    EXPECT_NEAR(rho.trace(), 1.0, kTraceTol);
    EXPECT_LE(max_asymmetry(rho.matrix()), kHermitianTol);
    EXPECT_NEAR(rho.purity(), p0, 1e-10);
  }
}

TEST(EvolveDensity, Composes) {
  for (int trial = 0; trial < 50; ++trial) {
    const DensityMatrix rho0 = testutil::random_density();
    const ComplexMatrix h = build_total(uniform(-2, 2), uniform(-2, 2));
    const double t1 = uniform(-3, 3), t2 = uniform(-3, 3);
    const DensityMatrix two_step = evolve_density(evolve_density(rho0, h, t1), h, t2);
    EXPECT_LE(max_abs_diff(two_step.matrix(), evolve_density(rho0, h, t1 + t2).matrix()), 1e-10);
  }
}

TEST(EvolveDensity, NegativeTimeReverses) {
  const DensityMatrix rho0 = testutil::random_density();
  const ComplexMatrix h = build_total(1.3, 0.4);
  const DensityMatrix back = evolve_density(evolve_density(rho0, h, 2.0), h, -2.0);
  EXPECT_LE(max_abs_diff(back.matrix(), rho0.matrix()), 1e-12);
}

TEST(AnalyticPropagator, ZeroTimeIsIdentity) {
  EXPECT_EQ(max_abs_diff(analytic_propagator(uniform(-3, 3), uniform(-3, 3), 0.0), identity(4)), 0.0);
}

TEST(AnalyticPropagator, ExchangeOnlyCase) {
  for (double t : {0.1, 1.0, 7.0}) {
    EXPECT_LE(max_abs_diff(analytic_propagator(1.0, 0.0, t), testutil::reference_propagator(1.0, 0.0, t)), 1e-14);
  }
}

TEST(AnalyticPropagator, AgreesWithEigendecompositionRoute) {
  const ComplexMatrix u_eig = propagator_from_eigs(eig_hermitian(build_total(1.0, 1.0)), 0.9);
  EXPECT_LE(max_abs_diff(analytic_propagator(1.0, 1.0, 0.9), u_eig), 1e-10);
  for (int trial = 0; trial < 100; ++trial) {
    const double j = uniform(-3, 3), m = uniform(-3, 3), t = uniform(-10, 10);
    const ComplexMatrix u = analytic_propagator(j, m, t);
    EXPECT_LE(max_abs_diff(u, propagator_from_eigs(eig_hermitian(build_total(j, m)), t)), 1e-10);
    EXPECT_LE(unitarity_error(u), kUnitaryTol);
  }
}

TEST(NoiselessReturnProbability, MatchesCosineLaw) {
  const PureState psi0 = initial_state_plus_minus();
  const DensityMatrix rho0 = density_from_pure(psi0);
  for (int trial = 0; trial < 50; ++trial) {
    const double t = uniform(0, 20);
    const DensityMatrix rho = evolve_density(rho0, build_h_ex(1.0), t);
    EXPECT_NEAR(return_probability(rho, psi0), 0.5 * (1.0 + std::cos(4.0 * t)), 1e-10);
  }
}

}  // namespace
}  // namespace hexmag
