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

#pragma once

// Noise-free evolution of two-qubit states and the closed-form propagator.

#include <cmath>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

#include "hexmag/linalg.hpp"
#include "hexmag/model.hpp"

namespace hexmag {

inline constexpr double kTraceTol = 1e-12;
inline constexpr double kPsdTol = 1e-10;
inline constexpr double kPurityTol = 1e-10;

/// 4x4 Hermitian, unit-trace, positive semidefinite two-qubit state.
/// Construction validates every invariant and throws std::invalid_argument.
class DensityMatrix {
 public:
  explicit DensityMatrix(const ComplexMatrix& entries) : entries_(entries) {
    if (auto err = check(entries_)) throw std::invalid_argument("DensityMatrix: " + *err);
  }

  /// Returns a description of the first violated invariant, if any.
  static std::optional<std::string> check(const ComplexMatrix& rho) {
    std::ostringstream msg;
    if (rho.rows() != 4 || rho.cols() != 4) return "expected a 4x4 matrix";
    if (!rho.allFinite()) return "non-finite entries";
    const double asym = max_asymmetry(rho);
    if (asym > kHermitianTol) {
      msg << "not Hermitian (max asymmetry " << asym << ")";
      return msg.str();
    }
    const cplx tr = rho.trace();
    if (std::abs(tr - 1.0) > kTraceTol) {
      msg << "trace " << tr << " differs from 1";
      return msg.str();
    }
    const ComplexMatrix herm = 0.5 * (rho + rho.adjoint());
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(herm, Eigen::EigenvaluesOnly);
    const double lo = solver.eigenvalues().minCoeff();
    if (lo < -kPsdTol) {
      msg << "not positive semidefinite (min eigenvalue " << lo << ")";
      return msg.str();
    }
    const double p = (rho * rho).trace().real();
    if (p < 0.25 - kPurityTol || p > 1.0 + kPurityTol) {
      msg << "purity " << p << " outside [1/4, 1]";
      return msg.str();
    }
    return std::nullopt;
  }

  const ComplexMatrix& matrix() const { return entries_; }
  cplx operator()(Eigen::Index i, Eigen::Index j) const { return entries_(i, j); }

  double trace() const { return entries_.trace().real(); }
  double purity() const { return (entries_ * entries_).trace().real(); }

 private:
  ComplexMatrix entries_;
};

/// |psi><psi|
inline DensityMatrix density_from_pure(const PureState& psi) {
  if (!(std::abs(psi.norm_squared() - 1.0) <= kNormTol)) {
    throw std::invalid_argument("density_from_pure: state is not normalized");
  }
  ComplexMatrix rho(4, 4);
  for (Eigen::Index i = 0; i < 4; ++i) {
    for (Eigen::Index j = 0; j < 4; ++j) {
      rho(i, j) = psi[i] * std::conj(psi[j]);
    }
  }
  return DensityMatrix(rho);
}

/// U rho U^dagger with U = exp(-i h t) taken from the eigendecomposition of h.
inline DensityMatrix evolve_density(const DensityMatrix& rho0, const ComplexMatrix& h, double t) {
  if (h.rows() != 4 || h.cols() != 4) throw std::invalid_argument("evolve_density: h must be 4x4");
  if (!std::isfinite(t)) throw std::invalid_argument("evolve_density: t must be finite");
  const ComplexMatrix u = propagator_from_eigs(eig_hermitian(h), t);
  return DensityMatrix(u * rho0.matrix() * u.adjoint());
}

/// exp(-i H(j, m) t) written out entry by entry:
///
///   | e^{-i(j+2m)t}  0  0  0             |
///   | 0              p  q  0             |    p = (e^{-ijt} + e^{3ijt}) / 2
///   | 0              q  p  0             |    q = (e^{-ijt} - e^{3ijt}) / 2
///   | 0              0  0  e^{-i(j-2m)t} |
///
/// Coded independently of the eigendecomposition route so the two can be
/// checked against each other.
inline ComplexMatrix analytic_propagator(double j, double m, double t) {
  if (!std::isfinite(j) || !std::isfinite(m) || !std::isfinite(t)) {
    throw std::invalid_argument("analytic_propagator: inputs must be finite");
  }
  const cplx triplet = std::polar(1.0, -j * t);
  const cplx singlet = std::polar(1.0, 3.0 * j * t);
  ComplexMatrix u = ComplexMatrix::Zero(4, 4);
  u(0, 0) = std::polar(1.0, -(j + 2.0 * m) * t);
  u(1, 1) = u(2, 2) = 0.5 * (triplet + singlet);
  u(1, 2) = u(2, 1) = 0.5 * (triplet - singlet);
  u(3, 3) = std::polar(1.0, -(j - 2.0 * m) * t);
  return u;
}

}  // namespace hexmag
