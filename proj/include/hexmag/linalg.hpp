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

// Small dense complex linear algebra for 2x2 and 4x4 operators.
//
// Basis order for two-qubit operators is |00>, |01>, |10>, |11> with qubit 1
// the left Kronecker factor.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace hexmag {

using cplx = std::complex<double>;

/// Dense complex matrix with at most 4 rows/columns (stack storage).
using ComplexMatrix =
    Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, 4, 4>;
using RealVector = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, 4, 1>;

inline constexpr double kHermitianTol = 1e-12;
inline constexpr double kHermitianInputTol = 1e-10;
inline constexpr double kUnitaryTol = 1e-12;
inline constexpr double kReconstructionTol = 1e-10;

inline double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument("max_abs_diff: shape mismatch");
  }
  return (a - b).cwiseAbs().maxCoeff();
}

/// max_ij |A - A^dagger|_ij
inline double max_asymmetry(const ComplexMatrix& a) {
  if (a.rows() != a.cols()) return std::numeric_limits<double>::infinity();
  return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

inline bool is_hermitian(const ComplexMatrix& a, double tol = kHermitianTol) {
  return a.rows() == a.cols() && max_asymmetry(a) <= tol;
}

/// max_ij |U^dagger U - I|_ij
inline double unitarity_error(const ComplexMatrix& u) {
  const ComplexMatrix id = ComplexMatrix::Identity(u.rows(), u.cols());
  return (u.adjoint() * u - id).cwiseAbs().maxCoeff();
}

inline ComplexMatrix identity(Eigen::Index dim) {
  return ComplexMatrix::Identity(dim, dim);
}

/// Kronecker product of two 2x2 operators, blocks ordered a00*b, a01*b, ...
inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.rows() != 2 || a.cols() != 2 || b.rows() != 2 || b.cols() != 2) {
    std::ostringstream msg;
    msg << "kron: expected 2x2 operands, got " << a.rows() << "x" << a.cols()
        << " and " << b.rows() << "x" << b.cols();
    throw std::invalid_argument(msg.str());
  }
  ComplexMatrix out(4, 4);
  for (Eigen::Index i = 0; i < 2; ++i) {
    for (Eigen::Index j = 0; j < 2; ++j) {
      out.block(2 * i, 2 * j, 2, 2) = a(i, j) * b;
    }
  }
  return out;
}

/// Spectrum and orthonormal eigenbasis (columns) of a Hermitian matrix.
struct EigenSystem {
  RealVector eigenvalues;      // ascending
  ComplexMatrix eigenvectors;  // column k pairs with eigenvalues[k]
};

/// Hermitian eigendecomposition, eigenvalues ascending. Each eigenvector's
/// global phase is fixed so that its first nonzero component is real and
/// positive; inside a degenerate block any orthonormal basis may come back.
inline EigenSystem eig_hermitian(const ComplexMatrix& a) {
  if (a.rows() != a.cols() || (a.rows() != 2 && a.rows() != 4)) {
    throw std::invalid_argument("eig_hermitian: expected a 2x2 or 4x4 matrix");
  }
  const double asym = max_asymmetry(a);
  if (!(asym <= kHermitianInputTol)) {
    std::ostringstream msg;
    msg << "eig_hermitian: matrix is not Hermitian (max |A - A^dagger| = " << asym << ")";
    throw std::invalid_argument(msg.str());
  }
  // Solve on the exactly symmetrized matrix so the result does not depend on
  // which triangle the solver reads.
  const ComplexMatrix herm = 0.5 * (a + a.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(herm);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("eig_hermitian: eigensolver did not converge");
  }
  EigenSystem es{solver.eigenvalues(), solver.eigenvectors()};
  for (Eigen::Index k = 0; k < es.eigenvectors.cols(); ++k) {
    auto col = es.eigenvectors.col(k);
    for (Eigen::Index i = 0; i < col.size(); ++i) {
      if (std::abs(col(i)) > 1e-12) {
        col *= std::conj(col(i)) / std::abs(col(i));
        col(i) = cplx(col(i).real(), 0.0);
        break;
      }
    }
  }
  return es;
}

/// V diag(lambda) V^dagger
inline ComplexMatrix reconstruct(const EigenSystem& es) {
  return es.eigenvectors * es.eigenvalues.cast<cplx>().asDiagonal() *
         es.eigenvectors.adjoint();
}

/// U(t) = V diag(exp(-i lambda_k t)) V^dagger. Valid for any finite t.
inline ComplexMatrix propagator_from_eigs(const EigenSystem& es, double t) {
  if (!std::isfinite(t)) throw std::invalid_argument("propagator_from_eigs: t must be finite");
  const Eigen::Index n = es.eigenvalues.size();
  ComplexMatrix phases = ComplexMatrix::Zero(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    phases(k, k) = std::polar(1.0, -es.eigenvalues(k) * t);
  }
  return es.eigenvectors * phases * es.eigenvectors.adjoint();
}

}  // namespace hexmag
