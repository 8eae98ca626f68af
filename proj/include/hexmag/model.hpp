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

// Two-qubit Heisenberg exchange model with a Z-axis field. Units: hbar = 1,
// couplings and fields are angular frequencies.

#include <array>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "hexmag/linalg.hpp"

namespace hexmag {

inline constexpr double kNormTol = 1e-12;

enum class Axis { X, Y, Z };

/// Exchange mean, Gaussian noise width and field strength.
struct SystemParams {
  double j0 = 1.0;
  double epsilon = 0.0;
  double m = 0.0;

  void validate() const {
    if (!std::isfinite(j0) || !std::isfinite(epsilon) || !std::isfinite(m)) {
      throw std::invalid_argument("SystemParams: all fields must be finite");
    }
    if (epsilon < 0.0) {
      throw std::invalid_argument("SystemParams: epsilon must be >= 0");
    }
  }
};

/// Normalized two-qubit state vector in the computational basis.
class PureState {
 public:
  using Amplitudes = std::array<cplx, 4>;

  explicit PureState(const Amplitudes& amplitudes) : amplitudes_(amplitudes) {
    const double n = norm_squared();
    if (!(std::abs(n - 1.0) <= kNormTol)) {
      std::ostringstream msg;
      msg << "PureState: amplitudes are not normalized (sum |a|^2 = " << n << ")";
      throw std::invalid_argument(msg.str());
    }
  }

  static PureState basis(std::size_t index) {
    if (index >= 4) throw std::invalid_argument("PureState::basis: index out of range");
    Amplitudes a{};
    a[index] = 1.0;
    return PureState(a);
  }

  const Amplitudes& amplitudes() const { return amplitudes_; }
  const cplx& operator[](std::size_t i) const { return amplitudes_[i]; }

  double norm_squared() const {
    double n = 0.0;
    for (const auto& a : amplitudes_) n += std::norm(a);
    return n;
  }

  /// <this|other>
  cplx overlap(const PureState& other) const {
    cplx s = 0.0;
    for (std::size_t i = 0; i < 4; ++i) s += std::conj(amplitudes_[i]) * other[i];
    return s;
  }

 private:
  Amplitudes amplitudes_;
};

inline ComplexMatrix pauli(Axis axis) {
  using namespace std::complex_literals;
  ComplexMatrix s(2, 2);
  switch (axis) {
    case Axis::X:
      s << 0.0, 1.0, 1.0, 0.0;
      break;
    case Axis::Y:
      s << 0.0, -1i, 1i, 0.0;
      break;
    case Axis::Z:
      s << 1.0, 0.0, 0.0, -1.0;
      break;
  }
  return s;
}

/// J (XX + YY + ZZ)
inline ComplexMatrix build_h_ex(double j) {
  if (!std::isfinite(j)) throw std::invalid_argument("build_h_ex: j must be finite");
  const ComplexMatrix sum = kron(pauli(Axis::X), pauli(Axis::X)) +
                            kron(pauli(Axis::Y), pauli(Axis::Y)) +
                            kron(pauli(Axis::Z), pauli(Axis::Z));
  return j * sum;
}

/// m (Z1 + Z2)
inline ComplexMatrix build_h_m(double m) {
  if (!std::isfinite(m)) throw std::invalid_argument("build_h_m: m must be finite");
  const ComplexMatrix id = identity(2);
  return m * (kron(pauli(Axis::Z), id) + kron(id, pauli(Axis::Z)));
}

inline ComplexMatrix build_total(double j, double m) {
  return build_h_ex(j) + build_h_m(m);
}

/// |+-> with |-> = (|0> - |1>)/sqrt(2): amplitudes (1/2, -1/2, 1/2, -1/2).
inline PureState initial_state_plus_minus() {
  return PureState({0.5, -0.5, 0.5, -0.5});
}

/// |++>: lies entirely in the exchange triplet, so exchange noise only
/// contributes a global phase.
inline PureState initial_state_plus_plus() {
  return PureState({0.5, 0.5, 0.5, 0.5});
}

}  // namespace hexmag
