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

// l1-norm of coherence and return probability, from density matrices and in
// closed form for the |+-> initial state.

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hexmag/dynamics.hpp"
#include "hexmag/errors.hpp"
#include "hexmag/model.hpp"
#include "hexmag/noise.hpp"

namespace hexmag {

inline constexpr double kImaginaryResidueTol = 1e-12;
inline constexpr double kSeriesRangeTol = 1e-10;

enum class ObservableKind { coherence_raw, coherence_normalized, return_prob };
enum class SeriesSource { mc, analytic };

inline std::string to_string(ObservableKind kind) {
  switch (kind) {
    case ObservableKind::coherence_raw: return "coherence_raw";
    case ObservableKind::coherence_normalized: return "coherence_normalized";
    case ObservableKind::return_prob: return "return_prob";
  }
  return "unknown";
}

/// A time trace of one observable.
struct ObservableSeries {
  std::vector<double> times;
  std::vector<double> values;
  ObservableKind kind = ObservableKind::return_prob;
  SeriesSource source = SeriesSource::analytic;

  std::size_t size() const { return times.size(); }

  /// Checks lengths, strict time ordering and the value range of `kind`.
  /// Set check_range = false for derived (e.g. de-meaned) series.
  void validate(bool check_range = true) const {
    if (times.size() != values.size()) {
      throw std::invalid_argument("ObservableSeries: times and values differ in length");
    }
    for (std::size_t i = 1; i < times.size(); ++i) {
      if (!(times[i] > times[i - 1])) {
        throw std::invalid_argument("ObservableSeries: times must be strictly increasing");
      }
    }
    if (!check_range) return;
    const double hi = kind == ObservableKind::coherence_raw ? 3.0 : 1.0;
    for (double v : values) {
      if (!(v >= -kSeriesRangeTol && v <= hi + kSeriesRangeTol)) {
        std::ostringstream msg;
        msg << "ObservableSeries: " << to_string(kind) << " value " << v << " out of range";
        throw std::invalid_argument(msg.str());
      }
    }
  }
};

/// Sum of |rho_ij| over i != j; divided by d - 1 = 3 when normalized.
inline double l1_coherence(const DensityMatrix& rho, bool normalized) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < 4; ++i) {
    for (Eigen::Index j = 0; j < 4; ++j) {
      if (i != j) sum += std::abs(rho(i, j));
    }
  }
  return normalized ? sum / 3.0 : sum;
}

/// <psi0| rho |psi0>. Throws ConsistencyError if the quadratic form has an
/// imaginary part above 1e-12.
inline double return_probability(const DensityMatrix& rho, const PureState& psi0) {
  cplx sum = 0.0;
  for (Eigen::Index i = 0; i < 4; ++i) {
    for (Eigen::Index j = 0; j < 4; ++j) {
      sum += std::conj(psi0[i]) * rho(i, j) * psi0[j];
    }
  }
  if (std::abs(sum.imag()) > kImaginaryResidueTol) {
    std::ostringstream msg;
    msg << "return_probability: imaginary residue " << sum.imag();
    throw ConsistencyError(msg.str());
  }
  return sum.real();
}

/// 3/8 + cos(4mt)/8 + cos(2mt) cos(4 j0 t) exp(-8 eps^2 t^2) / 2, for |+->.
inline double analytic_return_probability(const SystemParams& params, double t) {
  const double damp = std::exp(-8.0 * params.epsilon * params.epsilon * t * t);
  return 0.375 + 0.125 * std::cos(4.0 * params.m * t) +
         0.5 * std::cos(2.0 * params.m * t) * std::cos(4.0 * params.j0 * t) * damp;
}

/// Normalized l1-coherence of the averaged |+-> state: (1 + 2 exp(-8 eps^2 t^2)) / 3.
/// Independent of j0 and m.
inline double analytic_l1_coherence(const SystemParams& params, double t) {
  return (1.0 + 2.0 * std::exp(-8.0 * params.epsilon * params.epsilon * t * t)) / 3.0;
}

inline ObservableSeries analytic_return_probability_series(const SystemParams& params,
                                                           const TimeGrid& grid) {
  grid.validate();
  ObservableSeries s{{}, {}, ObservableKind::return_prob, SeriesSource::analytic};
  s.times.reserve(grid.count);
  s.values.reserve(grid.count);
  for (std::size_t n = 0; n < grid.count; ++n) {
    s.times.push_back(grid.time(n));
    s.values.push_back(analytic_return_probability(params, grid.time(n)));
  }
  return s;
}

inline ObservableSeries mc_return_probability_observable(const SystemParams& params,
                                                         const TimeGrid& grid,
                                                         const NoiseEnsemble& ensemble,
                                                         unsigned threads = 1) {
  ObservableSeries s{{}, {}, ObservableKind::return_prob, SeriesSource::mc};
  s.values = mc_return_probability_series(params, grid, ensemble, initial_state_plus_minus(), threads);
  s.times.reserve(grid.count);
  for (std::size_t n = 0; n < grid.count; ++n) s.times.push_back(grid.time(n));
  return s;
}

}  // namespace hexmag
