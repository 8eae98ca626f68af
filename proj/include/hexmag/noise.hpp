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

// Quasi-static Gaussian exchange noise: one coupling J ~ N(j0, epsilon^2) per
// trajectory, held fixed for the whole evolution. Ensemble averages are
// computed by Monte Carlo, with the closed-form Gaussian average as oracle.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <thread>
#include <vector>

#include "hexmag/dynamics.hpp"
#include "hexmag/linalg.hpp"
#include "hexmag/model.hpp"

namespace hexmag {

/// Samples per reduction chunk. Partial sums are formed per chunk in sample
/// order and folded in chunk order, so results do not depend on threading.
inline constexpr std::size_t kChunkSize = 4096;

/// Time steps between exact re-evaluations of the exchange phasor in the
/// uniform-grid kernels (in between, the phasor is advanced by rotation).
inline constexpr std::size_t kPhasorResync = 64;

struct NoiseEnsemble {
  std::size_t n_samples = 200000;
  std::uint64_t master_seed = 1;

  void validate() const {
    if (n_samples == 0) throw std::invalid_argument("NoiseEnsemble: n_samples must be >= 1");
  }
};

/// Uniform time grid start + n * step, n = 0 .. count-1.
struct TimeGrid {
  double start = 0.0;
  double step = 0.0;
  std::size_t count = 1;

  double time(std::size_t n) const { return start + static_cast<double>(n) * step; }

  void validate() const {
    if (count == 0) throw std::invalid_argument("TimeGrid: count must be >= 1");
    if (!std::isfinite(start) || !std::isfinite(step) || step < 0.0) {
      throw std::invalid_argument("TimeGrid: start/step must be finite and step >= 0");
    }
    if (count > 1 && step <= 0.0) throw std::invalid_argument("TimeGrid: step must be > 0");
  }

  static TimeGrid single(double t) { return TimeGrid{t, 0.0, 1}; }
};

namespace rng {

/// splitmix64 output function.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

/// Word `counter` of the splitmix64 stream keyed by `seed`; random access.
constexpr std::uint64_t stream_word(std::uint64_t seed, std::uint64_t counter) {
  return mix64(mix64(seed) + (counter + 1) * kGamma);
}

/// Maps 64 random bits to (0, 1].
constexpr double to_unit_open(std::uint64_t bits) {
  return static_cast<double>((bits >> 11) + 1) * 0x1.0p-53;
}

/// Standard normal variate for sample k (Box-Muller on stream words 2k, 2k+1).
inline double standard_normal(std::uint64_t seed, std::uint64_t k) {
  const double u1 = to_unit_open(stream_word(seed, 2 * k));
  const double u2 = to_unit_open(stream_word(seed, 2 * k + 1));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace rng

/// Coupling J_k ~ N(j0, epsilon^2), a pure function of (master_seed, k).
inline double sample_coupling(const SystemParams& params, const NoiseEnsemble& ensemble,
                              std::size_t k) {
  if (k >= ensemble.n_samples) {
    throw std::invalid_argument("sample_coupling: index out of range");
  }
  if (params.epsilon == 0.0) return params.j0;
  return params.j0 + params.epsilon * rng::standard_normal(ensemble.master_seed, k);
}

inline std::vector<double> draw_couplings(const SystemParams& params,
                                          const NoiseEnsemble& ensemble) {
  params.validate();
  ensemble.validate();
  std::vector<double> j(ensemble.n_samples);
  for (std::size_t k = 0; k < j.size(); ++k) j[k] = sample_coupling(params, ensemble, k);
  return j;
}

namespace detail {

// Plain complex product; avoids the NaN/Inf recovery path of operator*.
inline cplx cmul(cplx a, cplx b) {
  return {a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real()};
}

using StateArray = std::array<cplx, 4>;

/// Evolves psi0 under H(j, m) to every grid time and calls sink(n, psi_n).
/// field_phase[n] = exp(-2 i m t_n).
template <class Sink>
void for_each_evolved_state(double j, const TimeGrid& grid, std::span<const cplx> field_phase,
                            const PureState& psi0, Sink&& sink) {
  const cplx rotate = std::polar(1.0, -j * grid.step);
  cplx z;  // exp(-i j t): triplet phase
  for (std::size_t n = 0; n < grid.count; ++n) {
    z = (n % kPhasorResync == 0) ? std::polar(1.0, -j * grid.time(n)) : cmul(z, rotate);
    const cplx zc = std::conj(z);
    const cplx singlet = cmul(cmul(zc, zc), zc);  // exp(3 i j t)
    const cplx p = 0.5 * (z + singlet);
    const cplx q = 0.5 * (z - singlet);
    const cplx up = cmul(z, field_phase[n]);
    const cplx down = cmul(z, std::conj(field_phase[n]));
    const StateArray psi{cmul(up, psi0[0]), cmul(p, psi0[1]) + cmul(q, psi0[2]),
                         cmul(q, psi0[1]) + cmul(p, psi0[2]), cmul(down, psi0[3])};
    sink(n, psi);
  }
}

/// Sums accumulate(j_k, buffer) over all samples with the fixed chunked
/// reduction order. `width` is the buffer length.
template <class Accumulate>
std::vector<double> reduce_over_samples(std::span<const double> couplings, std::size_t width,
                                        unsigned threads, Accumulate&& accumulate) {
  const std::size_t n = couplings.size();
  const std::size_t chunks = (n + kChunkSize - 1) / kChunkSize;
  const std::size_t workers = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(chunks, 1));

  std::vector<double> total(width, 0.0);
  std::vector<std::vector<double>> partial(workers, std::vector<double>(width));

  auto run_chunk = [&](std::size_t chunk, std::vector<double>& buffer) {
    std::fill(buffer.begin(), buffer.end(), 0.0);
    const std::size_t end = std::min(n, (chunk + 1) * kChunkSize);
    for (std::size_t k = chunk * kChunkSize; k < end; ++k) accumulate(couplings[k], buffer.data());
  };

  for (std::size_t first = 0; first < chunks; first += workers) {
    const std::size_t in_wave = std::min(workers, chunks - first);
    if (in_wave == 1) {
      run_chunk(first, partial[0]);
    } else {
      std::vector<std::jthread> pool;
      pool.reserve(in_wave);
      for (std::size_t s = 0; s < in_wave; ++s) {
        pool.emplace_back([&, s] { run_chunk(first + s, partial[s]); });
      }
    }
    for (std::size_t s = 0; s < in_wave; ++s) {
      for (std::size_t i = 0; i < width; ++i) total[i] += partial[s][i];
    }
  }
  return total;
}

inline std::vector<cplx> field_phases(double m, const TimeGrid& grid) {
  std::vector<cplx> phase(grid.count);
  for (std::size_t n = 0; n < grid.count; ++n) phase[n] = std::polar(1.0, -2.0 * m * grid.time(n));
  return phase;
}

inline unsigned default_threads() { return std::max(1u, std::thread::hardware_concurrency()); }

}  // namespace detail

/// Monte Carlo ensemble-averaged density matrix at every grid time:
/// (1/N) sum_k U(J_k, m, t) |psi0><psi0| U(J_k, m, t)^dagger.
/// Output is bitwise independent of `threads`.
inline std::vector<DensityMatrix> mc_density_series(const SystemParams& params, const TimeGrid& grid,
                                                    const NoiseEnsemble& ensemble,
                                                    const PureState& psi0, unsigned threads = 1) {
  grid.validate();
  const std::vector<double> couplings = draw_couplings(params, ensemble);
  const std::vector<cplx> phase = detail::field_phases(params.m, grid);
  constexpr std::size_t kWidth = 20;  // upper triangle, 10 complex entries

  const std::vector<double> total = detail::reduce_over_samples(
      couplings, kWidth * grid.count, threads, [&](double j, double* acc) {
        detail::for_each_evolved_state(j, grid, phase, psi0, [&](std::size_t n, const detail::StateArray& psi) {
          double* slot = acc + kWidth * n;
          for (std::size_t r = 0; r < 4; ++r) {
            for (std::size_t c = r; c < 4; ++c) {
              const cplx v = detail::cmul(psi[r], std::conj(psi[c]));
              slot[0] += v.real();
              slot[1] += v.imag();
              slot += 2;
            }
          }
        });
      });

  const double count = static_cast<double>(ensemble.n_samples);
  std::vector<DensityMatrix> out;
  out.reserve(grid.count);
  for (std::size_t n = 0; n < grid.count; ++n) {
    const double* slot = total.data() + kWidth * n;
    ComplexMatrix rho(4, 4);
    for (Eigen::Index r = 0; r < 4; ++r) {
      for (Eigen::Index c = r; c < 4; ++c) {
        const cplx v(slot[0] / count, slot[1] / count);
        slot += 2;
        if (r == c) {
          rho(r, c) = v.real();
        } else {
          rho(r, c) = v;
          rho(c, r) = std::conj(v);
        }
      }
    }
    out.emplace_back(rho);
  }
  return out;
}

inline DensityMatrix mc_averaged_density(const SystemParams& params, double t,
                                         const NoiseEnsemble& ensemble, const PureState& psi0,
                                         unsigned threads = 1) {
  if (!std::isfinite(t)) throw std::invalid_argument("mc_averaged_density: t must be finite");
  return mc_density_series(params, TimeGrid::single(t), ensemble, psi0, threads).front();
}

/// Monte Carlo return probability <psi0| rho_avg(t) |psi0> on a grid, averaged
/// trajectory by trajectory as |<psi0|psi_k(t)>|^2.
inline std::vector<double> mc_return_probability_series(const SystemParams& params,
                                                        const TimeGrid& grid,
                                                        const NoiseEnsemble& ensemble,
                                                        const PureState& psi0,
                                                        unsigned threads = 1) {
  grid.validate();
  const std::vector<double> couplings = draw_couplings(params, ensemble);
  const std::vector<cplx> phase = detail::field_phases(params.m, grid);
  std::array<cplx, 4> bra;
  for (std::size_t i = 0; i < 4; ++i) bra[i] = std::conj(psi0[i]);

  std::vector<double> total = detail::reduce_over_samples(
      couplings, grid.count, threads, [&](double j, double* acc) {
        detail::for_each_evolved_state(j, grid, phase, psi0, [&](std::size_t n, const detail::StateArray& psi) {
          const cplx amp = detail::cmul(bra[0], psi[0]) + detail::cmul(bra[1], psi[1]) +
                           detail::cmul(bra[2], psi[2]) + detail::cmul(bra[3], psi[3]);
          acc[n] += std::norm(amp);
        });
      });
  for (double& v : total) v /= static_cast<double>(ensemble.n_samples);
  return total;
}

/// Closed-form Gaussian average of the evolved |+-><+-| for arbitrary j0.
/// With D = exp(-8 eps^2 t^2), phi+- = (4 j0 +- 2m) t:
///
///        |  1           -D e^{-i phi+}   D e^{-i phi+}  -e^{-4imt}     |
///  1/4 * | -D e^{i phi+}  1             -1               D e^{i phi-}  |
///        |  D e^{i phi+} -1              1              -D e^{i phi-}  |
///        | -e^{4imt}      D e^{-i phi-}  -D e^{-i phi-}  1             |
inline DensityMatrix analytic_averaged_density(const SystemParams& params, double t) {
  params.validate();
  if (!std::isfinite(t)) throw std::invalid_argument("analytic_averaged_density: t must be finite");
  const double damp = std::exp(-8.0 * params.epsilon * params.epsilon * t * t);
  const cplx plus = damp * std::polar(1.0, -(4.0 * params.j0 + 2.0 * params.m) * t);
  const cplx minus = damp * std::polar(1.0, -(4.0 * params.j0 - 2.0 * params.m) * t);
  const cplx corner = std::polar(1.0, -4.0 * params.m * t);

  ComplexMatrix rho(4, 4);
  rho << 1.0, -plus, plus, -corner,
         -std::conj(plus), 1.0, -1.0, std::conj(minus),
         std::conj(plus), -1.0, 1.0, -std::conj(minus),
         -std::conj(corner), minus, -minus, 1.0;
  return DensityMatrix(0.25 * rho);
}

}  // namespace hexmag
