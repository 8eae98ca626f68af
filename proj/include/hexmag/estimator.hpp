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

// Field estimation from a return-probability trace. Exchange noise damps every
// J-dependent tone by exp(-8 eps^2 t^2); the field-only term cos(4mt)/8 is not
// damped. The pipeline drops samples inside the damping envelope, removes the
// mean, locates the periodogram peak and optionally refines it by nonlinear
// least squares. The field magnitude is the recovered angular frequency / 4.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hexmag/errors.hpp"
#include "hexmag/model.hpp"
#include "hexmag/observables.hpp"

namespace hexmag {

inline constexpr std::size_t kMinWindowSamples = 16;
inline constexpr std::size_t kZeroPadding = 4;

struct EstimatorConfig {
  double dt = 0.05;
  double t_max = 100.0;
  double damp_threshold = 1e-3;  // delta: window starts where exp(-8 eps^2 t^2) <= delta
  double detection_snr = 10.0;
  bool refine = true;
  // Smallest tone amplitude reported as a detection. Must sit above the
  // in-window nuisance (|damped terms| <= delta / 2) and below 1/8.
  double min_amplitude = 0.01;

  double nyquist_omega() const { return std::numbers::pi / dt; }

  void validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("EstimatorConfig: dt must be > 0");
    if (!(t_max > dt) || !std::isfinite(t_max)) throw std::invalid_argument("EstimatorConfig: t_max must exceed dt");
    if (!(damp_threshold > 0.0 && damp_threshold < 1.0)) {
      throw std::invalid_argument("EstimatorConfig: damp_threshold must lie in (0, 1)");
    }
    if (!(detection_snr > 1.0)) throw std::invalid_argument("EstimatorConfig: detection_snr must be > 1");
    if (!(min_amplitude >= 0.0)) throw std::invalid_argument("EstimatorConfig: min_amplitude must be >= 0");
  }

  /// Samples 0, dt, ..., up to t_max.
  TimeGrid grid() const {
    const auto n = static_cast<std::size_t>(std::floor(t_max / dt + 1e-9)) + 1;
    return TimeGrid{0.0, dt, n};
  }
};

struct FieldEstimate {
  double m_hat = 0.0;
  double std_err = 0.0;
  bool detected = false;
  double peak_omega = 0.0;
  double residual_rms = 0.0;
  double window_start = 0.0;
  // Diagnostics.
  double snr = 0.0;
  double amplitude = 0.0;
  double nyquist_omega = 0.0;
  bool refined = false;
  bool aliased = false;
  std::string diagnostic;
};

struct SpectralPeak {
  double omega = 0.0;
  double power = 0.0;
  double snr = 0.0;
  double amplitude = 0.0;   // tone amplitude implied by the peak power
  double bin_width = 0.0;   // spacing of the (zero-padded) frequency grid
  double resolution = 0.0;  // 2 pi / span: natural bin width
};

struct RefineResult {
  double omega = 0.0;
  double amplitude = 0.0;
  double phase = 0.0;
  double residual_rms = 0.0;
  double omega_std_err = 0.0;
  bool converged = false;
  int iterations = 0;
};

/// Time after which exp(-8 eps^2 t^2) <= delta; 0 when eps = 0.
inline double damping_window_start(double epsilon, double delta) {
  if (epsilon <= 0.0) return 0.0;
  return std::sqrt(std::log(1.0 / delta) / (8.0 * epsilon * epsilon));
}

namespace detail {

inline double uniform_step(const std::vector<double>& times) {
  if (times.size() < 2) throw InsufficientDataError("series has fewer than 2 samples");
  const double step = times[1] - times[0];
  for (std::size_t i = 2; i < times.size(); ++i) {
    if (std::abs((times[i] - times[i - 1]) - step) > 1e-6 * step) {
      throw std::invalid_argument("series is not uniformly sampled");
    }
  }
  return step;
}

inline double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (v.size() % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(v.begin(), mid);
  return 0.5 * (lower + upper);
}

// Least-squares a cos(w tau) + b sin(w tau) at fixed w; tau = t - center.
struct LinearTone {
  double a = 0.0;
  double b = 0.0;
  double rss = 0.0;
};

inline LinearTone fit_linear_tone(const ObservableSeries& s, double omega, double center) {
  Eigen::Matrix2d ata = Eigen::Matrix2d::Zero();
  Eigen::Vector2d aty = Eigen::Vector2d::Zero();
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double tau = s.times[i] - center;
    const double c = std::cos(omega * tau), sn = std::sin(omega * tau);
    ata(0, 0) += c * c;
    ata(0, 1) += c * sn;
    ata(1, 1) += sn * sn;
    aty(0) += c * s.values[i];
    aty(1) += sn * s.values[i];
  }
  ata(1, 0) = ata(0, 1);
  LinearTone fit;
  const Eigen::Vector2d ab = ata.ldlt().solve(aty);
  if (ab.allFinite()) {
    fit.a = ab(0);
    fit.b = ab(1);
  }
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double tau = s.times[i] - center;
    const double r = s.values[i] - fit.a * std::cos(omega * tau) - fit.b * std::sin(omega * tau);
    fit.rss += r * r;
  }
  return fit;
}

inline double wrap_phase(double phi) {
  phi = std::remainder(phi, 2.0 * std::numbers::pi);
  return phi <= -std::numbers::pi ? phi + 2.0 * std::numbers::pi : phi;
}

}  // namespace detail

/// Keeps samples with t >= damping_window_start(eps, delta) and subtracts their mean.
/// Throws InsufficientDataError if fewer than 16 samples survive.
inline ObservableSeries prepare_series(const ObservableSeries& series, const SystemParams& params,
                                       const EstimatorConfig& cfg) {
  cfg.validate();
  params.validate();
  series.validate(/*check_range=*/false);
  if (series.kind != ObservableKind::return_prob) {
    throw std::invalid_argument("prepare_series: expected a return-probability series");
  }
  const double step = detail::uniform_step(series.times);
  if (std::abs(step - cfg.dt) > 1e-6 * cfg.dt) {
    std::ostringstream msg;
    msg << "prepare_series: series spacing " << step << " does not match dt " << cfg.dt;
    throw std::invalid_argument(msg.str());
  }

  const double t_cut = damping_window_start(params.epsilon, cfg.damp_threshold);
  ObservableSeries out{{}, {}, series.kind, series.source};
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (series.times[i] >= t_cut) {
      out.times.push_back(series.times[i]);
      out.values.push_back(series.values[i]);
    }
  }
  if (out.size() < kMinWindowSamples) {
    std::ostringstream msg;
    msg << "only " << out.size() << " samples after t_cut = " << t_cut << " (need "
        << kMinWindowSamples << ")";
    throw InsufficientDataError(msg.str());
  }
  double mean = 0.0;
  for (double v : out.values) mean += v;
  mean /= static_cast<double>(out.size());
  for (double& v : out.values) v -= mean;
  return out;
}

/// Periodogram (4x zero padded, DC excluded, up to Nyquist) with 3-point
/// quadratic interpolation of the peak. snr = peak power / median power of
/// the bins outside +-2 natural bins of the peak.
inline SpectralPeak spectral_peak(const ObservableSeries& detrended) {
  const std::size_t n = detrended.size();
  if (n < kMinWindowSamples) throw InsufficientDataError("spectral_peak: need at least 16 samples");
  const double step = detail::uniform_step(detrended.times);
  const std::size_t padded = kZeroPadding * n;
  const std::size_t bins = padded / 2;  // k = 1 .. bins
  SpectralPeak peak;
  peak.bin_width = 2.0 * std::numbers::pi / (static_cast<double>(padded) * step);
  peak.resolution = peak.bin_width * static_cast<double>(kZeroPadding);

  std::vector<double> power(bins + 1, 0.0);
  for (std::size_t k = 1; k <= bins; ++k) {
    const double omega = static_cast<double>(k) * peak.bin_width;
    const std::complex<double> rotate = std::polar(1.0, -omega * step);
    std::complex<double> phasor = 1.0;
    std::complex<double> sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (i % 256 == 0) phasor = std::polar(1.0, -omega * step * static_cast<double>(i));
      sum += detrended.values[i] * phasor;
      phasor *= rotate;
    }
    power[k] = std::norm(sum) / static_cast<double>(n);
  }

  std::size_t best = 1;
  for (std::size_t k = 2; k <= bins; ++k) {
    if (power[k] > power[best]) best = k;
  }
  double offset = 0.0;
  double peak_power = power[best];
  if (best > 1 && best < bins) {
    const double lo = power[best - 1], mid = power[best], hi = power[best + 1];
    const double denom = lo - 2.0 * mid + hi;
    if (denom < 0.0) {
      offset = std::clamp(0.5 * (lo - hi) / denom, -0.5, 0.5);
      peak_power = mid - 0.25 * (lo - hi) * offset;
    }
  }
  peak.omega = (static_cast<double>(best) + offset) * peak.bin_width;
  peak.power = peak_power;
  peak.amplitude = 2.0 * std::sqrt(std::max(peak_power, 0.0) / static_cast<double>(n));

  const std::size_t guard = 2 * kZeroPadding;
  std::vector<double> off_peak;
  off_peak.reserve(bins);
  for (std::size_t k = 1; k <= bins; ++k) {
    const std::size_t dist = k > best ? k - best : best - k;
    if (dist > guard) off_peak.push_back(power[k]);
  }
  const double floor = detail::median(std::move(off_peak));
  if (peak_power <= 0.0) {
    peak.snr = 0.0;
  } else if (floor <= 0.0) {
    peak.snr = std::numeric_limits<double>::infinity();
  } else {
    peak.snr = peak_power / floor;
  }
  return peak;
}

/// Fits y ~ A cos(w t + phi) by damped Gauss-Newton (Levenberg-Marquardt) in
/// the linearly equivalent parameters (a, b, w). The seed frequency is first
/// polished by scanning the variable-projection objective over +-1.5 natural
/// bins around omega0, which keeps the iteration inside the main lobe. On
/// failure returns the seed (amplitude0, omega0, 0) with converged = false.
inline RefineResult least_squares_refine(const ObservableSeries& detrended, double omega0,
                                         double amplitude0 = 0.0) {
  constexpr int kMaxIterations = 100;
  constexpr double kStepTol = 1e-9;
  const std::size_t n = detrended.size();
  if (n < 4) throw InsufficientDataError("least_squares_refine: need at least 4 samples");
  const double step = detail::uniform_step(detrended.times);
  const double nyquist = std::numbers::pi / step;
  if (!(omega0 > 0.0 && omega0 < nyquist)) {
    throw std::invalid_argument("least_squares_refine: omega0 outside (0, Nyquist)");
  }
  const double center = 0.5 * (detrended.times.front() + detrended.times.back());
  const double span = detrended.times.back() - detrended.times.front() + step;
  const double resolution = 2.0 * std::numbers::pi / span;

  RefineResult seed;
  seed.omega = omega0;
  seed.amplitude = amplitude0;
  {
    double rss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = detrended.values[i] - amplitude0 * std::cos(omega0 * detrended.times[i]);
      rss += r * r;
    }
    seed.residual_rms = std::sqrt(rss / static_cast<double>(n));
  }

  double omega = omega0;
  detail::LinearTone tone = detail::fit_linear_tone(detrended, omega, center);
  constexpr int kScan = 60;
  for (int s = 0; s <= kScan; ++s) {
    const double w = omega0 + resolution * (-1.5 + 3.0 * s / kScan);
    if (w <= 0.0 || w >= nyquist) continue;
    const detail::LinearTone trial = detail::fit_linear_tone(detrended, w, center);
    if (trial.rss < tone.rss) {
      tone = trial;
      omega = w;
    }
  }
  double a = tone.a, b = tone.b;
  if (std::hypot(a, b) <= 1e-300) return seed;

  auto evaluate = [&](double aa, double bb, double ww, Eigen::Matrix3d* jtj, Eigen::Vector3d* jtr) {
    double rss = 0.0;
    if (jtj) jtj->setZero();
    if (jtr) jtr->setZero();
    for (std::size_t i = 0; i < n; ++i) {
      const double tau = detrended.times[i] - center;
      const double c = std::cos(ww * tau), sn = std::sin(ww * tau);
      const double r = detrended.values[i] - (aa * c + bb * sn);
      rss += r * r;
      if (jtj) {
        const Eigen::Vector3d g(c, sn, tau * (-aa * sn + bb * c));
        *jtj += g * g.transpose();
        *jtr += g * r;
      }
    }
    return rss;
  };

  Eigen::Matrix3d jtj;
  Eigen::Vector3d jtr;
  double rss = evaluate(a, b, omega, &jtj, &jtr);
  double lambda = 1e-3;
  bool converged = false;
  int iter = 0;
  for (; iter < kMaxIterations && !converged; ++iter) {
    bool accepted = false;
    while (!accepted) {
      Eigen::Matrix3d damped = jtj;
      for (int d = 0; d < 3; ++d) damped(d, d) *= 1.0 + lambda;
      const Eigen::Vector3d delta = damped.ldlt().solve(jtr);
      if (!delta.allFinite()) return seed;
      const double trial_rss = evaluate(a + delta(0), b + delta(1), omega + delta(2), nullptr, nullptr);
      if (trial_rss <= rss) {
        a += delta(0);
        b += delta(1);
        omega += delta(2);
        rss = evaluate(a, b, omega, &jtj, &jtr);
        lambda = std::max(lambda * 0.1, 1e-12);
        accepted = true;
        converged = std::abs(delta(2)) < kStepTol;
      } else if (std::abs(delta(2)) < kStepTol) {
        // Already at the minimum to working precision.
        accepted = true;
        converged = true;
      } else {
        lambda *= 10.0;
        if (lambda > 1e12) return seed;
      }
    }
  }
  if (!converged || !(omega > 0.0 && omega < nyquist)) return seed;

  RefineResult out;
  out.converged = true;
  out.iterations = iter;
  out.omega = omega;
  out.amplitude = std::hypot(a, b);
  out.phase = detail::wrap_phase(std::atan2(-b, a) - omega * center);
  out.residual_rms = std::sqrt(rss / static_cast<double>(n));
  const Eigen::Matrix3d cov = jtj.inverse();
  const double sigma2 = n > 3 ? rss / static_cast<double>(n - 3) : 0.0;
  out.omega_std_err = std::sqrt(std::max(sigma2 * cov(2, 2), 0.0));
  return out;
}

/// prepare -> spectral peak -> optional refinement; m_hat = omega / 4.
/// Refuses (detected = false, aliased = true) when 4|m| of the supplied model
/// parameters, or the located peak, reaches the Nyquist frequency pi / dt.
inline FieldEstimate estimate_field(const ObservableSeries& series, const SystemParams& params,
                                    const EstimatorConfig& cfg) {
  const ObservableSeries window = prepare_series(series, params, cfg);
  FieldEstimate est;
  est.window_start = window.times.front();
  est.nyquist_omega = cfg.nyquist_omega();

  const SpectralPeak peak = spectral_peak(window);
  est.peak_omega = peak.omega;
  est.snr = peak.snr;
  est.amplitude = peak.amplitude;

  std::ostringstream why;
  if (4.0 * std::abs(params.m) >= est.nyquist_omega) {
    why << "aliasing: field tone 4|m| = " << 4.0 * std::abs(params.m)
        << " is at or above the Nyquist frequency pi/dt = " << est.nyquist_omega;
  } else if (peak.omega >= est.nyquist_omega - 2.0 * peak.resolution) {
    why << "aliasing: spectral peak " << peak.omega << " lies at the Nyquist edge "
        << est.nyquist_omega;
  }
  if (!why.str().empty()) {
    est.aliased = true;
    est.diagnostic = why.str();
    return est;
  }

  double omega = peak.omega;
  double omega_err = peak.bin_width / std::sqrt(12.0);
  const double center = 0.5 * (window.times.front() + window.times.back());
  {
    const detail::LinearTone tone = detail::fit_linear_tone(window, omega, center);
    est.residual_rms = std::sqrt(tone.rss / static_cast<double>(window.size()));
  }
  if (cfg.refine && peak.power > 0.0) {
    const RefineResult fit = least_squares_refine(window, peak.omega, peak.amplitude);
    if (fit.converged) {
      omega = fit.omega;
      omega_err = fit.omega_std_err;
      est.amplitude = fit.amplitude;
      est.residual_rms = fit.residual_rms;
      est.refined = true;
    }
  }

  est.detected = peak.snr >= cfg.detection_snr && est.amplitude >= cfg.min_amplitude;
  if (est.detected) {
    est.m_hat = omega / 4.0;
    est.std_err = omega_err / 4.0;
  } else {
    std::ostringstream msg;
    msg << "no field tone: snr " << peak.snr << ", amplitude " << est.amplitude;
    est.diagnostic = msg.str();
  }
  return est;
}

}  // namespace hexmag
