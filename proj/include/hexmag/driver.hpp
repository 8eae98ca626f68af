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

// Command implementations behind the `hexmag` CLI: configuration parsing,
// simulate / validate / estimate / sweep, and CSV / JSON emission.
//
// Exit codes: 0 success, 1 config error, 2 I/O error, 3 validation failure,
// 4 estimation failure (insufficient data or aliasing).

#include <nlohmann/json.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "hexmag/errors.hpp"
#include "hexmag/estimator.hpp"
#include "hexmag/noise.hpp"
#include "hexmag/observables.hpp"

namespace hexmag::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 1,
  kExitIo = 2,
  kExitValidation = 3,
  kExitEstimation = 4,
};

enum class Mode { simulate, validate, estimate, sweep };
enum class Format { csv, json };

inline constexpr std::string_view kSimulateHeader =
    "t,pr_mc,pr_analytic,c_raw_mc,c_norm_mc,c_norm_analytic";
inline constexpr std::string_view kSweepHeader =
    "m,m_hat,std_err,detected,peak_omega,residual_rms,window_start";

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  Mode mode = Mode::simulate;
  SystemParams params{1.0, 0.5, 0.0};
  double t_max = 10.0;
  std::size_t n_steps = 201;
  NoiseEnsemble ensemble{};
  EstimatorConfig estimator{};
  SeriesSource source = SeriesSource::analytic;
  std::string output_path;  // empty: standard output
  Format format = Format::csv;
  unsigned threads = 1;
  std::vector<double> times;     // validate: explicit time points (overrides the grid)
  std::vector<double> m_values;  // sweep: field strengths

  /// t_n = n t_max / (n_steps - 1); a single step means the point t = 0.
  TimeGrid grid() const {
    if (n_steps == 1) return TimeGrid::single(0.0);
    return TimeGrid{0.0, t_max / static_cast<double>(n_steps - 1), n_steps};
  }
};

using KeyValues = std::map<std::string, std::string, std::less<>>;

inline constexpr std::string_view kKnownKeys[] = {
    "mode", "j0", "epsilon", "m", "t_max", "n_steps", "n_samples", "seed", "dt", "delta",
    "snr", "refine", "source", "output", "format", "threads", "times", "m_values",
    "min_amplitude"};

inline bool is_known_key(std::string_view key) {
  for (auto k : kKnownKeys) {
    if (k == key) return true;
  }
  return false;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

inline double parse_double(std::string_view key, std::string_view text) {
  text = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v)) {
    throw ConfigError(std::string(key) + ": expected a finite number, got '" + std::string(text) + "'");
  }
  return v;
}

inline std::uint64_t parse_uint(std::string_view key, std::string_view text) {
  text = trim(text);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ConfigError(std::string(key) + ": expected a non-negative integer, got '" + std::string(text) + "'");
  }
  return v;
}

inline bool parse_bool(std::string_view key, std::string_view text) {
  text = trim(text);
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw ConfigError(std::string(key) + ": expected true/false, got '" + std::string(text) + "'");
}

inline std::vector<double> parse_list(std::string_view key, std::string_view text) {
  std::vector<double> out;
  while (!text.empty()) {
    const auto comma = text.find(',');
    out.push_back(parse_double(key, text.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  if (out.empty()) throw ConfigError(std::string(key) + ": empty list");
  return out;
}

}  // namespace detail

/// Shortest round-trip-safe rendering with 17 significant digits, locale free.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

inline std::string_view to_string(Mode mode) {
  switch (mode) {
    case Mode::simulate: return "simulate";
    case Mode::validate: return "validate";
    case Mode::estimate: return "estimate";
    case Mode::sweep: return "sweep";
  }
  return "?";
}

inline Mode parse_mode(std::string_view text) {
  text = detail::trim(text);
  if (text == "simulate") return Mode::simulate;
  if (text == "validate") return Mode::validate;
  if (text == "estimate") return Mode::estimate;
  if (text == "sweep") return Mode::sweep;
  throw ConfigError("mode: expected simulate|validate|estimate|sweep, got '" + std::string(text) + "'");
}

/// Parses `key = value` lines; '#' starts a comment.
inline KeyValues parse_key_values(std::string_view text) {
  KeyValues out;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key=value");
    }
    const auto key = detail::trim(line.substr(0, eq));
    if (!is_known_key(key)) {
      throw ConfigError("config line " + std::to_string(line_no) + ": unknown key '" + std::string(key) + "'");
    }
    out[std::string(key)] = std::string(detail::trim(line.substr(eq + 1)));
  }
  return out;
}

inline KeyValues load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_key_values(buf.str());
}

/// Builds a validated RunConfig. `mode` (from the subcommand) wins over a
/// `mode` key; remaining keys take defaults, some of which depend on the mode.
inline RunConfig build_run_config(std::optional<Mode> mode, const KeyValues& kv) {
  for (const auto& [key, value] : kv) {
    if (!is_known_key(key)) throw ConfigError("unknown key '" + key + "'");
  }
  auto get = [&](std::string_view key) -> const std::string* {
    const auto it = kv.find(key);
    return it == kv.end() ? nullptr : &it->second;
  };

  RunConfig cfg;
  if (mode) {
    cfg.mode = *mode;
  } else if (const auto* v = get("mode")) {
    cfg.mode = parse_mode(*v);
  } else {
    throw ConfigError("mode: not given");
  }
  const bool long_horizon = cfg.mode == Mode::estimate || cfg.mode == Mode::sweep;
  cfg.t_max = long_horizon ? 100.0 : 10.0;
  cfg.m_values = {0.25, 0.5, 1.0, 2.0};

  if (const auto* v = get("j0")) cfg.params.j0 = detail::parse_double("j0", *v);
  if (const auto* v = get("epsilon")) cfg.params.epsilon = detail::parse_double("epsilon", *v);
  if (const auto* v = get("m")) cfg.params.m = detail::parse_double("m", *v);
  if (const auto* v = get("t_max")) cfg.t_max = detail::parse_double("t_max", *v);
  if (const auto* v = get("n_steps")) cfg.n_steps = detail::parse_uint("n_steps", *v);
  if (const auto* v = get("n_samples")) cfg.ensemble.n_samples = detail::parse_uint("n_samples", *v);
  if (const auto* v = get("seed")) cfg.ensemble.master_seed = detail::parse_uint("seed", *v);
  if (const auto* v = get("dt")) cfg.estimator.dt = detail::parse_double("dt", *v);
  if (const auto* v = get("delta")) cfg.estimator.damp_threshold = detail::parse_double("delta", *v);
  if (const auto* v = get("snr")) cfg.estimator.detection_snr = detail::parse_double("snr", *v);
  if (const auto* v = get("refine")) cfg.estimator.refine = detail::parse_bool("refine", *v);
  if (const auto* v = get("min_amplitude")) {
    cfg.estimator.min_amplitude = detail::parse_double("min_amplitude", *v);
  }
  if (const auto* v = get("source")) {
    const auto s = detail::trim(*v);
    if (s == "analytic") {
      cfg.source = SeriesSource::analytic;
    } else if (s == "mc") {
      cfg.source = SeriesSource::mc;
    } else {
      throw ConfigError("source: expected analytic|mc, got '" + std::string(s) + "'");
    }
  }
  if (const auto* v = get("output")) cfg.output_path = std::string(detail::trim(*v));
  if (const auto* v = get("format")) {
    const auto s = detail::trim(*v);
    if (s == "csv") {
      cfg.format = Format::csv;
    } else if (s == "json") {
      cfg.format = Format::json;
    } else {
      throw ConfigError("format: expected csv|json, got '" + std::string(s) + "'");
    }
  }
  if (const auto* v = get("threads")) {
    const auto t = detail::parse_uint("threads", *v);
    if (t == 0 || t > 1024) throw ConfigError("threads: expected 1..1024");
    cfg.threads = static_cast<unsigned>(t);
  } else {
    cfg.threads = ::hexmag::detail::default_threads();
  }
  if (const auto* v = get("times")) cfg.times = detail::parse_list("times", *v);
  if (const auto* v = get("m_values")) cfg.m_values = detail::parse_list("m_values", *v);

  if (!(cfg.params.epsilon >= 0.0)) throw ConfigError("epsilon: must be >= 0");
  if (!(cfg.t_max > 0.0)) throw ConfigError("t_max: must be > 0");
  if (cfg.n_steps < 1) throw ConfigError("n_steps: must be >= 1");
  if (cfg.ensemble.n_samples < 1) throw ConfigError("n_samples: must be >= 1");
  cfg.estimator.t_max = cfg.t_max;
  try {
    cfg.params.validate();
    if (long_horizon) cfg.estimator.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

// ---------------------------------------------------------------------------
// Output helpers

/// Writes `content` to cfg.output_path, or to `out` when no path is set.
inline int emit(const RunConfig& cfg, const std::string& content, std::ostream& out, std::ostream& err) {
  if (cfg.output_path.empty()) {
    out << content;
    return kExitOk;
  }
  std::ofstream file(cfg.output_path, std::ios::binary | std::ios::trunc);
  if (file) file << content;
  if (!file) {
    err << "error: cannot write '" << cfg.output_path << "'\n";
    return kExitIo;
  }
  return kExitOk;
}

inline std::string csv_row(std::initializer_list<double> values) {
  std::string row;
  bool first = true;
  for (double v : values) {
    if (!first) row += ',';
    row += format_double(v);
    first = false;
  }
  row += '\n';
  return row;
}

inline nlohmann::json estimate_to_json(const FieldEstimate& e) {
  return nlohmann::json{{"m_hat", e.m_hat},           {"std_err", e.std_err},
                        {"detected", e.detected},     {"peak_omega", e.peak_omega},
                        {"residual_rms", e.residual_rms}, {"window_start", e.window_start}};
}

// ---------------------------------------------------------------------------
// Commands

/// One row per grid time: MC and closed-form return probability and coherence.
inline int simulate_cmd(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const TimeGrid grid = cfg.grid();
  const PureState psi0 = initial_state_plus_minus();
  const std::vector<DensityMatrix> rho =
      mc_density_series(cfg.params, grid, cfg.ensemble, psi0, cfg.threads);

  std::string body;
  nlohmann::json rows = nlohmann::json::array();
  if (cfg.format == Format::csv) body = std::string(kSimulateHeader) + "\n";
  for (std::size_t n = 0; n < grid.count; ++n) {
    const double t = grid.time(n);
    const double pr_mc = return_probability(rho[n], psi0);
    const double pr_an = analytic_return_probability(cfg.params, t);
    const double c_raw = l1_coherence(rho[n], false);
    const double c_norm = l1_coherence(rho[n], true);
    const double c_an = analytic_l1_coherence(cfg.params, t);
    if (cfg.format == Format::csv) {
      body += csv_row({t, pr_mc, pr_an, c_raw, c_norm, c_an});
    } else {
      rows.push_back({{"t", t}, {"pr_mc", pr_mc}, {"pr_analytic", pr_an}, {"c_raw_mc", c_raw},
                      {"c_norm_mc", c_norm}, {"c_norm_analytic", c_an}});
    }
  }
  if (cfg.format == Format::json) body = rows.dump(2) + "\n";
  return emit(cfg, body, out, err);
}

struct ValidationReport {
  std::vector<double> times;
  std::vector<double> errors;  // max entrywise |rho_mc - rho_analytic| per time
  double max_error = 0.0;
  double bound = 0.0;
  bool pass = false;
};

/// Per-entry acceptance margin: 3 standard errors of a mean of terms bounded
/// by 1/2 in magnitude.
inline double validation_bound(std::size_t n_samples) {
  return 3.0 / (2.0 * std::sqrt(static_cast<double>(n_samples)));
}

inline ValidationReport run_validation(const RunConfig& cfg) {
  ValidationReport rep;
  const PureState psi0 = initial_state_plus_minus();
  std::vector<DensityMatrix> rho;
  if (!cfg.times.empty()) {
    rep.times = cfg.times;
    for (double t : cfg.times) {
      rho.push_back(mc_averaged_density(cfg.params, t, cfg.ensemble, psi0, cfg.threads));
    }
  } else {
    const TimeGrid grid = cfg.grid();
    for (std::size_t n = 0; n < grid.count; ++n) rep.times.push_back(grid.time(n));
    rho = mc_density_series(cfg.params, grid, cfg.ensemble, psi0, cfg.threads);
  }
  for (std::size_t i = 0; i < rep.times.size(); ++i) {
    const DensityMatrix exact = analytic_averaged_density(cfg.params, rep.times[i]);
    const double e = max_abs_diff(rho[i].matrix(), exact.matrix());
    rep.errors.push_back(e);
    rep.max_error = std::max(rep.max_error, e);
  }
  rep.bound = validation_bound(cfg.ensemble.n_samples);
  rep.pass = rep.max_error <= rep.bound;
  return rep;
}

inline int validate_cmd(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const ValidationReport rep = run_validation(cfg);
  for (std::size_t i = 0; i < rep.times.size(); ++i) {
    out << "t=" << format_double(rep.times[i]) << " max_error=" << format_double(rep.errors[i]) << "\n";
  }
  out << "max_error=" << format_double(rep.max_error) << " bound=" << format_double(rep.bound)
      << " n_samples=" << cfg.ensemble.n_samples << " result=" << (rep.pass ? "PASS" : "FAIL") << "\n";

  if (!cfg.output_path.empty()) {
    std::string body;
    if (cfg.format == Format::json) {
      nlohmann::json per_time = nlohmann::json::array();
      for (std::size_t i = 0; i < rep.times.size(); ++i) {
        per_time.push_back({{"t", rep.times[i]}, {"max_error", rep.errors[i]}});
      }
      body = nlohmann::json{{"max_error", rep.max_error}, {"bound", rep.bound},
                            {"n_samples", cfg.ensemble.n_samples}, {"pass", rep.pass},
                            {"per_time", per_time}}
                 .dump(2) +
             "\n";
    } else {
      body = "t,max_error\n";
      for (std::size_t i = 0; i < rep.times.size(); ++i) body += csv_row({rep.times[i], rep.errors[i]});
    }
    if (const int rc = emit(cfg, body, out, err); rc != kExitOk) return rc;
  }
  return rep.pass ? kExitOk : kExitValidation;
}

/// Return-probability trace on the estimator grid, closed form or Monte Carlo.
inline ObservableSeries estimation_series(const RunConfig& cfg, const SystemParams& params) {
  const TimeGrid grid = cfg.estimator.grid();
  if (cfg.source == SeriesSource::analytic) return analytic_return_probability_series(params, grid);
  return mc_return_probability_observable(params, grid, cfg.ensemble, cfg.threads);
}

inline int estimate_cmd(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  FieldEstimate est;
  try {
    est = estimate_field(estimation_series(cfg, cfg.params), cfg.params, cfg.estimator);
  } catch (const InsufficientDataError& e) {
    err << "error: insufficient data: " << e.what() << "\n";
    return kExitEstimation;
  }
  char line[64];
  std::snprintf(line, sizeof(line), "%.3f\n", est.m_hat);
  out << line;
  if (!est.diagnostic.empty()) err << est.diagnostic << "\n";

  if (!cfg.output_path.empty()) {
    std::string body;
    if (cfg.format == Format::json) {
      body = estimate_to_json(est).dump(2) + "\n";
    } else {
      body = "m_hat,std_err,detected,peak_omega,residual_rms,window_start\n" +
             csv_row({est.m_hat, est.std_err, est.detected ? 1.0 : 0.0, est.peak_omega,
                      est.residual_rms, est.window_start});
    }
    std::ostringstream sink;
    if (const int rc = emit(cfg, body, sink, err); rc != kExitOk) return rc;
  }
  return est.aliased ? kExitEstimation : kExitOk;
}

/// Field estimate for each value in m_values.
inline int sweep_cmd(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  std::string body;
  nlohmann::json rows = nlohmann::json::array();
  if (cfg.format == Format::csv) body = std::string(kSweepHeader) + "\n";
  for (double m : cfg.m_values) {
    SystemParams params = cfg.params;
    params.m = m;
    FieldEstimate est;
    try {
      est = estimate_field(estimation_series(cfg, params), params, cfg.estimator);
    } catch (const InsufficientDataError& e) {
      err << "error: insufficient data: " << e.what() << "\n";
      return kExitEstimation;
    }
    if (!est.diagnostic.empty()) err << "m=" << format_double(m) << ": " << est.diagnostic << "\n";
    if (cfg.format == Format::csv) {
      body += csv_row({m, est.m_hat, est.std_err, est.detected ? 1.0 : 0.0, est.peak_omega,
                       est.residual_rms, est.window_start});
    } else {
      nlohmann::json row = estimate_to_json(est);
      row["m"] = m;
      rows.push_back(std::move(row));
    }
  }
  if (cfg.format == Format::json) body = rows.dump(2) + "\n";
  return emit(cfg, body, out, err);
}

inline int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  switch (cfg.mode) {
    case Mode::simulate: return simulate_cmd(cfg, out, err);
    case Mode::validate: return validate_cmd(cfg, out, err);
    case Mode::estimate: return estimate_cmd(cfg, out, err);
    case Mode::sweep: return sweep_cmd(cfg, out, err);
  }
  return kExitConfig;
}

}  // namespace hexmag::cli
