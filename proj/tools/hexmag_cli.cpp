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

// hexmag: two-qubit exchange-noise simulator and field estimator.
//
//   hexmag simulate --epsilon 0.5 --m 1 --output trace.csv
//   hexmag validate --n_samples 200000 --times 0.5,1,2
//   hexmag estimate --m 0.7 --output estimate.json --format json
//   hexmag sweep --source mc --m_values 0.25,0.5,1,2
//
// Every subcommand accepts --config FILE (key=value lines); flags override it.

#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "hexmag/driver.hpp"

namespace {

using hexmag::cli::Mode;

struct FlagDef {
  const char* key;
  const char* names;
  const char* help;
};

constexpr FlagDef kFlags[] = {
    {"j0", "--j0", "exchange coupling mean"},
    {"epsilon", "--epsilon", "exchange noise standard deviation"},
    {"m", "--m", "field strength"},
    {"t_max", "--t_max,--t-max", "time horizon"},
    {"n_steps", "--n_steps,--n-steps", "time points for simulate/validate"},
    {"n_samples", "--n_samples,--n-samples", "Monte Carlo samples per time point"},
    {"seed", "--seed", "master seed"},
    {"dt", "--dt", "estimator sample spacing"},
    {"delta", "--delta", "damping threshold for the estimation window"},
    {"snr", "--snr", "detection SNR threshold"},
    {"refine", "--refine", "least-squares refinement (true/false)"},
    {"min_amplitude", "--min_amplitude,--min-amplitude", "smallest tone amplitude reported as detected"},
    {"source", "--source", "series source for estimate/sweep: analytic|mc"},
    {"output", "--output,-o", "output path (default: standard output)"},
    {"format", "--format", "csv|json"},
    {"threads", "--threads", "worker threads"},
    {"times", "--times", "validate: comma-separated time points"},
    {"m_values", "--m_values,--m-values", "sweep: comma-separated field strengths"},
};

struct Subcommand {
  CLI::App* app = nullptr;
  Mode mode = Mode::simulate;
  std::string config_path;
  std::map<std::string, std::string> flags;
};

void add_subcommand(CLI::App& root, Subcommand& sub, const char* name, const char* help, Mode mode) {
  sub.mode = mode;
  sub.app = root.add_subcommand(name, help);
  sub.app->add_option("--config,-c", sub.config_path, "key=value configuration file");
  for (const auto& f : kFlags) {
    sub.app->add_option(f.names, sub.flags[f.key], f.help);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-qubit Heisenberg exchange magnetometry simulator"};
  app.require_subcommand(1);

  Subcommand subs[4];
  add_subcommand(app, subs[0], "simulate", "MC and closed-form observables on a time grid", Mode::simulate);
  add_subcommand(app, subs[1], "validate", "check the MC-averaged state against the closed form", Mode::validate);
  add_subcommand(app, subs[2], "estimate", "estimate the field from the return probability", Mode::estimate);
  add_subcommand(app, subs[3], "sweep", "estimate the field for a list of field strengths", Mode::sweep);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return hexmag::cli::kExitConfig;
  }

  for (auto& sub : subs) {
    if (!sub.app->parsed()) continue;
    try {
      hexmag::cli::KeyValues kv;
      if (!sub.config_path.empty()) kv = hexmag::cli::load_config_file(sub.config_path);
      for (const auto& [key, value] : sub.flags) {
        if (!value.empty()) kv[key] = value;
      }
      const auto cfg = hexmag::cli::build_run_config(sub.mode, kv);
      return hexmag::cli::run(cfg, std::cout, std::cerr);
    } catch (const hexmag::cli::ConfigError& e) {
      std::cerr << "config error: " << e.what() << "\n";
      return hexmag::cli::kExitConfig;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return hexmag::cli::kExitConfig;
    }
  }
  return hexmag::cli::kExitConfig;
}
