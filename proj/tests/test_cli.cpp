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

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace {

struct Result {
  int code = -1;
  std::string out;
};

Result run_cli(const std::string& args) {
  const std::string cmd = std::string(HEXMAG_CLI_PATH) + " " + args + " 2>/dev/null";
  Result r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf{};
  while (const std::size_t n = fread(buf.data(), 1, buf.size(), pipe)) r.out.append(buf.data(), n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("hexmag_cli_" + name);
}

TEST(Cli, HelpExitsCleanly) {
  const Result r = run_cli("--help");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("simulate"), std::string::npos);
}

TEST(Cli, MissingSubcommandIsConfigError) { EXPECT_EQ(run_cli("").code, 1); }

TEST(Cli, SimulateWritesCsv) {
  const auto path = temp_path("sim.csv");
  const Result r = run_cli("simulate --n_steps 11 --n_samples 500 --output " + path.string());
  ASSERT_EQ(r.code, 0);
  const std::string csv = read_file(path);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "t,pr_mc,pr_analytic,c_raw_mc,c_norm_mc,c_norm_analytic");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 12);
  std::filesystem::remove(path);
}

TEST(Cli, ConfigFileWithFlagOverride) {
  const auto cfg = temp_path("run.cfg");
  std::ofstream(cfg) << "# estimate a weak field\nm = 0.5\nepsilon = 0.5\nsource = analytic\n";
  EXPECT_EQ(run_cli("estimate --config " + cfg.string()).out, "0.500\n");
  EXPECT_EQ(run_cli("estimate --config " + cfg.string() + " --m 0.7").out, "0.700\n");
  std::filesystem::remove(cfg);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run_cli("simulate --epsilon -1").code, 1);
  EXPECT_EQ(run_cli("simulate --config /nonexistent.cfg").code, 1);
  EXPECT_EQ(run_cli("simulate --n_steps 2 --n_samples 10 --output /nonexistent_dir/x.csv").code, 2);
  EXPECT_EQ(run_cli("validate --n_samples 20000 --times 0.5,1").code, 0);
  EXPECT_EQ(run_cli("estimate --m 20").code, 4);
  EXPECT_EQ(run_cli("estimate --m 1 --t_max 1.5").code, 4);
}

TEST(Cli, SweepJson) {
  const Result r = run_cli("sweep --m_values 0.5,1 --format json");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("\"m_hat\""), std::string::npos);
}

}  // namespace
