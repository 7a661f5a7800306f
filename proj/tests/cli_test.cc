// Copyright 2026 The qme Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <set>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "gtest/gtest.h"

#include "qme/cli.hpp"
#include "qme/errors.hpp"
#include "test_util.h"

using namespace qme;
using namespace qme::cli;
namespace fs = std::filesystem;

namespace {

RunConfig parse(const std::vector<std::string>& args) {
  std::ostringstream out;
  auto config = parse_config(args, out);
  if (!config) {
    throw std::logic_error("help requested");
  }
  return *config;
}

// Fresh scratch directory per test, removed afterwards.
class CliRun : public ::testing::Test {
protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() /
           ("qme-cli-" + std::to_string(::getpid()) + "-" + info->test_suite_name() + "-" + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  static std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
  }

  int run(std::vector<std::string> args, std::string* out_text = nullptr) {
    args.insert(args.begin(), "qme");
    std::vector<const char*> argv;
    for (const auto& a : args) {
      argv.push_back(a.c_str());
    }
    std::ostringstream out;
    std::ostringstream err;
    const int code = qme::cli::main(static_cast<int>(argv.size()), argv.data(), out, err);
    if (out_text != nullptr) {
      *out_text = out.str() + err.str();
    }
    return code;
  }

  fs::path dir_;
};

} // namespace

TEST(ParseConfig, ContinuousExample) {
  const auto c = parse({"continuous", "--nbar", "0", "--tau", "1", "--t-final", "1", "--seed", "7"});
  EXPECT_EQ(c.command, Command::kContinuous);
  EXPECT_EQ(c.engine.tau1, 1.0);
  EXPECT_EQ(c.engine.tau2, 1.0);
  EXPECT_EQ(c.engine.nbar, 0.0);
  EXPECT_EQ(c.engine.t_final, 1.0);
  EXPECT_EQ(c.engine.seed, 7u);
  EXPECT_EQ(c.sources.at("tau1"), "flag");
  EXPECT_EQ(c.sources.at("policy"), "default");
}

TEST(ParseConfig, DocumentedDefaults) {
  const auto c = parse({"continuous", "--tau1", "2", "--tau2", "0.5"});
  EXPECT_DOUBLE_EQ(c.engine.step(), 0.005);
  EXPECT_EQ(c.engine.n_traj, 10000u);
  EXPECT_EQ(c.engine.policy, Policy::kTerminal);
  EXPECT_EQ(c.engine.scheme, Scheme::kStratonovich);
}

TEST(ParseConfig, AsymmetricItoRejected) {
  EXPECT_THROW(parse({"continuous", "--tau2", "0.9", "--tau1", "1", "--scheme", "ito"}), UsageError);
  EXPECT_NO_THROW(parse({"continuous", "--tau2", "0.9", "--tau1", "1"}));
}

TEST(ParseConfig, LastRepeatedFlagWins) {
  const auto c = parse({"continuous", "--nbar", "1", "--nbar", "2.5"});
  EXPECT_EQ(c.engine.nbar, 2.5);
  EXPECT_EQ(config_to_json(c)["nbar"], 2.5);
}

TEST(ParseConfig, TauThenChannelOverride) {
  const auto c = parse({"continuous", "--tau1", "0.5", "--tau", "2"});
  EXPECT_EQ(c.engine.tau1, 0.5);
  EXPECT_EQ(c.engine.tau2, 2.0);
}

TEST(ParseConfig, UsageErrors) {
  EXPECT_THROW(parse({}), UsageError);
  EXPECT_THROW(parse({"continuous", "--bogus", "1"}), UsageError);
  EXPECT_THROW(parse({"continuous", "--nbar", "-1"}), UsageError);
  EXPECT_THROW(parse({"continuous", "--nbar", "1x"}), UsageError);
  EXPECT_THROW(parse({"continuous", "--tau", "0"}), UsageError);
  EXPECT_THROW(parse({"continuous", "--dt", "0.5"}), UsageError);
  EXPECT_THROW(parse({"continuous", "--policy", "sometimes"}), UsageError);
  EXPECT_THROW(parse({"continuous", "--n-traj", "0"}), UsageError);
  EXPECT_THROW(parse({"classical", "--tau", "1"}), UsageError);
  EXPECT_THROW(parse({"classical", "--k", "0"}), UsageError);
  EXPECT_THROW(parse({"binary", "--r0", "0"}), UsageError);
  EXPECT_THROW(parse({"presets"}), UsageError);
  EXPECT_THROW(parse({"presets", "figure-9"}), UsageError);
  EXPECT_THROW(parse({"continuous", "--seed", "-3"}), UsageError);
}

TEST(ParseConfig, HelpReturnsNothing) {
  std::ostringstream out;
  EXPECT_FALSE(parse_config({"--help"}, out).has_value());
  EXPECT_NE(out.str().find("continuous"), std::string::npos);
  std::ostringstream sub;
  EXPECT_FALSE(parse_config({"continuous", "--help"}, sub).has_value());
  EXPECT_NE(sub.str().find("--t-final"), std::string::npos);
}

TEST_F(CliRun, ConfigFileLayering) {
  {
    std::ofstream f(path("run.json"));
    f << R"({"nbar": 1.5, "tau": 2, "policy": "per-step", "seed": 11})";
  }
  const auto c = parse({"continuous", "--config", path("run.json"), "--seed", "12"});
  EXPECT_EQ(c.engine.nbar, 1.5);
  EXPECT_EQ(c.engine.tau1, 2.0);
  EXPECT_EQ(c.engine.policy, Policy::kPerStep);
  EXPECT_EQ(c.engine.seed, 12u);
  EXPECT_EQ(c.sources.at("nbar"), "file");
  EXPECT_EQ(c.sources.at("seed"), "flag");

  // File beats preset, flag beats file.
  {
    std::ofstream f(path("preset.json"));
    f << R"({"n-traj": 123, "t-final": 0.5})";
  }
  const auto p = parse({"presets", "figure-2b", "--config", path("preset.json"), "--t-final", "0.25"});
  EXPECT_EQ(p.engine.n_traj, 123u);
  EXPECT_EQ(p.engine.t_final, 0.25);
  EXPECT_EQ(p.engine.policy, Policy::kTerminal);
  EXPECT_EQ(p.sources.at("policy"), "preset");
}

TEST_F(CliRun, ConfigFileErrors) {
  {
    std::ofstream f(path("unknown.json"));
    f << R"({"nbar": 1, "colour": "red"})";
  }
  {
    std::ofstream f(path("bad.json"));
    f << "{nbar: 1";
  }
  {
    std::ofstream f(path("domain.json"));
    f << R"({"t-final": -1})";
  }
  EXPECT_THROW(parse({"continuous", "--config", path("unknown.json")}), UsageError);
  EXPECT_THROW(parse({"continuous", "--config", path("bad.json")}), UsageError);
  EXPECT_THROW(parse({"continuous", "--config", path("domain.json")}), UsageError);
  EXPECT_THROW(parse({"continuous", "--config", path("missing.json")}), UsageError);
}

TEST(FormatDouble, SeventeenSignificantDigits) {
  EXPECT_EQ(format_double(0.1), "0.10000000000000001");
  EXPECT_EQ(format_double(1.0), "1");
  EXPECT_EQ(format_double(-1.0 / 3.0), "-0.33333333333333331");
  EXPECT_EQ(format_double(2.5e-300), "2.5e-300");
  test::Gen gen(5);
  for (int i = 0; i < 1000; ++i) {
    const double x = gen.uniform(-1.0, 1.0) * std::pow(10.0, gen.uniform(-30.0, 30.0));
    ASSERT_EQ(std::stod(format_double(x)), x);
  }
}

TEST(CsvWriter, Layout) {
  CsvWriter csv;
  csv.comment("units");
  csv.header({"a", "b"});
  csv.row({1.0, 0.5});
  EXPECT_EQ(csv.str(), "# units\na,b\n1,0.5\n");
  EXPECT_THROW(csv.row({1.0}), std::logic_error);
}

TEST(Sha256, KnownVector) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_F(CliRun, IdenticalRunsGiveIdenticalCsvs) {
  const std::vector<std::string> common = {"continuous", "--nbar", "0.5", "--t-final", "0.5",
                                           "--n-traj",   "300",    "--seed", "42"};
  auto a = common;
  a.insert(a.end(), {"--output", path("a"), "--threads", "1"});
  auto b = common;
  b.insert(b.end(), {"--output", path("b"), "--threads", "3"});
  ASSERT_EQ(run(a), 0);
  ASSERT_EQ(run(b), 0);
  for (const char* name : {"trajectory.csv", "work.csv", "histogram.csv"}) {
    const std::string x = slurp(dir_ / "a" / name);
    EXPECT_FALSE(x.empty());
    EXPECT_EQ(x, slurp(dir_ / "b" / name)) << name;
    EXPECT_EQ(x.find('\r'), std::string::npos);
  }
}

TEST_F(CliRun, TrajectoryCsvColumns) {
  ASSERT_EQ(run({"continuous", "--t-final", "0.2", "--n-traj", "10", "--output", path("o")}), 0);
  std::ifstream in(dir_ / "o" / "trajectory.csv");
  std::string line;
  std::vector<std::string> rows;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] != '#') {
      rows.push_back(line);
    }
  }
  ASSERT_EQ(rows.size(), 21u);
  EXPECT_EQ(rows[0], "t,q1,q2,q3,q4,q5,r1,r2,dW,W_cum");
  EXPECT_EQ(rows[1].substr(0, 5), "0.01,");
}

TEST_F(CliRun, ManifestListsEveryFileWithChecksum) {
  ASSERT_EQ(run({"single-shot", "--nbar", "1", "--n-samples", "1000", "--output", path("m"), "--seed", "3",
                 "--seed", "4"}),
            0);
  const auto manifest = nlohmann::json::parse(slurp(dir_ / "m" / "manifest.json"));
  EXPECT_EQ(manifest["config"]["seed"], 4);
  EXPECT_EQ(manifest["argv"].size(), 11u);
  std::set<std::string> listed;
  for (const auto& f : manifest["files"]) {
    const std::string name = f["name"];
    listed.insert(name);
    const std::string content = slurp(dir_ / "m" / name);
    EXPECT_EQ(f["sha256"], sha256_hex(content)) << name;
    EXPECT_EQ(f["bytes"], content.size());
  }
  std::set<std::string> on_disk;
  for (const auto& entry : fs::directory_iterator(dir_ / "m")) {
    on_disk.insert(entry.path().filename().string());
  }
  on_disk.erase("manifest.json");
  EXPECT_EQ(listed, on_disk);
  const auto summary = nlohmann::json::parse(slurp(dir_ / "m" / "summary.json"));
  EXPECT_TRUE(summary["all_passed"]);
  EXPECT_TRUE(summary["checks"]["mean_work_within_3se"]);
}

TEST_F(CliRun, WritesOnlyInsideOutputPath) {
  ASSERT_EQ(run({"binary", "--n-samples", "1000", "--output", path("only")}), 0);
  std::vector<std::string> entries;
  for (const auto& entry : fs::directory_iterator(dir_)) {
    entries.push_back(entry.path().filename().string());
  }
  EXPECT_EQ(entries, std::vector<std::string>{"only"});
}

TEST_F(CliRun, IoFailureRemovesPartialFiles) {
  { std::ofstream(path("blocker")) << "x"; }
  std::string text;
  EXPECT_EQ(run({"classical", "--n-samples", "1000", "--output", path("blocker") + "/sub"}, &text), 1);
  EXPECT_NE(text.find("error"), std::string::npos);

  // Unwritable directory: nothing is left behind.
  fs::create_directories(dir_ / "locked");
  fs::permissions(dir_ / "locked", fs::perms::owner_read | fs::perms::owner_exec);
  const bool enforced = ::access((dir_ / "locked").c_str(), W_OK) != 0; // root ignores permissions
  if (enforced) {
    EXPECT_EQ(run({"classical", "--n-samples", "1000", "--output", path("locked")}), 1);
    EXPECT_TRUE(fs::is_empty(dir_ / "locked"));
  }
  fs::permissions(dir_ / "locked", fs::perms::owner_all);
}

TEST_F(CliRun, ExitStatusReflectsChecks) {
  // From a thermal start the symmetric efficiency is still measurably below 1 at t = 2.
  std::string text;
  EXPECT_EQ(run({"presets", "figure-S3", "--nbar", "1", "--t-final", "2", "--n-traj", "100", "--output",
                 path("s3")},
                &text),
            2);
  EXPECT_NE(text.find("FAIL eta_symmetric_within_3se_of_1"), std::string::npos);
  EXPECT_EQ(run({"continuous", "--bogus"}), 1);
}

TEST_F(CliRun, ExecutableExitCodes) {
  const std::string exe = QME_CLI_PATH;
  const auto status = [&](const std::string& args) {
    const int raw = std::system((exe + " " + args + " > /dev/null 2>&1").c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  };
  EXPECT_EQ(status("classical --n-samples 1000 --output " + path("x")), 0);
  EXPECT_EQ(status("continuous --tau1 1 --tau2 0.9 --scheme ito"), 1);
  EXPECT_EQ(status(""), 1);
  EXPECT_EQ(status("--help"), 0);
}

TEST_F(CliRun, Figure2bHasOverlayColumns) {
  ASSERT_EQ(run({"presets", "figure-2b", "--n-traj", "500", "--output", path("f")}), 0);
  const std::string hist = slurp(dir_ / "f" / "histogram.csv");
  const std::string header = "bin_left,bin_right,center,count,density,exact_pdf\n";
  const auto at = hist.find(header);
  ASSERT_NE(at, std::string::npos);
  EXPECT_EQ(hist.find("nan", at), std::string::npos);
}

TEST_F(CliRun, FigureS3HasThreeSeries) {
  ASSERT_EQ(run({"presets", "figure-S3", "--t-final", "2", "--n-traj", "200", "--output", path("f")}), 0);
  const std::string csv = slurp(dir_ / "f" / "efficiency.csv");
  EXPECT_NE(csv.find("t,eta_1,std_error_1,eta_0.9,std_error_0.9,eta_1.2,std_error_1.2\n"), std::string::npos);
}

TEST_F(CliRun, OtherPresetsRun) {
  EXPECT_EQ(run({"presets", "figure-2c", "--n-traj", "2000", "--output", path("c")}), 0);
  EXPECT_EQ(run({"presets", "figure-2f", "--n-traj", "500", "--output", path("f")}), 0);
  EXPECT_EQ(run({"presets", "figure-S2", "--output", path("s")}), 0);
  EXPECT_TRUE(fs::exists(dir_ / "s" / "binary_efficiency.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "c" / "mean_work.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "f" / "power.csv"));
}
