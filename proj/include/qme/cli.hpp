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

#ifndef QME_CLI_HPP_
#define QME_CLI_HPP_

#include <cstddef>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "qme/thermo.hpp"
#include "qme/trajectory.hpp"

namespace qme::cli {

enum class Command { kSingleShot, kBinary, kContinuous, kClassical, kPreset };

enum class Preset { kFigure2b, kFigure2c, kFigure2f, kFigureS2, kFigureS3 };

std::string_view to_string(Command command);
std::string_view to_string(Preset preset);

// Bad arguments, unknown keys or out-of-domain values. Exit status 1.
class UsageError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  Command command = Command::kContinuous;
  std::optional<Preset> preset;
  EngineConfig engine;
  ClassicalConfig classical;
  std::size_t n_samples = 100000; // single-shot, binary and classical draws
  unsigned threads = 0;           // 0: hardware concurrency
  std::string config_file;
  std::vector<std::string> argv;
  std::map<std::string, std::string> sources; // key -> "default" | "preset" | "file" | "flag"
};

/*
 * Parses the command line (argv[0] excluded). Values are layered as
 * defaults < preset < config file < flags; a flag given twice keeps the last
 * value. Returns nullopt after printing help to `out`. Throws UsageError.
 */
std::optional<RunConfig> parse_config(const std::vector<std::string>& args, std::ostream& out);

// Resolved configuration as written to the manifest.
nlohmann::json config_to_json(const RunConfig& config);

struct Artifact {
  std::string name; // relative to the output directory
  std::string content;
};

struct ExperimentResult {
  nlohmann::json summary;
  std::vector<Artifact> files;
  std::map<std::string, bool> checks;

  bool all_passed() const;
};

ExperimentResult run_experiment(const RunConfig& config);

/*
 * Writes every artifact plus summary.json and manifest.json into
 * config.engine.output_path. Each file goes to a temporary name first and is
 * renamed into place; on failure every file of this run is removed.
 */
void write_outputs(const RunConfig& config, ExperimentResult& result, double wall_clock_seconds);

// Lower-case hex SHA-256.
std::string sha256_hex(std::string_view data);

// Fixed-format CSV: '#' comment lines, a header row, then rows with 17 significant digits.
class CsvWriter {
public:
  void comment(std::string_view line);
  void header(const std::vector<std::string>& columns);
  void row(const std::vector<double>& values);
  const std::string& str() const { return out_; }

private:
  std::string out_;
  std::size_t columns_ = 0;
};

std::string format_double(double value);

// Entry point of the executable; returns the process exit status.
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace qme::cli

#endif // QME_CLI_HPP_
