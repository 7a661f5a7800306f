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

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <utility>

#include "CLI11.hpp"

#include "qme/cli.hpp"
#include "qme/errors.hpp"

namespace qme::cli {

std::string_view to_string(Command command) {
  switch (command) {
  case Command::kSingleShot:
    return "single-shot";
  case Command::kBinary:
    return "binary";
  case Command::kContinuous:
    return "continuous";
  case Command::kClassical:
    return "classical";
  case Command::kPreset:
    return "presets";
  }
  return "?";
}

std::string_view to_string(Preset preset) {
  switch (preset) {
  case Preset::kFigure2b:
    return "figure-2b";
  case Preset::kFigure2c:
    return "figure-2c";
  case Preset::kFigure2f:
    return "figure-2f";
  case Preset::kFigureS2:
    return "figure-S2";
  case Preset::kFigureS3:
    return "figure-S3";
  }
  return "?";
}

namespace {

struct KeySpec {
  const char* name;
  const char* help;
};

// Canonical order; within one layer keys are applied in this order, so --tau precedes --tau1/--tau2.
constexpr KeySpec kKeys[] = {
    {"nbar", "mean thermal quanta of the initial state"},
    {"tau", "measurement time of both channels (sets tau1 and tau2)"},
    {"tau1", "position-channel measurement time, units 1/w"},
    {"tau2", "momentum-channel measurement time, units 1/w"},
    {"dt", "integration step, units 1/w (default min(tau1, tau2)/100)"},
    {"t-final", "trajectory duration, units 1/w"},
    {"n-traj", "number of trajectories"},
    {"policy", "work extraction: per-step | terminal | none"},
    {"scheme", "work ledger: stratonovich | ito"},
    {"r0", "binary feedback threshold"},
    {"demon-kbtd", "demon memory temperature, units hbar w / k_B"},
    {"delta", "detector resolution for the memory entropy"},
    {"k", "classical trap stiffness"},
    {"kbt", "classical bath temperature, units of energy"},
    {"n-samples", "number of single-shot or classical cycles"},
    {"seed", "64-bit random seed"},
    {"output", "output directory"},
    {"threads", "worker threads (0: all cores)"},
};

const std::vector<std::string> kCommon = {"seed", "output", "threads"};
const std::vector<std::string> kContinuousKeys = {"nbar",   "tau",    "tau1", "tau2",       "dt",   "t-final",
                                                   "n-traj", "policy", "scheme", "demon-kbtd", "delta"};

std::vector<std::string> allowed_keys(Command command) {
  std::vector<std::string> keys;
  switch (command) {
  case Command::kSingleShot:
    keys = {"nbar", "n-samples"};
    break;
  case Command::kBinary:
    keys = {"nbar", "r0", "demon-kbtd", "n-samples"};
    break;
  case Command::kContinuous:
  case Command::kPreset:
    keys = kContinuousKeys;
    break;
  case Command::kClassical:
    keys = {"k", "kbt", "n-samples"};
    break;
  }
  keys.insert(keys.end(), kCommon.begin(), kCommon.end());
  return keys;
}

const char* help_for(const std::string& key) {
  for (const auto& spec : kKeys) {
    if (key == spec.name) {
      return spec.help;
    }
  }
  return "";
}

double parse_double(const std::string& key, const std::string& text) {
  double value = 0.0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw UsageError("--" + key + ": expected a number, got '" + text + "'");
  }
  return value;
}

std::uint64_t parse_unsigned(const std::string& key, const std::string& text) {
  std::uint64_t value = 0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw UsageError("--" + key + ": expected a non-negative integer, got '" + text + "'");
  }
  return value;
}

void apply(RunConfig& config, const std::string& key, const std::string& value, const std::string& source) {
  EngineConfig& e = config.engine;
  if (key == "nbar") {
    e.nbar = parse_double(key, value);
  } else if (key == "tau") {
    e.tau1 = e.tau2 = parse_double(key, value);
    config.sources["tau1"] = source;
    config.sources["tau2"] = source;
    return;
  } else if (key == "tau1") {
    e.tau1 = parse_double(key, value);
  } else if (key == "tau2") {
    e.tau2 = parse_double(key, value);
  } else if (key == "dt") {
    e.dt = parse_double(key, value);
  } else if (key == "t-final") {
    e.t_final = parse_double(key, value);
  } else if (key == "n-traj") {
    e.n_traj = static_cast<std::size_t>(parse_unsigned(key, value));
  } else if (key == "policy") {
    if (value == "per-step") {
      e.policy = Policy::kPerStep;
    } else if (value == "terminal") {
      e.policy = Policy::kTerminal;
    } else if (value == "none") {
      e.policy = Policy::kNone;
    } else {
      throw UsageError("--policy: expected per-step, terminal or none, got '" + value + "'");
    }
  } else if (key == "scheme") {
    if (value == "stratonovich") {
      e.scheme = Scheme::kStratonovich;
    } else if (value == "ito") {
      e.scheme = Scheme::kIto;
    } else {
      throw UsageError("--scheme: expected stratonovich or ito, got '" + value + "'");
    }
  } else if (key == "r0") {
    e.r0 = parse_double(key, value);
  } else if (key == "demon-kbtd") {
    e.demon_kbtd = parse_double(key, value);
  } else if (key == "delta") {
    e.delta = parse_double(key, value);
  } else if (key == "k") {
    config.classical.k = parse_double(key, value);
  } else if (key == "kbt") {
    config.classical.kbt = parse_double(key, value);
  } else if (key == "n-samples") {
    config.n_samples = static_cast<std::size_t>(parse_unsigned(key, value));
    config.classical.n_samples = config.n_samples;
  } else if (key == "seed") {
    e.seed = parse_unsigned(key, value);
  } else if (key == "output") {
    if (value.empty()) {
      throw UsageError("--output: must not be empty");
    }
    e.output_path = value;
  } else if (key == "threads") {
    const std::uint64_t n = parse_unsigned(key, value);
    if (n > 4096) {
      throw UsageError("--threads: at most 4096");
    }
    config.threads = static_cast<unsigned>(n);
  } else {
    throw UsageError("unknown key '" + key + "'");
  }
  config.sources[key] = source;
}

using Layer = std::map<std::string, std::string>;

void apply_layer(RunConfig& config, const Layer& layer, const std::string& source) {
  for (const auto& spec : kKeys) {
    const auto it = layer.find(spec.name);
    if (it != layer.end()) {
      apply(config, it->first, it->second, source);
    }
  }
}

Layer preset_layer(Preset preset) {
  switch (preset) {
  case Preset::kFigure2b:
    return {{"nbar", "0"}, {"tau", "1"}, {"t-final", "1"}, {"n-traj", "10000"}, {"policy", "terminal"}};
  case Preset::kFigure2c:
    return {{"nbar", "0"}, {"tau", "1"}, {"t-final", "5"}, {"n-traj", "10000"}, {"policy", "none"}};
  case Preset::kFigure2f:
    return {{"nbar", "1"}, {"tau", "1"}, {"t-final", "20"}, {"n-traj", "10000"}, {"policy", "per-step"}};
  case Preset::kFigureS2:
    return {};
  case Preset::kFigureS3:
    return {{"nbar", "0"}, {"tau", "1"}, {"t-final", "20"}, {"n-traj", "10000"}, {"policy", "per-step"}};
  }
  return {};
}

Layer file_layer(const std::string& path, const std::vector<std::string>& allowed) {
  std::ifstream in(path);
  if (!in) {
    throw UsageError("--config: cannot open '" + path + "'");
  }
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw UsageError("--config: '" + path + "' is not valid JSON: " + e.what());
  }
  if (!doc.is_object()) {
    throw UsageError("--config: '" + path + "' must hold a JSON object");
  }
  Layer layer;
  for (const auto& [key, value] : doc.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw UsageError("--config: unknown key '" + key + "' in '" + path + "'");
    }
    if (value.is_string()) {
      layer[key] = value.get<std::string>();
    } else if (value.is_number()) {
      layer[key] = value.dump();
    } else {
      throw UsageError("--config: key '" + key + "' must be a number or a string");
    }
  }
  return layer;
}

void validate(const RunConfig& config) {
  const auto require = [](bool ok, const std::string& what) {
    if (!ok) {
      throw UsageError(what);
    }
  };
  const EngineConfig& e = config.engine;
  switch (config.command) {
  case Command::kSingleShot:
  case Command::kBinary:
    require(std::isfinite(e.nbar) && e.nbar >= 0.0, "nbar must be finite and >= 0");
    require(std::isfinite(e.r0) && e.r0 > 0.0, "r0 must be finite and > 0");
    require(std::isfinite(e.demon_kbtd) && e.demon_kbtd >= 0.0, "demon-kbtd must be finite and >= 0");
    require(config.n_samples >= 100, "n-samples must be >= 100");
    break;
  case Command::kClassical:
    require(config.n_samples >= 100, "n-samples must be >= 100");
    try {
      config.classical.validate();
    } catch (const std::exception& ex) {
      throw UsageError(ex.what());
    }
    break;
  case Command::kContinuous:
  case Command::kPreset:
    try {
      e.validate();
    } catch (const std::exception& ex) {
      throw UsageError(ex.what());
    }
    break;
  }
}

} // namespace

std::optional<RunConfig> parse_config(const std::vector<std::string>& args, std::ostream& out) {
  CLI::App app{"Quantum measurement engine: single-shot, binary, continuous and classical experiments", "qme"};
  app.set_version_flag("--version", QME_VERSION);
  app.require_subcommand(1);

  struct Sub {
    Command command;
    CLI::App* app;
    std::map<std::string, std::string> values;
    std::map<std::string, CLI::Option*> options;
    std::string config_file;
  };
  std::vector<Sub> subs;
  subs.reserve(5);
  const std::pair<Command, const char*> commands[] = {
      {Command::kSingleShot, "Single-shot heterodyne measurement with full feedback"},
      {Command::kBinary, "Single-shot measurement with binary threshold feedback"},
      {Command::kContinuous, "Continuous position and momentum measurement with feedback"},
      {Command::kClassical, "Classical Brownian engine baseline"},
      {Command::kPreset, "Figure data sets: figure-2b | figure-2c | figure-2f | figure-S2 | figure-S3"},
  };
  std::string preset_name;
  for (const auto& [command, description] : commands) {
    Sub& sub = subs.emplace_back();
    sub.command = command;
    sub.app = app.add_subcommand(std::string(to_string(command)), description);
    if (command == Command::kPreset) {
      sub.app->add_option("name", preset_name, "preset name")
          ->required()
          ->check(CLI::IsMember({"figure-2b", "figure-2c", "figure-2f", "figure-S2", "figure-S3"}));
    }
    for (const auto& key : allowed_keys(command)) {
      sub.options[key] = sub.app->add_option("--" + key, sub.values[key], help_for(key))
                             ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    }
    sub.app->add_option("--config", sub.config_file, "JSON file of key/value defaults")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    const CLI::App* target = &app;
    for (const auto& sub : subs) {
      if (sub.app->parsed()) {
        target = sub.app;
      }
    }
    out << target->help();
    return std::nullopt;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return std::nullopt;
  } catch (const CLI::CallForVersion&) {
    out << QME_VERSION << '\n';
    return std::nullopt;
  } catch (const CLI::ParseError& e) {
    throw UsageError(std::string(e.what()) + " (run 'qme --help')");
  }

  const Sub* chosen = nullptr;
  for (const auto& sub : subs) {
    if (sub.app->parsed()) {
      chosen = &sub;
    }
  }
  if (chosen == nullptr) {
    throw UsageError("a subcommand is required (run 'qme --help')");
  }

  RunConfig config;
  config.command = chosen->command;
  config.argv = args;
  for (const auto& key : allowed_keys(config.command)) {
    if (key != "tau") {
      config.sources[key] = "default";
    }
  }
  config.classical.n_samples = config.n_samples;

  if (config.command == Command::kPreset) {
    const std::pair<const char*, Preset> names[] = {{"figure-2b", Preset::kFigure2b},
                                                    {"figure-2c", Preset::kFigure2c},
                                                    {"figure-2f", Preset::kFigure2f},
                                                    {"figure-S2", Preset::kFigureS2},
                                                    {"figure-S3", Preset::kFigureS3}};
    for (const auto& [name, preset] : names) {
      if (preset_name == name) {
        config.preset = preset;
      }
    }
    config.engine.output_path = "qme-" + preset_name;
    apply_layer(config, preset_layer(*config.preset), "preset");
  }
  if (!chosen->config_file.empty()) {
    config.config_file = chosen->config_file;
    apply_layer(config, file_layer(chosen->config_file, allowed_keys(config.command)), "file");
  }
  Layer flags;
  for (const auto& [key, option] : chosen->options) {
    if (option->count() > 0) {
      flags[key] = chosen->values.at(key);
    }
  }
  apply_layer(config, flags, "flag");
  validate(config);
  return config;
}

nlohmann::json config_to_json(const RunConfig& config) {
  nlohmann::json j;
  const EngineConfig& e = config.engine;
  j["command"] = std::string(to_string(config.command));
  if (config.preset) {
    j["preset"] = std::string(to_string(*config.preset));
  }
  switch (config.command) {
  case Command::kSingleShot:
    j["nbar"] = e.nbar;
    j["n-samples"] = config.n_samples;
    break;
  case Command::kBinary:
    j["nbar"] = e.nbar;
    j["r0"] = e.r0;
    j["demon-kbtd"] = e.demon_kbtd;
    j["n-samples"] = config.n_samples;
    break;
  case Command::kClassical:
    j["k"] = config.classical.k;
    j["kbt"] = config.classical.kbt;
    j["n-samples"] = config.n_samples;
    break;
  case Command::kContinuous:
  case Command::kPreset:
    j["nbar"] = e.nbar;
    j["tau1"] = e.tau1;
    j["tau2"] = e.tau2;
    j["dt"] = e.step();
    j["t-final"] = e.t_final;
    j["steps"] = e.steps();
    j["n-traj"] = e.n_traj;
    j["policy"] = std::string(to_string(e.policy));
    j["scheme"] = std::string(to_string(e.scheme));
    j["demon-kbtd"] = e.demon_kbtd;
    j["delta"] = e.delta;
    break;
  }
  j["seed"] = e.seed;
  j["output"] = e.output_path;
  j["threads"] = config.threads;
  if (!config.config_file.empty()) {
    j["config-file"] = config.config_file;
  }
  j["sources"] = config.sources;
  return j;
}

} // namespace qme::cli
