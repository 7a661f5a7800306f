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

#include <array>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <system_error>

#include <openssl/evp.h>

#include "qme/cli.hpp"

namespace qme::cli {

std::string format_double(double value) {
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value, std::chars_format::general, 17);
  if (ec != std::errc()) {
    throw std::runtime_error("format_double: buffer too small");
  }
  return std::string(buf.data(), ptr);
}

void CsvWriter::comment(std::string_view line) {
  out_ += "# ";
  out_ += line;
  out_ += '\n';
}

void CsvWriter::header(const std::vector<std::string>& columns) {
  columns_ = columns.size();
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (i > 0) {
      out_ += ',';
    }
    out_ += columns[i];
  }
  out_ += '\n';
}

void CsvWriter::row(const std::vector<double>& values) {
  if (values.size() != columns_) {
    throw std::logic_error("CsvWriter: row width does not match the header");
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) {
      out_ += ',';
    }
    out_ += format_double(values[i]);
  }
  out_ += '\n';
}

std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int length = 0;
  if (EVP_Digest(data.data(), data.size(), digest.data(), &length, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256: digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  hex.reserve(2 * length);
  for (unsigned int i = 0; i < length; ++i) {
    hex += kHex[digest[i] >> 4];
    hex += kHex[digest[i] & 0xf];
  }
  return hex;
}

bool ExperimentResult::all_passed() const {
  for (const auto& [name, ok] : checks) {
    if (!ok) {
      return false;
    }
  }
  return true;
}

namespace {

namespace fs = std::filesystem;

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  }
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.close();
  if (!out) {
    throw std::runtime_error("write to '" + path.string() + "' failed");
  }
}

} // namespace

void write_outputs(const RunConfig& config, ExperimentResult& result, double wall_clock_seconds) {
  const fs::path dir(config.engine.output_path);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw std::runtime_error("cannot create output directory '" + dir.string() + "': " + ec.message());
  }

  result.summary["checks"] = result.checks;
  result.summary["all_passed"] = result.all_passed();
  std::vector<Artifact> files = result.files;
  files.push_back({"summary.json", result.summary.dump(2) + "\n"});

  nlohmann::json manifest;
  manifest["tool"] = "qme";
  manifest["version"] = QME_VERSION;
  manifest["argv"] = config.argv;
  manifest["config"] = config_to_json(config);
  manifest["wall_clock_seconds"] = wall_clock_seconds;
  nlohmann::json listing = nlohmann::json::array();
  for (const auto& file : files) {
    listing.push_back({{"name", file.name}, {"bytes", file.content.size()}, {"sha256", sha256_hex(file.content)}});
  }
  manifest["files"] = listing;
  files.push_back({"manifest.json", manifest.dump(2) + "\n"});

  std::vector<fs::path> staged;
  std::vector<fs::path> placed;
  try {
    for (const auto& file : files) {
      const fs::path tmp = dir / ("." + file.name + ".partial");
      staged.push_back(tmp);
      write_file(tmp, file.content);
    }
    for (std::size_t i = 0; i < files.size(); ++i) {
      const fs::path target = dir / files[i].name;
      fs::rename(staged[i], target);
      placed.push_back(target);
    }
  } catch (...) {
    for (const auto& p : staged) {
      fs::remove(p, ec);
    }
    for (const auto& p : placed) {
      fs::remove(p, ec);
    }
    throw;
  }
}

} // namespace qme::cli
