// Copyright 2026 The Credlab Authors
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

#include <charconv>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <system_error>

#include "CLI11.hpp"
#include "cli.h"

namespace credlab::cli {
namespace {

std::string CsvCell(const std::string& cell) {
  if (cell.find_first_of(",\"\n") == std::string::npos) return cell;
  std::string quoted = "\"";
  for (char c : cell) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  return quoted + "\"";
}

void WriteRow(std::ostream& out, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out << ',';
    out << CsvCell(cells[i]);
  }
  out << '\n';
}

std::string Hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

std::uint64_t Fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string FormatNumber(double value) {
  char buf[64];
  const auto result = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, result.ptr);
}

std::filesystem::path CsvPath(const ExperimentConfig& config) {
  return config.output_path / (config.experiment + ".csv");
}

int Run(const ExperimentConfig& config, std::ostream& out, std::ostream& err) {
  Outcome outcome;
  try {
    outcome = Execute(config);
  } catch (const Error& e) {
    err << "credlab: numeric failure in " << config.experiment << ": "
        << e.what() << "\n";
    return kExitNumericFailure;
  }

  // Assemble in memory so a failed write never leaves a partial file.
  std::ostringstream csv;
  csv << "# credlab experiment=" << config.experiment
      << " config_hash=" << Hex(config.config_hash) << " seed=" << config.seed
      << "\n";
  WriteRow(csv, outcome.table.columns);
  for (const auto& row : outcome.table.rows) WriteRow(csv, row);

  const std::filesystem::path path = CsvPath(config);
  std::error_code ec;
  std::filesystem::create_directories(config.output_path, ec);
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (ec || !(file << csv.str()) || !file.flush()) {
    err << "credlab: cannot write " << path.string() << "\n";
    return kExitBadConfig;
  }

  bool all_pass = true;
  for (const Check& check : outcome.checks) {
    out << (check.pass ? "PASS " : "FAIL ") << config.experiment << "/"
        << check.name << ": " << check.detail << "\n";
    all_pass = all_pass && check.pass;
  }
  out << "wrote " << path.string() << "\n";
  return all_pass ? kExitOk : kExitCheckFailed;
}

int Main(int argc, const char* const* argv, std::ostream& out,
         std::ostream& err) {
  CLI::App app{"Strategic reporting laboratory: runs one experiment from a "
               "JSON config and writes a CSV."};
  std::string experiment;
  std::string config_path;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  app.add_option("experiment", experiment, "Experiment name")->required();
  app.add_option("--config", config_path, "Path to the JSON config")
      ->required();
  app.add_option("--out", out_dir, "Output directory (overrides output_path)");
  app.add_option("--seed", seed, "Master seed (overrides parameters.seed)");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "credlab: " << e.what() << "\n";
    return kExitBadConfig;
  }

  bool known = false;
  for (std::string_view n : kExperimentNames) known = known || n == experiment;
  if (!known) {
    err << "credlab: unknown experiment \"" << experiment
        << "\"; valid names:";
    for (std::string_view n : kExperimentNames) err << " " << n;
    err << "\n";
    return kExitBadConfig;
  }

  ExperimentConfig config;
  try {
    config = LoadConfig(config_path);
  } catch (const ConfigError& e) {
    err << "credlab: invalid config: " << e.what() << "\n";
    return kExitBadConfig;
  }
  if (config.experiment != experiment) {
    err << "credlab: config is for \"" << config.experiment
        << "\" but the command line asked for \"" << experiment << "\"\n";
    return kExitBadConfig;
  }
  if (out_dir) config.output_path = *out_dir;
  if (seed) config.seed = *seed;
  return Run(config, out, err);
}

}  // namespace credlab::cli
