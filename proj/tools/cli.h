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

// Experiment runner behind the `credlab` command line tool. A JSON config
// names one experiment and its parameters; running it writes a single CSV
// under the output directory and prints one PASS/FAIL line per check.
//
// Exit codes: 0 success, 1 a check failed, 2 invalid config, 3 numeric
// failure.

#ifndef CREDLAB_TOOLS_CLI_H_
#define CREDLAB_TOOLS_CLI_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "credlab/agent.h"
#include "credlab/errors.h"
#include "credlab/market.h"
#include "credlab/oversight.h"
#include "json.hpp"

namespace credlab::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitCheckFailed = 1,
  kExitBadConfig = 2,
  kExitNumericFailure = 3,
};

inline constexpr std::array<std::string_view, 8> kExperimentNames = {
    "perturbation_check", "step_first_best", "affine_gap",
    "welfare_gap_sweep",  "market_inflation", "detection_curves",
    "regulation",         "statics"};

inline constexpr std::uint64_t kDefaultSeed = 0x5eed;

// Raised for anything wrong with a config: syntax, unknown fields, values
// out of range. The message names the offending field.
class ConfigError : public Error {
 public:
  using Error::Error;
};

struct PerturbationParams {
  oversight::OversightGame game;
  agent::ApprovalFunction q = agent::ApprovalFunction::Sigmoid(0.5, 0.1);
  double type = 0.45;
  std::vector<double> gammas = {1e-2, 5e-3, 2.5e-3};
  double min_order = 1.8;
};

struct StepFirstBestParams {
  oversight::OversightGame game;
  double tolerance = 1e-6;
};

struct GridAxis {
  double lo;
  double hi;
  int points;
};

struct AffineGapParams {
  oversight::OversightGame game;
  GridAxis a{-1.0, 1.0, 21};
  GridAxis b{-2.0, 2.0, 21};
};

struct WelfareSweepParams {
  // Supplies everything but the exponent; its generator fixes the domain.
  oversight::OversightGame game;
  std::vector<double> alphas = {2.0, 2.25, 2.5, 3.0};
  std::vector<double> gammas = {0.04, 0.08};
  double tau_min = 1e-3;
  oversight::SigmoidSearch search;
  double brier_gap_max = 1e-3;
  double scaling_lo = 3.0;
  double scaling_hi = 5.0;
};

struct MarketParams {
  // Two agents with nu({1}) = nu({2}) = 1 and nu({1, 2}) = 1.5.
  market::MarketInstance instance{
      market::SubmodularCapacity(2, {0.0, 1.0, 1.0, 1.5}), {0.9, 0.4}, 1.0,
      0.1};
  std::vector<double> gammas = {0.1, 0.05, 0.025};
  market::ComplianceScore compliance;
  double min_order = 1.8;
};

struct DetectionParams {
  double delta = 0.1;
  double alpha = 0.05;
  double p_true = 0.5;
  std::vector<long long> horizons = {10, 50, 100, 200, 400};
  long long trials = 10000;
  double sigma = 1.0;
  std::vector<int> reporters = {2, 4, 8, 16};
  long long competition_trials = 100000;
  double competition_tolerance = 0.02;
};

struct RegulationParams {
  oversight::OversightGame game;
  agent::ApprovalFunction q_organic = agent::ApprovalFunction::Affine(1.0, 0.0);
  std::vector<double> costs = {0.0, 0.1, 0.2, 0.3};
};

struct StaticsParams {
  oversight::OversightGame game;
  double delta = 0.1;
  double alpha = 0.05;
};

using ExperimentParams =
    std::variant<PerturbationParams, StepFirstBestParams, AffineGapParams,
                 WelfareSweepParams, MarketParams, DetectionParams,
                 RegulationParams, StaticsParams>;

struct ExperimentConfig {
  std::string experiment;
  ExperimentParams params;
  std::filesystem::path output_path;
  std::uint64_t seed = kDefaultSeed;
  // FNV-1a of the canonical JSON serialization of the config.
  std::uint64_t config_hash = 0;
};

// Validates a parsed document. Throws ConfigError naming the bad field.
// Relative output paths are taken relative to the working directory.
ExperimentConfig ParseConfig(const nlohmann::json& doc);

// Reads and validates a config file. Syntax errors report the line.
ExperimentConfig LoadConfig(const std::filesystem::path& path);

struct Check {
  std::string name;
  bool pass;
  std::string detail;
};

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

struct Outcome {
  Table table;
  std::vector<Check> checks;
};

// Runs the computation. Numeric failures surface as credlab::Error.
Outcome Execute(const ExperimentConfig& config);

// Path of the CSV an experiment writes.
std::filesystem::path CsvPath(const ExperimentConfig& config);

// Executes, writes the CSV, prints the check lines to `out` and returns an
// ExitCode.
int Run(const ExperimentConfig& config, std::ostream& out, std::ostream& err);

// Command line entry point: credlab <experiment> --config <path>
// [--out <dir>] [--seed <u64>].
int Main(int argc, const char* const* argv, std::ostream& out,
         std::ostream& err);

std::uint64_t Fnv1a(std::string_view bytes);

// Shortest round-trip decimal form used for CSV cells.
std::string FormatNumber(double value);

}  // namespace credlab::cli

#endif  // CREDLAB_TOOLS_CLI_H_
