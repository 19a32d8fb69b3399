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

#include "cli.h"

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "gtest/gtest.h"
#include "json.hpp"

namespace credlab::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("credlab_cli_test_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path WriteText(const std::string& text,
                     const std::string& name = "config.json") {
    const fs::path path = dir_ / name;
    std::ofstream(path) << text;
    return path;
  }

  fs::path WriteConfig(const json& doc,
                       const std::string& name = "config.json") {
    return WriteText(doc.dump(2), name);
  }

  int Invoke(std::vector<std::string> args) {
    args.insert(args.begin(), "credlab");
    std::vector<const char*> argv;
    for (const std::string& a : args) argv.push_back(a.c_str());
    out_.str("");
    err_.str("");
    return Main(static_cast<int>(argv.size()), argv.data(), out_, err_);
  }

  static std::string Slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
  }

  json StepConfig() const {
    return {{"experiment", "step_first_best"},
            {"parameters", json::object()},
            {"output_path", (dir_ / "out").string()}};
  }

  fs::path dir_;
  std::ostringstream out_;
  std::ostringstream err_;
};

TEST_F(CliTest, MinimalConfigParses) {
  const ExperimentConfig config = LoadConfig(WriteConfig(StepConfig()));
  EXPECT_EQ(config.experiment, "step_first_best");
  EXPECT_EQ(config.seed, kDefaultSeed);
  EXPECT_TRUE(std::holds_alternative<StepFirstBestParams>(config.params));
}

TEST_F(CliTest, NegativeGammaNamesTheField) {
  json doc = StepConfig();
  doc["parameters"]["game"]["agent"]["gamma"] = -0.1;
  try {
    LoadConfig(WriteConfig(doc));
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("parameters.game.agent.gamma"),
              std::string::npos)
        << e.what();
  }
}

TEST_F(CliTest, UnknownExperimentListsValidNames) {
  json doc = StepConfig();
  doc["experiment"] = "teleport";
  try {
    LoadConfig(WriteConfig(doc));
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    for (std::string_view name : kExperimentNames) {
      EXPECT_NE(std::string(e.what()).find(name), std::string::npos);
    }
  }
}

TEST_F(CliTest, UnknownFieldsRejected) {
  json doc = StepConfig();
  doc["parameters"]["game"]["agent"]["gama"] = 0.1;
  EXPECT_THROW(LoadConfig(WriteConfig(doc)), ConfigError);
  doc = StepConfig();
  doc["colour"] = "blue";
  EXPECT_THROW(LoadConfig(WriteConfig(doc)), ConfigError);
}

TEST_F(CliTest, SyntaxErrorReportsLine) {
  const fs::path path =
      WriteText("{\n  \"experiment\": \"statics\",\n  \"parameters\": {,}\n}");
  try {
    LoadConfig(path);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find(":3:"), std::string::npos) << e.what();
  }
}

TEST_F(CliTest, DegenerateStepGameRejected) {
  json doc = StepConfig();
  doc["parameters"]["game"]["agent"]["gamma"] = 0.3;
  EXPECT_EQ(Invoke({"step_first_best", "--config",
                    WriteConfig(doc).string()}),
            kExitBadConfig);
}

TEST_F(CliTest, StepFirstBestCanonical) {
  const fs::path config = WriteConfig(StepConfig());
  ASSERT_EQ(Invoke({"step_first_best", "--config", config.string()}), kExitOk)
      << err_.str();
  EXPECT_NE(out_.str().find("PASS step_first_best/step_first_best"),
            std::string::npos);
  const std::string csv = Slurp(dir_ / "out" / "step_first_best.csv");
  EXPECT_EQ(csv.rfind("# credlab experiment=step_first_best config_hash=", 0),
            0u);
  std::istringstream lines(csv);
  std::string provenance, header, row;
  std::getline(lines, provenance);
  std::getline(lines, header);
  std::getline(lines, row);
  EXPECT_EQ(header,
            "generator,p_min,r0,threshold_type,utility,first_best,abs_diff");
  std::istringstream fields(row);
  std::string generator;
  std::getline(fields, generator, ',');
  EXPECT_EQ(generator, "brier");
  const std::vector<double> expected = {0.5, 0.7, 0.5, 0.25, 0.25, 0.0};
  for (double want : expected) {
    std::string cell;
    ASSERT_TRUE(std::getline(fields, cell, ',')) << row;
    EXPECT_NEAR(std::stod(cell), want, 1e-12) << row;
  }
}

TEST_F(CliTest, OutputIsByteIdenticalAcrossRuns) {
  json doc = {{"experiment", "detection_curves"},
              {"parameters",
               {{"horizons", {10, 100}},
                {"trials", 2000},
                {"reporters", {2, 4}},
                {"competition_trials", 5000}}}};
  const fs::path config = WriteConfig(doc);
  ASSERT_EQ(Invoke({"detection_curves", "--config", config.string(), "--out",
                    (dir_ / "a").string()}),
            kExitOk)
      << out_.str() << err_.str();
  ASSERT_EQ(Invoke({"detection_curves", "--config", config.string(), "--out",
                    (dir_ / "b").string()}),
            kExitOk);
  const std::string a = Slurp(dir_ / "a" / "detection_curves.csv");
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, Slurp(dir_ / "b" / "detection_curves.csv"));
}

TEST_F(CliTest, SeedOverrideChangesProvenanceAndDraws) {
  json doc = {{"experiment", "detection_curves"},
              {"parameters",
               {{"horizons", {10}},
                {"trials", 2000},
                {"reporters", {2, 4}},
                {"competition_trials", 5000},
                {"seed", 7}}}};
  const fs::path config = WriteConfig(doc);
  Invoke({"detection_curves", "--config", config.string(), "--out",
          (dir_ / "a").string()});
  Invoke({"detection_curves", "--config", config.string(), "--out",
          (dir_ / "b").string(), "--seed", "8"});
  const std::string a = Slurp(dir_ / "a" / "detection_curves.csv");
  const std::string b = Slurp(dir_ / "b" / "detection_curves.csv");
  EXPECT_NE(a.find("seed=7\n"), std::string::npos);
  EXPECT_NE(b.find("seed=8\n"), std::string::npos);
  EXPECT_NE(a, b);
}

TEST_F(CliTest, WritesOnlyIntoOutputPath) {
  const fs::path config = WriteConfig(StepConfig());
  ASSERT_EQ(Invoke({"step_first_best", "--config", config.string()}), kExitOk);
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(dir_)) {
    if (entry.is_regular_file()) files.push_back(entry.path());
  }
  EXPECT_EQ(files.size(), 2u);  // the config and the CSV
}

TEST_F(CliTest, PerturbationCheckOrder) {
  json doc = {{"experiment", "perturbation_check"},
              {"output_path", (dir_ / "out").string()}};
  ASSERT_EQ(Invoke({"perturbation_check", "--config",
                    WriteConfig(doc).string()}),
            kExitOk)
      << out_.str();
  std::istringstream csv(Slurp(dir_ / "out" / "perturbation_check.csv"));
  std::string line;
  std::getline(csv, line);  // provenance
  std::getline(csv, line);  // header
  int rows = 0;
  while (std::getline(csv, line)) {
    ++rows;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    ASSERT_GE(cells.size(), 5u);
    if (rows > 1) {
      EXPECT_GE(std::stod(cells[4]), 1.8) << line;
    }
  }
  EXPECT_EQ(rows, 3);
}

TEST_F(CliTest, DetectionCurvesAtTheBound) {
  json doc = {{"experiment", "detection_curves"},
              {"output_path", (dir_ / "out").string()},
              {"parameters", {{"competition_trials", 20000}}}};
  ASSERT_EQ(Invoke({"detection_curves", "--config",
                    WriteConfig(doc).string()}),
            kExitOk)
      << out_.str();
  const std::string csv = Slurp(dir_ / "out" / "detection_curves.csv");
  const std::size_t at = csv.find("single_reporter,738,");
  ASSERT_NE(at, std::string::npos);
  const double rate = std::stod(csv.substr(at + 20));
  EXPECT_GE(rate, 0.95);
}

TEST_F(CliTest, FailedCheckExitsOne) {
  json doc = {{"experiment", "perturbation_check"},
              {"output_path", (dir_ / "out").string()},
              {"parameters", {{"min_order", 10.0}}}};
  EXPECT_EQ(Invoke({"perturbation_check", "--config",
                    WriteConfig(doc).string()}),
            kExitCheckFailed);
  EXPECT_NE(out_.str().find("FAIL perturbation_check/perturbation_order"),
            std::string::npos);
}

TEST_F(CliTest, NumericFailureExitsThree) {
  // A U-shaped Beta density is unbounded at both ends; the welfare
  // quadrature cannot converge.
  json doc = {{"experiment", "regulation"},
              {"output_path", (dir_ / "out").string()},
              {"parameters",
               {{"game", {{"types", {{"kind", "beta"}, {"a", 0.3}, {"b", 0.3}}}}}}}};
  EXPECT_EQ(Invoke({"regulation", "--config", WriteConfig(doc).string()}),
            kExitNumericFailure)
      << out_.str() << err_.str();
}

TEST_F(CliTest, CommandLineErrorsExitTwo) {
  const fs::path config = WriteConfig(StepConfig());
  EXPECT_EQ(Invoke({"step_first_best"}), kExitBadConfig);
  EXPECT_EQ(Invoke({"statics", "--config", config.string()}), kExitBadConfig);
  EXPECT_EQ(Invoke({"warp", "--config", config.string()}), kExitBadConfig);
  EXPECT_EQ(Invoke({"step_first_best", "--config",
                    (dir_ / "missing.json").string()}),
            kExitBadConfig);
  EXPECT_EQ(Invoke({"step_first_best", "--config", config.string(), "--seed",
                    "-4"}),
            kExitBadConfig);
}

TEST_F(CliTest, EveryExperimentRunsOnSmallInputs) {
  const std::vector<json> configs = {
      {{"experiment", "affine_gap"},
       {"parameters", {{"a", {{"points", 3}}}, {"b", {{"points", 3}}}}}},
      {{"experiment", "welfare_gap_sweep"},
       {"parameters",
        {{"alphas", {2.0, 3.0}},
         {"gammas", {0.04}},
         {"tau_min", 0.05},
         {"search", {{"r_min_points", 5}, {"refine", false}}}}}},
      {{"experiment", "market_inflation"},
       {"parameters",
        {{"compliance", {{"kind", "bregman_power"}, {"alpha", 3}}}}}},
      {{"experiment", "regulation"}, {"parameters", {{"costs", {0.1, 0.3}}}}},
      {{"experiment", "statics"},
       {"parameters", {{"game", {{"principal", {{"u_d", 0.2}}}}}}}}};
  for (json doc : configs) {
    doc["output_path"] = (dir_ / "out").string();
    const std::string name = doc["experiment"];
    const int code =
        Invoke({name, "--config", WriteConfig(doc, name + ".json").string()});
    EXPECT_TRUE(code == kExitOk || code == kExitCheckFailed)
        << name << ": " << err_.str();
    EXPECT_TRUE(fs::exists(dir_ / "out" / (name + ".csv"))) << name;
    EXPECT_EQ(out_.str().find("numeric failure"), std::string::npos);
  }
}

TEST(FormatTest, NumbersRoundTrip) {
  for (double v : {0.25, 0.1, 1.0 / 3.0, 1e-300, -2.5e12}) {
    EXPECT_EQ(std::stod(FormatNumber(v)), v);
  }
  EXPECT_EQ(FormatNumber(0.7), "0.7");
}

TEST(HashTest, Fnv1aKnownValues) {
  EXPECT_EQ(Fnv1a(""), 0xcbf29ce484222325ull);
  EXPECT_EQ(Fnv1a("a"), 0xaf63dc4c8601ec8cull);
}

}  // namespace
}  // namespace credlab::cli
