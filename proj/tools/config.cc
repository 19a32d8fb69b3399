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

// Config ingestion. Every field is read through FieldReader, which tracks
// the JSON path for diagnostics and rejects keys nobody asked for.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>

#include "cli.h"
#include "credlab/market_io.h"
#include "credlab/scoring.h"

namespace credlab::cli {
namespace {

using nlohmann::json;
using oversight::OversightGame;

[[noreturn]] void Fail(const std::string& path, const std::string& what) {
  throw ConfigError(path + ": " + what);
}

class FieldReader {
 public:
  FieldReader(const json& obj, std::string path)
      : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) Fail(path_, "expected a JSON object");
  }

  std::string Path(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  bool Has(const std::string& key) const { return obj_.contains(key); }

  const json& Raw(const std::string& key) {
    seen_.insert(key);
    return obj_.at(key);
  }

  double Number(const std::string& key, double fallback) {
    if (!Has(key)) return fallback;
    const json& v = Raw(key);
    if (!v.is_number()) Fail(Path(key), "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) Fail(Path(key), "must be finite");
    return d;
  }

  long long Integer(const std::string& key, long long fallback) {
    if (!Has(key)) return fallback;
    const json& v = Raw(key);
    if (!v.is_number_integer()) Fail(Path(key), "expected an integer");
    return v.get<long long>();
  }

  std::string String(const std::string& key, const std::string& fallback) {
    if (!Has(key)) return fallback;
    const json& v = Raw(key);
    if (!v.is_string()) Fail(Path(key), "expected a string");
    return v.get<std::string>();
  }

  std::vector<double> Numbers(const std::string& key,
                              std::vector<double> fallback) {
    if (!Has(key)) return fallback;
    const json& v = Raw(key);
    if (!v.is_array() || v.empty()) Fail(Path(key), "expected a non-empty array");
    std::vector<double> out;
    for (const json& e : v) {
      if (!e.is_number() || !std::isfinite(e.get<double>())) {
        Fail(Path(key), "entries must be finite numbers");
      }
      out.push_back(e.get<double>());
    }
    return out;
  }

  std::vector<long long> Integers(const std::string& key,
                                  std::vector<long long> fallback) {
    if (!Has(key)) return fallback;
    const json& v = Raw(key);
    if (!v.is_array() || v.empty()) Fail(Path(key), "expected a non-empty array");
    std::vector<long long> out;
    for (const json& e : v) {
      if (!e.is_number_integer()) Fail(Path(key), "entries must be integers");
      out.push_back(e.get<long long>());
    }
    return out;
  }

  std::optional<FieldReader> Object(const std::string& key) {
    if (!Has(key)) return std::nullopt;
    return FieldReader(Raw(key), Path(key));
  }

  // Rejects keys that were never read.
  void Finish() const {
    for (const auto& [key, value] : obj_.items()) {
      if (!seen_.count(key)) Fail(Path(key), "unknown field");
    }
  }

 private:
  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

void Require(bool ok, const std::string& path, const std::string& what) {
  if (!ok) Fail(path, what);
}

// Runs a library constructor and rethrows its complaint against `path`.
template <typename F>
auto Build(const std::string& path, F&& make) -> decltype(make()) {
  try {
    return make();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    Fail(path, e.what());
  }
}

scoring::Generator ParseGenerator(FieldReader r) {
  const std::string kind = r.String("kind", "brier");
  scoring::Generator gen = scoring::Generator::Brier();
  if (kind == "brier") {
    r.Finish();
    return gen;
  }
  if (kind != "power") Fail(r.Path("kind"), "expected \"brier\" or \"power\"");
  const double alpha = r.Number("alpha", 2.0);
  Require(alpha > 1.0, r.Path("alpha"), "must be > 1");
  if (r.Has("domain_lo") || r.Has("domain_hi")) {
    const double lo = r.Number("domain_lo", 0.0);
    const double hi = r.Number("domain_hi", 1.0);
    gen = Build(r.Path("domain_lo"),
                [&] { return scoring::Generator::Power(alpha, lo, hi); });
  } else {
    gen = Build(r.Path("alpha"), [&] { return scoring::Generator::Power(alpha); });
  }
  r.Finish();
  return gen;
}

oversight::TypeDistribution ParseTypes(FieldReader r) {
  const std::string kind = r.String("kind", "uniform");
  oversight::TypeDistribution dist = oversight::TypeDistribution::Uniform(0, 1);
  if (kind == "uniform") {
    const double lo = r.Number("lo", 0.0);
    const double hi = r.Number("hi", 1.0);
    dist = Build(r.Path("lo"),
                 [&] { return oversight::TypeDistribution::Uniform(lo, hi); });
  } else if (kind == "beta") {
    const double a = r.Number("a", 2.0);
    const double b = r.Number("b", 2.0);
    dist = Build(r.Path("a"),
                 [&] { return oversight::TypeDistribution::Beta(a, b); });
  } else {
    Fail(r.Path("kind"), "expected \"uniform\" or \"beta\"");
  }
  r.Finish();
  return dist;
}

OversightGame ParseGame(std::optional<FieldReader> reader,
                        OversightGame game = oversight::CanonicalGame()) {
  if (!reader) return game;
  FieldReader& r = *reader;
  if (auto g = r.Object("generator")) game.gen = ParseGenerator(*g);
  if (auto u = r.Object("principal")) {
    game.principal.u_s = u->Number("u_s", game.principal.u_s);
    game.principal.u_f = u->Number("u_f", game.principal.u_f);
    game.principal.u_d = u->Number("u_d", game.principal.u_d);
    u->Finish();
    Require(game.principal.u_s > game.principal.u_d &&
                game.principal.u_d > game.principal.u_f,
            r.Path("principal"), "needs u_s > u_d > u_f");
  }
  if (auto a = r.Object("agent")) {
    game.agent.beta = a->Number("beta", game.agent.beta);
    game.agent.gamma = a->Number("gamma", game.agent.gamma);
    Require(game.agent.beta > 0.0, a->Path("beta"), "must be > 0");
    Require(game.agent.gamma >= 0.0, a->Path("gamma"), "must be >= 0");
    a->Finish();
  }
  if (auto t = r.Object("types")) game.dist = ParseTypes(*t);
  r.Finish();
  Build(r.Path("types"), [&] {
    oversight::ValidateGame(game);
    return 0;
  });
  return game;
}

agent::ApprovalFunction ParseApproval(FieldReader r) {
  const std::string kind = r.String("kind", "");
  std::optional<agent::ApprovalFunction> q;
  if (kind == "affine") {
    const double a = r.Number("a", 0.0);
    const double b = r.Number("b", 1.0);
    q = Build(r.Path("a"), [&] { return agent::ApprovalFunction::Affine(a, b); });
  } else if (kind == "sigmoid") {
    const double r_min = r.Number("r_min", 0.5);
    const double tau = r.Number("tau", 0.1);
    q = Build(r.Path("tau"),
              [&] { return agent::ApprovalFunction::Sigmoid(r_min, tau); });
  } else if (kind == "step") {
    const double r0 = r.Number("r0", 0.5);
    q = Build(r.Path("r0"), [&] { return agent::ApprovalFunction::Step(r0); });
  } else if (kind == "tabulated") {
    std::vector<double> values = r.Numbers("values", {});
    q = Build(r.Path("values"), [&] {
      return agent::ApprovalFunction::Tabulated(std::move(values));
    });
  } else {
    Fail(r.Path("kind"),
         "expected one of \"affine\", \"sigmoid\", \"step\", \"tabulated\"");
  }
  r.Finish();
  return *q;
}

std::vector<double> PositiveList(FieldReader& r, const std::string& key,
                                 std::vector<double> fallback) {
  std::vector<double> v = r.Numbers(key, std::move(fallback));
  for (double x : v) Require(x > 0.0, r.Path(key), "entries must be > 0");
  return v;
}

GridAxis ParseAxis(std::optional<FieldReader> reader, GridAxis axis) {
  if (!reader) return axis;
  axis.lo = reader->Number("lo", axis.lo);
  axis.hi = reader->Number("hi", axis.hi);
  axis.points = static_cast<int>(reader->Integer("points", axis.points));
  Require(axis.points >= 1 && axis.points <= 1001, reader->Path("points"),
          "must lie in [1, 1001]");
  Require(axis.lo <= axis.hi, reader->Path("hi"), "must be >= lo");
  reader->Finish();
  return axis;
}

PerturbationParams ParsePerturbation(FieldReader& r) {
  PerturbationParams p;
  p.game = ParseGame(r.Object("game"));
  if (auto q = r.Object("approval")) p.q = ParseApproval(*q);
  Require(!p.q.is_step(), r.Path("approval"),
          "the first-order prediction needs a differentiable approval");
  p.type = r.Number("type", p.type);
  Require(p.game.gen.InDomain(p.type), r.Path("type"),
          "must lie in the generator domain");
  p.gammas = PositiveList(r, "gammas", p.gammas);
  Require(p.gammas.size() >= 2, r.Path("gammas"),
          "needs at least two values for an order estimate");
  for (std::size_t i = 1; i < p.gammas.size(); ++i) {
    Require(p.gammas[i] < p.gammas[i - 1], r.Path("gammas"),
            "must be strictly decreasing");
  }
  p.min_order = r.Number("min_order", p.min_order);
  return p;
}

StepFirstBestParams ParseStepFirstBest(FieldReader& r) {
  StepFirstBestParams p;
  p.game = ParseGame(r.Object("game"));
  Require(oversight::NonDegenerate(p.game), r.Path("game"),
          "degenerate regime: no step threshold fits in the report space");
  p.tolerance = r.Number("tolerance", p.tolerance);
  Require(p.tolerance > 0.0, r.Path("tolerance"), "must be > 0");
  return p;
}

AffineGapParams ParseAffineGap(FieldReader& r) {
  AffineGapParams p;
  p.game = ParseGame(r.Object("game"));
  p.a = ParseAxis(r.Object("a"), p.a);
  p.b = ParseAxis(r.Object("b"), p.b);
  return p;
}

WelfareSweepParams ParseWelfareSweep(FieldReader& r) {
  WelfareSweepParams p;
  OversightGame base = oversight::CanonicalGame();
  base.gen = scoring::Generator::Power(2.0, scoring::kPowerDomainLo,
                                       scoring::kPowerDomainHi);
  base.dist = oversight::TypeDistribution::Uniform(scoring::kPowerDomainLo,
                                                   scoring::kPowerDomainHi);
  p.game = ParseGame(r.Object("game"), base);
  p.alphas = r.Numbers("alphas", p.alphas);
  for (double a : p.alphas) {
    Require(a > 1.0, r.Path("alphas"), "entries must be > 1");
    if (a < 2.0) {
      Require(p.game.gen.domain_lo() > 0.0, r.Path("alphas"),
              "exponents below 2 need a domain bounded away from 0");
    }
  }
  p.gammas = PositiveList(r, "gammas", p.gammas);
  p.tau_min = r.Number("tau_min", p.tau_min);
  Require(p.tau_min > 0.0, r.Path("tau_min"), "must be > 0");
  if (auto s = r.Object("search")) {
    p.search.r_min_lo = s->Number("r_min_lo", p.search.r_min_lo);
    p.search.r_min_hi = s->Number("r_min_hi", p.search.r_min_hi);
    p.search.r_min_points =
        static_cast<int>(s->Integer("r_min_points", p.search.r_min_points));
    p.search.tau_multiples = s->Numbers("tau_multiples", p.search.tau_multiples);
    if (s->Has("refine")) {
      const json& v = s->Raw("refine");
      Require(v.is_boolean(), s->Path("refine"), "expected a boolean");
      p.search.refine = v.get<bool>();
    }
    Require(p.search.r_min_points >= 1 && p.search.r_min_points <= 1001,
            s->Path("r_min_points"), "must lie in [1, 1001]");
    Require(0.0 <= p.search.r_min_lo && p.search.r_min_lo <= p.search.r_min_hi &&
                p.search.r_min_hi <= 1.0,
            s->Path("r_min_lo"), "need 0 <= r_min_lo <= r_min_hi <= 1");
    for (double m : p.search.tau_multiples) {
      Require(m >= 1.0, s->Path("tau_multiples"), "entries must be >= 1");
    }
    s->Finish();
  }
  p.brier_gap_max = r.Number("brier_gap_max", p.brier_gap_max);
  p.scaling_lo = r.Number("scaling_lo", p.scaling_lo);
  p.scaling_hi = r.Number("scaling_hi", p.scaling_hi);
  return p;
}

MarketParams ParseMarket(FieldReader& r) {
  MarketParams p;
  if (r.Has("instance")) {
    const json& doc = r.Raw("instance");
    p.instance = Build(r.Path("instance"),
                       [&] { return market::ParseMarketInstance(doc); });
  }
  p.gammas = r.Numbers("gammas", p.gammas);
  for (double g : p.gammas) {
    Require(g >= 0.0, r.Path("gammas"), "entries must be >= 0");
  }
  if (auto c = r.Object("compliance")) {
    const std::string kind = c->String("kind", "quadratic");
    if (kind == "bregman_power") {
      const double alpha = c->Number("alpha", 3.0);
      const scoring::Generator gen = Build(
          c->Path("alpha"), [&] { return scoring::Generator::Power(alpha); });
      for (double b : p.instance.bids) {
        Require(gen.InDomain(b), c->Path("alpha"),
                "bids must lie in the generator domain");
      }
      p.compliance = market::BregmanCompliance{gen};
    } else {
      Require(kind == "quadratic", c->Path("kind"),
              "expected \"quadratic\" or \"bregman_power\"");
    }
    c->Finish();
  }
  p.min_order = r.Number("min_order", p.min_order);
  return p;
}

DetectionParams ParseDetection(FieldReader& r) {
  DetectionParams p;
  p.delta = r.Number("delta", p.delta);
  Require(p.delta > 0.0 && p.delta < 1.0, r.Path("delta"),
          "must lie in (0, 1)");
  p.alpha = r.Number("alpha", p.alpha);
  Require(p.alpha > 0.0 && p.alpha < 1.0, r.Path("alpha"),
          "must lie in (0, 1)");
  p.p_true = r.Number("p_true", p.p_true);
  Require(p.p_true >= 0.0 && p.p_true + p.delta <= 1.0, r.Path("p_true"),
          "needs 0 <= p_true and p_true + delta <= 1");
  p.horizons = r.Integers("horizons", p.horizons);
  for (long long h : p.horizons) {
    Require(h >= 1 && h <= 10000000, r.Path("horizons"),
            "entries must lie in [1, 1e7]");
  }
  p.trials = r.Integer("trials", p.trials);
  Require(p.trials >= 1 && p.trials <= 10000000, r.Path("trials"),
          "must lie in [1, 1e7]");
  p.sigma = r.Number("sigma", p.sigma);
  Require(p.sigma > 0.0, r.Path("sigma"), "must be > 0");
  std::vector<long long> reporters(p.reporters.begin(), p.reporters.end());
  reporters = r.Integers("reporters", reporters);
  p.reporters.clear();
  for (long long n : reporters) {
    Require(n >= 2 && n <= 100000, r.Path("reporters"),
            "entries must lie in [2, 1e5]");
    p.reporters.push_back(static_cast<int>(n));
  }
  p.competition_trials = r.Integer("competition_trials", p.competition_trials);
  Require(p.competition_trials >= 1 && p.competition_trials <= 10000000,
          r.Path("competition_trials"), "must lie in [1, 1e7]");
  p.competition_tolerance =
      r.Number("competition_tolerance", p.competition_tolerance);
  Require(p.competition_tolerance > 0.0, r.Path("competition_tolerance"),
          "must be > 0");
  return p;
}

RegulationParams ParseRegulation(FieldReader& r) {
  RegulationParams p;
  p.game = ParseGame(r.Object("game"));
  if (auto q = r.Object("approval")) p.q_organic = ParseApproval(*q);
  p.costs = r.Numbers("costs", p.costs);
  for (double c : p.costs) {
    Require(c >= 0.0, r.Path("costs"), "entries must be >= 0");
  }
  return p;
}

StaticsParams ParseStatics(FieldReader& r) {
  StaticsParams p;
  p.game = ParseGame(r.Object("game"));
  Require(oversight::NonDegenerate(p.game), r.Path("game"),
          "degenerate regime: no step threshold fits in the report space");
  p.delta = r.Number("delta", p.delta);
  Require(p.delta > 0.0 && p.delta <= 1.0, r.Path("delta"),
          "must lie in (0, 1]");
  p.alpha = r.Number("alpha", p.alpha);
  Require(p.alpha > 0.0 && p.alpha < 1.0, r.Path("alpha"),
          "must lie in (0, 1)");
  return p;
}

ExperimentParams ParseParams(const std::string& experiment, FieldReader& r) {
  if (experiment == "perturbation_check") return ParsePerturbation(r);
  if (experiment == "step_first_best") return ParseStepFirstBest(r);
  if (experiment == "affine_gap") return ParseAffineGap(r);
  if (experiment == "welfare_gap_sweep") return ParseWelfareSweep(r);
  if (experiment == "market_inflation") return ParseMarket(r);
  if (experiment == "detection_curves") return ParseDetection(r);
  if (experiment == "regulation") return ParseRegulation(r);
  return ParseStatics(r);
}

std::string ValidNames() {
  std::string names;
  for (std::string_view n : kExperimentNames) {
    if (!names.empty()) names += ", ";
    names += n;
  }
  return names;
}

}  // namespace

ExperimentConfig ParseConfig(const json& doc) {
  FieldReader top(doc, "");
  ExperimentConfig config;
  config.config_hash = Fnv1a(doc.dump());

  if (!top.Has("experiment")) Fail("experiment", "missing field");
  config.experiment = top.String("experiment", "");
  bool known = false;
  for (std::string_view n : kExperimentNames) known = known || n == config.experiment;
  if (!known) {
    Fail("experiment", "unknown experiment \"" + config.experiment +
                           "\"; valid names: " + ValidNames());
  }

  const std::string out = top.String("output_path", "results");
  Require(!out.empty(), "output_path", "must not be empty");
  config.output_path = std::filesystem::path(out);

  static const json kEmpty = json::object();
  const json& params = top.Has("parameters") ? top.Raw("parameters") : kEmpty;
  FieldReader reader(params, "parameters");
  if (reader.Has("seed")) {
    const json& s = reader.Raw("seed");
    Require(s.is_number_unsigned() ||
                (s.is_number_integer() && s.get<long long>() >= 0),
            "parameters.seed", "expected a non-negative integer");
    config.seed = s.get<std::uint64_t>();
  }
  config.params = ParseParams(config.experiment, reader);
  reader.Finish();
  top.Finish();
  return config;
}

ExperimentConfig LoadConfig(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path.string() + ": cannot open config file");
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    // Turn the byte offset into a line number for the diagnostic.
    const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
    const long line =
        1 + std::count(text.begin(), text.begin() + upto, '\n');
    std::ostringstream msg;
    msg << path.string() << ":" << line << ": invalid JSON (" << e.what()
        << ")";
    throw ConfigError(msg.str());
  }
  return ParseConfig(doc);
}

}  // namespace credlab::cli
