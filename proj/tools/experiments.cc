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

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "cli.h"
#include "credlab/agent.h"
#include "credlab/detection.h"
#include "credlab/market.h"
#include "credlab/oversight.h"
#include "credlab/parallel.h"
#include "credlab/scoring.h"

namespace credlab::cli {
namespace {

using agent::ApprovalFunction;
using oversight::OversightGame;

// Errors at or below this are treated as exact when estimating orders.
constexpr double kExactError = 1e-12;

std::string Num(double v) { return FormatNumber(v); }

std::string Describe(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

// log(e0 / e1) / log(g0 / g1), or +inf when both errors are exact.
double EmpiricalOrder(double e0, double e1, double g0, double g1) {
  if (e0 <= kExactError && e1 <= kExactError) return INFINITY;
  return std::log(e0 / e1) / std::log(g0 / g1);
}

Outcome Perturbation(const PerturbationParams& p) {
  Outcome out;
  out.table.columns = {"gamma",     "best_response",   "first_order_prediction",
                       "abs_error", "order",           "scoring_loss",
                       "predicted_scoring_loss"};
  std::vector<double> errors;
  double worst_order = INFINITY;
  for (std::size_t k = 0; k < p.gammas.size(); ++k) {
    const agent::AgentParams params{p.game.agent.beta, p.gammas[k]};
    const double r = agent::BestResponse(p.game.gen, p.q, params, p.type);
    const double pred =
        agent::FirstOrderPrediction(p.game.gen, p.q, params, p.type);
    const double err = std::abs(r - pred);
    errors.push_back(err);
    std::string order_cell;
    if (k > 0) {
      const double order =
          EmpiricalOrder(errors[k - 1], err, p.gammas[k - 1], p.gammas[k]);
      worst_order = std::min(worst_order, order);
      order_cell = Num(order);
    }
    const double loss =
        params.beta * scoring::ScoringRegret(p.game.gen, r, p.type);
    out.table.rows.push_back(
        {Num(p.gammas[k]), Num(r), Num(pred), Num(err), order_cell, Num(loss),
         Num(agent::PredictedScoringLoss(p.game.gen, p.q, params, p.type))});
  }
  out.checks.push_back({"perturbation_order", worst_order >= p.min_order,
                        "minimum order " + Describe(worst_order) +
                            " (need >= " + Describe(p.min_order) + ")"});
  return out;
}

Outcome StepFirstBest(const StepFirstBestParams& p) {
  Outcome out;
  out.table.columns = {"generator", "p_min",      "r0",      "threshold_type",
                       "utility",   "first_best", "abs_diff"};
  const double p_min = oversight::PMin(p.game.principal);
  const double r0 = oversight::OptimalStepThreshold(p.game);
  const double type = oversight::ThresholdTypeFor(p.game, r0).type;
  const double utility =
      oversight::PrincipalUtility(p.game, ApprovalFunction::Step(r0));
  const double first_best = oversight::FirstBestUtility(p.game);
  const double diff = std::abs(utility - first_best);
  out.table.rows.push_back({p.game.gen.Name(), Num(p_min), Num(r0), Num(type),
                            Num(utility), Num(first_best), Num(diff)});
  out.checks.push_back({"threshold_type_is_p_min",
                        std::abs(type - p_min) <= 1e-8,
                        "|p* - p_min| = " + Describe(std::abs(type - p_min))});
  out.checks.push_back({"step_first_best", diff < p.tolerance,
                        "U_P = " + Describe(utility) + ", first best " +
                            Describe(first_best) + ", diff " + Describe(diff)});
  return out;
}

double AxisPoint(const GridAxis& axis, int k) {
  if (axis.points == 1) return axis.lo;
  return axis.lo + (axis.hi - axis.lo) * k / (axis.points - 1);
}

Outcome AffineGap(const AffineGapParams& p) {
  Outcome out;
  out.table.columns = {"a", "b", "gap"};
  const std::size_t cells =
      static_cast<std::size_t>(p.a.points) * static_cast<std::size_t>(p.b.points);
  const std::vector<double> gaps = ParallelMap(cells, [&](std::size_t idx) {
    const int i = static_cast<int>(idx) / p.b.points;
    const int j = static_cast<int>(idx) % p.b.points;
    return oversight::AffineWelfareGap(p.game, AxisPoint(p.a, i),
                                       AxisPoint(p.b, j));
  });
  double smallest = INFINITY;
  for (std::size_t idx = 0; idx < cells; ++idx) {
    const int i = static_cast<int>(idx) / p.b.points;
    const int j = static_cast<int>(idx) % p.b.points;
    out.table.rows.push_back(
        {Num(AxisPoint(p.a, i)), Num(AxisPoint(p.b, j)), Num(gaps[idx])});
    smallest = std::min(smallest, gaps[idx]);
  }
  // Positivity needs types on both sides of the indifference point.
  const double p_min = oversight::PMin(p.game.principal);
  if (p.game.dist.lo() < p_min && p_min < p.game.dist.hi()) {
    out.checks.push_back({"affine_gap_positive", smallest > 0.0,
                          "smallest gap " + Describe(smallest) + " over " +
                              std::to_string(cells) + " (a, b) pairs"});
  }
  return out;
}

Outcome WelfareSweep(const WelfareSweepParams& p) {
  Outcome out;
  out.table.columns = {"gamma", "alpha", "gap_hat", "best_r_min", "best_tau"};
  // gap_hat keyed by (gamma index, alpha).
  std::vector<std::map<double, double>> gaps(p.gammas.size());
  for (std::size_t g = 0; g < p.gammas.size(); ++g) {
    OversightGame game = p.game;
    game.agent.gamma = p.gammas[g];
    const std::vector<oversight::GapCurvePoint> curve =
        oversight::PowerFamilyGapCurve(game, p.alphas, p.tau_min, p.search);
    for (const oversight::GapCurvePoint& pt : curve) {
      out.table.rows.push_back({Num(p.gammas[g]), Num(pt.alpha),
                                Num(pt.gap_hat), Num(pt.best_r_min),
                                Num(pt.best_tau)});
      gaps[g][pt.alpha] = pt.gap_hat;
    }
  }

  for (std::size_t g = 0; g < p.gammas.size(); ++g) {
    const std::string tag = " at gamma " + Describe(p.gammas[g]);
    if (auto it = gaps[g].find(2.0); it != gaps[g].end()) {
      out.checks.push_back({"brier_gap_small", it->second <= p.brier_gap_max,
                            "gap_hat(2) = " + Describe(it->second) + tag});
    }
    // Strictly increasing in |alpha - 2|; equal distances are not compared.
    std::vector<std::pair<double, double>> by_distance;
    for (const auto& [alpha, gap] : gaps[g]) {
      by_distance.push_back({std::abs(alpha - 2.0), gap});
    }
    std::sort(by_distance.begin(), by_distance.end());
    bool ordered = true;
    std::string detail;
    for (std::size_t i = 0; i < by_distance.size(); ++i) {
      for (std::size_t j = i + 1; j < by_distance.size(); ++j) {
        if (by_distance[j].first > by_distance[i].first &&
            !(by_distance[j].second > by_distance[i].second)) {
          ordered = false;
        }
      }
      detail += (i ? " " : "") + Describe(by_distance[i].second);
    }
    if (by_distance.size() >= 2) {
      out.checks.push_back({"gap_ordering", ordered,
                            "gaps by |alpha - 2|: " + detail + tag});
    }
  }

  // Doubling gamma, read off at the exponent furthest from 2.
  if (!p.alphas.empty()) {
    double far = p.alphas.front();
    for (double a : p.alphas) {
      if (std::abs(a - 2.0) > std::abs(far - 2.0)) far = a;
    }
    for (std::size_t g = 0; g < p.gammas.size(); ++g) {
      for (std::size_t h = 0; h < p.gammas.size(); ++h) {
        if (std::abs(p.gammas[h] - 2.0 * p.gammas[g]) > 1e-12 * p.gammas[h]) {
          continue;
        }
        const double ratio = gaps[h][far] / gaps[g][far];
        out.checks.push_back(
            {"gamma_scaling", ratio >= p.scaling_lo && ratio <= p.scaling_hi,
             "gap_hat(alpha " + Describe(far) + ") ratio " + Describe(ratio) +
                 " from gamma " + Describe(p.gammas[g]) + " to " +
                 Describe(p.gammas[h]) + " (need [" + Describe(p.scaling_lo) +
                 ", " + Describe(p.scaling_hi) + "])"});
      }
    }
  }
  return out;
}

Outcome MarketInflation(const MarketParams& p) {
  Outcome out;
  out.table.columns = {"gamma",     "agent",           "bid",
                       "effective_bid", "inflation",   "first_order_inflation",
                       "abs_error"};
  const market::MarketInstance& base = p.instance;
  const int n = base.capacity.n();
  auto curvature = [&](double b) {
    if (const auto* g = std::get_if<market::BregmanCompliance>(&p.compliance)) {
      return scoring::Curvature(g->gen, b);
    }
    return 2.0;
  };
  // errors[j][k]: agent j at gamma k.
  std::vector<std::vector<double>> errors(n);
  for (double gamma : p.gammas) {
    market::MarketInstance inst = base;
    inst.gamma = gamma;
    const std::vector<double> b = market::OperatorBestResponse(inst, p.compliance);
    for (int j = 0; j < n; ++j) {
      const double slope =
          market::MarginalRevenueFormula(inst.capacity, inst.bids, j);
      const double predicted =
          gamma * slope / (inst.delta_rep * curvature(inst.bids[j]));
      const double inflation = b[j] - inst.bids[j];
      const double err = std::abs(inflation - predicted);
      errors[j].push_back(err);
      out.table.rows.push_back({Num(gamma), std::to_string(j + 1),
                                Num(inst.bids[j]), Num(b[j]), Num(inflation),
                                Num(predicted), Num(err)});
    }
  }

  if (p.gammas.size() >= 2) {
    double worst = INFINITY;
    for (int j = 0; j < n; ++j) {
      for (std::size_t k = 1; k < p.gammas.size(); ++k) {
        if (p.gammas[k] <= 0.0 || p.gammas[k - 1] <= 0.0) continue;
        worst = std::min(worst, EmpiricalOrder(errors[j][k - 1], errors[j][k],
                                               p.gammas[k - 1], p.gammas[k]));
      }
    }
    out.checks.push_back({"inflation_order", worst >= p.min_order,
                          std::isinf(worst)
                              ? std::string("optimizer equals first order to "
                                            "within 1e-12 at every gamma")
                              : "minimum order " + Describe(worst)});
  }

  if (n == 2) {
    double worst = 0.0;
    const double spacing = std::abs(base.bids[0] - base.bids[1]);
    for (int j = 0; j < n; ++j) {
      const double step = std::min(0.01, 0.5 * spacing);
      const double fd =
          market::MarginalRevenueFd(base.capacity, base.bids, j, step);
      worst = std::max(
          worst,
          std::abs(fd - market::MarginalRevenueFormula(base.capacity,
                                                       base.bids, j)));
    }
    out.checks.push_back({"marginal_revenue_matches_fd", worst <= 1e-10,
                          "largest |formula - fd| = " + Describe(worst)});
  }
  return out;
}

Outcome DetectionCurves(const DetectionParams& p, std::uint64_t seed) {
  Outcome out;
  out.table.columns = {"curve", "parameter", "empirical_rate", "reference",
                       "std_error"};
  detection::DetectionSpec spec;
  spec.delta = p.delta;
  spec.alpha = p.alpha;
  spec.sigma = p.sigma;
  spec.trials = p.trials;
  spec.seed = seed;

  const long long bound = detection::HoeffdingSampleBound(p.delta, p.alpha);
  std::vector<long long> horizons = p.horizons;
  horizons.push_back(bound);
  std::sort(horizons.begin(), horizons.end());
  horizons.erase(std::unique(horizons.begin(), horizons.end()), horizons.end());
  auto se = [](double rate, long long trials) {
    return std::sqrt(rate * (1.0 - rate) / static_cast<double>(trials));
  };
  double rate_at_bound = 0.0;
  for (long long t : horizons) {
    const double rate =
        detection::SimulateDetection(p.p_true, p.p_true + p.delta, t, spec);
    if (t == bound) rate_at_bound = rate;
    out.table.rows.push_back({"single_reporter", std::to_string(t), Num(rate),
                              Num(1.0 - p.alpha), Num(se(rate, p.trials))});
  }
  const double floor = 1.0 - p.alpha - 3.0 * se(rate_at_bound, p.trials);
  out.checks.push_back({"hoeffding_bound", rate_at_bound >= floor,
                        "rate " + Describe(rate_at_bound) + " at K = " +
                            std::to_string(bound) + " (need >= " +
                            Describe(floor) + ")"});

  spec.trials = p.competition_trials;
  std::vector<int> reporters = p.reporters;
  std::sort(reporters.begin(), reporters.end());
  reporters.erase(std::unique(reporters.begin(), reporters.end()),
                  reporters.end());
  double worst = 0.0;
  bool increasing = true;
  double prev = -1.0;
  for (int n : reporters) {
    const double mc = detection::CompetitionMc(p.delta, p.sigma, n, spec);
    const double exact = detection::CompetitionDetectionProb(p.delta, p.sigma, n);
    worst = std::max(worst, std::abs(mc - exact));
    increasing = increasing && mc > prev;
    prev = mc;
    out.table.rows.push_back({"competition", std::to_string(n), Num(mc),
                              Num(exact), Num(se(mc, p.competition_trials))});
  }
  out.checks.push_back({"competition_closed_form",
                        worst <= p.competition_tolerance,
                        "largest |mc - closed form| = " + Describe(worst)});
  if (reporters.size() >= 2) {
    out.checks.push_back({"competition_trend", increasing,
                          "empirical rate rises with the reporter count"});
  }
  return out;
}

Outcome Regulation(const RegulationParams& p) {
  Outcome out;
  out.table.columns = {"cost", "gain", "regulate"};
  const double gain = oversight::RegulationGain(p.game, p.q_organic, 0.0).gain;
  for (double cost : p.costs) {
    const oversight::RegulationDecision d =
        oversight::RegulationGain(p.game, p.q_organic, cost);
    out.table.rows.push_back(
        {Num(cost), Num(d.gain), d.regulate ? "true" : "false"});
  }
  const double shortfall = oversight::FirstBestUtility(p.game) -
                           oversight::PrincipalUtility(p.game, p.q_organic);
  out.checks.push_back({"gain_matches_shortfall",
                        std::abs(gain - shortfall) <= 1e-8,
                        "gain " + Describe(gain) + ", first-best shortfall " +
                            Describe(shortfall)});
  return out;
}

Outcome Statics(const StaticsParams& p) {
  Outcome out;
  out.table.columns = {"p_min", "dpmin_dud", "r0_uniform", "r0_beta22",
                       "sample_size"};
  const oversight::StaticsReport s =
      oversight::Statics(p.game, p.delta, p.alpha);
  out.table.rows.push_back({Num(s.p_min), Num(s.dpmin_dud), Num(s.r0_uniform),
                            Num(s.r0_beta22), std::to_string(s.sample_size)});
  const double exact = 1.0 / (p.game.principal.u_s - p.game.principal.u_f);
  out.checks.push_back(
      {"pmin_rises_with_delegation_value",
       s.dpmin_dud > 0.0 && std::abs(s.dpmin_dud - exact) <= 1e-6,
       "d p_min / d u_d = " + Describe(s.dpmin_dud)});
  out.checks.push_back(
      {"threshold_independent_of_types",
       std::abs(s.r0_uniform - s.r0_beta22) <= 1e-12,
       "r0 " + Describe(s.r0_uniform) + " vs " + Describe(s.r0_beta22)});
  return out;
}

}  // namespace

Outcome Execute(const ExperimentConfig& config) {
  return std::visit(
      [&](const auto& p) -> Outcome {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, PerturbationParams>) {
          return Perturbation(p);
        } else if constexpr (std::is_same_v<T, StepFirstBestParams>) {
          return StepFirstBest(p);
        } else if constexpr (std::is_same_v<T, AffineGapParams>) {
          return AffineGap(p);
        } else if constexpr (std::is_same_v<T, WelfareSweepParams>) {
          return WelfareSweep(p);
        } else if constexpr (std::is_same_v<T, MarketParams>) {
          return MarketInflation(p);
        } else if constexpr (std::is_same_v<T, DetectionParams>) {
          return DetectionCurves(p, config.seed);
        } else if constexpr (std::is_same_v<T, RegulationParams>) {
          return Regulation(p);
        } else {
          return Statics(p);
        }
      },
      config.params);
}

}  // namespace credlab::cli
