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

#include "credlab/market.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "credlab/errors.h"
#include "credlab/numerics.h"

namespace credlab::market {

namespace {

std::string FormatSubset(Subset s) {
  std::ostringstream out;
  out << "{";
  bool first = true;
  for (int i = 0; i < 32; ++i) {
    if (s & (Subset{1} << i)) {
      out << (first ? "" : ",") << i + 1;
      first = false;
    }
  }
  out << "}";
  return out.str();
}

void CheckBids(const SubmodularCapacity& cap, std::span<const double> bids) {
  if (static_cast<int>(bids.size()) != cap.n()) {
    std::ostringstream msg;
    msg << "expected " << cap.n() << " bids, got " << bids.size();
    throw ParameterError(msg.str());
  }
  for (double b : bids) {
    if (!(b >= 0.0) || !std::isfinite(b)) {
      throw ParameterError("bids must be finite and >= 0");
    }
  }
}

void CheckAgent(const SubmodularCapacity& cap, int i) {
  if (i < 0 || i >= cap.n()) {
    std::ostringstream msg;
    msg << "agent index " << i << " out of range for n = " << cap.n();
    throw ParameterError(msg.str());
  }
}

// Agents other than i whose bid exceeds z.
Subset AgentsAbove(std::span<const double> bids, int i, double z) {
  Subset s = 0;
  for (int k = 0; k < static_cast<int>(bids.size()); ++k) {
    if (k != i && bids[k] > z) s |= Subset{1} << k;
  }
  return s;
}

double Penalty(const ComplianceScore& compliance, double effective,
               double truth) {
  if (const auto* bregman = std::get_if<BregmanCompliance>(&compliance)) {
    return scoring::ScoringRegret(bregman->gen, effective, truth);
  }
  const double d = effective - truth;
  return d * d;
}

// Candidate maximizers on [lo, hi] of -D_G(t, truth) + target * t: the
// endpoints plus the roots of G''(t) (t - truth) = target. For G = p^alpha
// that left side is monotone on each side of (alpha - 2) truth / (alpha - 1),
// so each piece holds at most one root, found by bisection. Solving the
// condition directly keeps the answer stable when the bracket shifts.
std::vector<double> BregmanStationaryPoints(const scoring::Generator& gen,
                                            double truth, double target,
                                            double lo, double hi) {
  std::vector<double> out = {lo, hi};
  auto foc = [&](double t) {
    return gen.SecondDerivative(t) * (t - truth) - target;
  };
  const double alpha = gen.alpha();
  std::vector<double> knots = {lo};
  const double turn = (alpha - 2.0) * truth / (alpha - 1.0);
  if (turn > lo && turn < hi) knots.push_back(turn);
  knots.push_back(hi);
  for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
    const double a = knots[k];
    const double b = knots[k + 1];
    const double fa = foc(a);
    const double fb = foc(b);
    if (!std::isfinite(fa) || !std::isfinite(fb)) continue;
    if (fa == 0.0) out.push_back(a);
    if ((fa < 0.0) != (fb < 0.0)) out.push_back(numerics::Bisect(foc, a, b, 0.0));
  }
  return out;
}

}  // namespace

SubmodularCapacity::SubmodularCapacity(int n, std::vector<double> table)
    : n_(n), table_(std::move(table)) {
  if (n < 1 || n > kMaxAgents) {
    std::ostringstream msg;
    msg << "agent count must be in [1, " << kMaxAgents << "], got " << n;
    throw ParameterError(msg.str());
  }
  if (table_.size() != (std::size_t{1} << n)) {
    std::ostringstream msg;
    msg << "capacity table for n = " << n << " needs " << (1 << n)
        << " entries, got " << table_.size();
    throw ParameterError(msg.str());
  }
  for (double v : table_) {
    if (!std::isfinite(v)) throw ParameterError("capacity values must be finite");
  }
}

std::optional<CapacityViolation> FindCapacityViolation(
    const SubmodularCapacity& cap, double tolerance) {
  using Kind = CapacityViolation::Kind;
  if (std::abs(cap(0)) > tolerance) {
    std::ostringstream msg;
    msg << "nu(empty) = " << cap(0) << ", expected 0";
    return CapacityViolation{Kind::kNonzeroEmpty, 0, 0, -1, msg.str()};
  }
  const int n = cap.n();
  const Subset full = (Subset{1} << n) - 1;
  // Monotonicity and the marginal bound: single-element extensions suffice.
  for (Subset s = 0; s <= full; ++s) {
    for (int i = 0; i < n; ++i) {
      const Subset bit = Subset{1} << i;
      if (s & bit) continue;
      const double marginal = cap.Marginal(s, i);
      if (marginal < -tolerance) {
        std::ostringstream msg;
        msg << "not monotone: nu(" << FormatSubset(s | bit) << ") = "
            << cap(s | bit) << " < nu(" << FormatSubset(s) << ") = " << cap(s);
        return CapacityViolation{Kind::kNotMonotone, s, s | bit, i, msg.str()};
      }
      if (marginal > 1.0 + tolerance) {
        std::ostringstream msg;
        msg << "marginal of agent " << i + 1 << " at " << FormatSubset(s)
            << " is " << marginal << " > 1";
        return CapacityViolation{Kind::kMarginalAboveOne, s, s | bit, i,
                                 msg.str()};
      }
    }
  }
  // Diminishing returns. Checking T = S + j for every S and i, j outside S
  // is equivalent to the full S subset-of T condition.
  for (Subset s = 0; s <= full; ++s) {
    for (int i = 0; i < n; ++i) {
      if (s & (Subset{1} << i)) continue;
      const double small = cap.Marginal(s, i);
      for (int j = 0; j < n; ++j) {
        const Subset bit = Subset{1} << j;
        if (j == i || (s & bit)) continue;
        const double large = cap.Marginal(s | bit, i);
        if (large > small + tolerance) {
          std::ostringstream msg;
          msg << "not submodular: marginal of agent " << i + 1 << " is "
              << small << " at " << FormatSubset(s) << " but " << large
              << " at superset " << FormatSubset(s | bit);
          return CapacityViolation{Kind::kNotSubmodular, s, s | bit, i,
                                   msg.str()};
        }
      }
    }
  }
  return std::nullopt;
}

void ValidateCapacity(const SubmodularCapacity& cap) {
  if (auto violation = FindCapacityViolation(cap)) {
    throw CapacityError(violation->description);
  }
}

std::vector<int> GreedyOrder(std::span<const double> bids) {
  std::vector<int> order(bids.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return bids[a] > bids[b]; });
  return order;
}

std::vector<double> GreedyAllocation(const SubmodularCapacity& cap,
                                     std::span<const double> bids) {
  CheckBids(cap, bids);
  std::vector<double> x(bids.size(), 0.0);
  Subset processed = 0;
  for (int i : GreedyOrder(bids)) {
    x[i] = cap.Marginal(processed, i);
    processed |= Subset{1} << i;
  }
  return x;
}

std::vector<double> AtPayments(const SubmodularCapacity& cap,
                               std::span<const double> bids) {
  const std::vector<double> x = GreedyAllocation(cap, bids);
  const int n = cap.n();
  std::vector<double> payments(n, 0.0);
  std::vector<double> cuts;
  for (int i = 0; i < n; ++i) {
    const double own = bids[i];
    cuts.assign({0.0, own});
    for (int k = 0; k < n; ++k) {
      if (k != i && bids[k] > 0.0 && bids[k] < own) cuts.push_back(bids[k]);
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    // Below own bid the allocation only changes where z crosses another bid.
    double integral = 0.0;
    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
      const double lo = cuts[c];
      const double hi = cuts[c + 1];
      const Subset above = AgentsAbove(bids, i, 0.5 * (lo + hi));
      integral += (hi - lo) * cap.Marginal(above, i);
    }
    payments[i] = own * x[i] - integral;
  }
  return payments;
}

double Revenue(const SubmodularCapacity& cap, std::span<const double> bids) {
  const std::vector<double> p = AtPayments(cap, bids);
  return std::accumulate(p.begin(), p.end(), 0.0);
}

double NonmodularityGap(const SubmodularCapacity& cap, int i, int j) {
  CheckAgent(cap, i);
  CheckAgent(cap, j);
  if (i == j) throw PreconditionError("non-modularity gap needs i != j");
  const Subset si = Subset{1} << i;
  const Subset sj = Subset{1} << j;
  return cap(si) + cap(sj) - cap(si | sj);
}

double MarginalRevenueFormula(const SubmodularCapacity& cap,
                              std::span<const double> bids, int j) {
  CheckBids(cap, bids);
  CheckAgent(cap, j);
  double total = 0.0;
  for (int i = 0; i < cap.n(); ++i) {
    if (i != j && bids[i] > bids[j]) total += NonmodularityGap(cap, i, j);
  }
  return total;
}

double MarginalRevenueFd(const SubmodularCapacity& cap,
                         std::span<const double> bids, int j, double delta) {
  CheckBids(cap, bids);
  CheckAgent(cap, j);
  if (!(delta > 0.0)) throw ParameterError("finite-difference step must be > 0");
  std::vector<double> bumped(bids.begin(), bids.end());
  bumped[j] += delta;
  for (int k = 0; k < cap.n(); ++k) {
    if (k != j && bids[k] > bids[j] && bids[k] <= bumped[j]) {
      std::ostringstream msg;
      msg << "step " << delta << " moves bid " << j + 1 << " onto or past bid "
          << k + 1 << "; shrink the step";
      throw OrderingChangedError(msg.str());
    }
  }
  return (Revenue(cap, bumped) - Revenue(cap, bids)) / delta;
}

void ValidateInstance(const MarketInstance& instance) {
  ValidateCapacity(instance.capacity);
  CheckBids(instance.capacity, instance.bids);
  if (!(instance.v_bar > 0.0)) throw ParameterError("v_bar must be > 0");
  for (double b : instance.bids) {
    if (b > instance.v_bar) {
      std::ostringstream msg;
      msg << "bid " << b << " exceeds v_bar = " << instance.v_bar;
      throw ParameterError(msg.str());
    }
  }
  if (!(instance.delta_rep > 0.0)) throw ParameterError("delta_rep must be > 0");
  if (!(instance.gamma >= 0.0)) throw ParameterError("gamma must be >= 0");
  if (!instance.allow_ties) {
    std::vector<double> sorted = instance.bids;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw ParameterError(
          "bids must be pairwise distinct (set allow_ties to use index "
          "tie-breaking)");
    }
  }
}

double OperatorObjective(const MarketInstance& instance,
                         std::span<const double> effective_bids,
                         const ComplianceScore& compliance) {
  double penalty = 0.0;
  for (std::size_t i = 0; i < effective_bids.size(); ++i) {
    penalty += Penalty(compliance, effective_bids[i], instance.bids[i]);
  }
  return -instance.delta_rep * penalty +
         instance.gamma * Revenue(instance.capacity, effective_bids);
}

std::vector<double> OperatorBestResponse(const MarketInstance& instance,
                                         const ComplianceScore& compliance) {
  ValidateInstance(instance);
  const int n = instance.capacity.n();
  const double delta = instance.delta_rep;
  const double gamma = instance.gamma;
  double lo_bound = 0.0;
  double hi_bound = instance.v_bar;
  if (const auto* bregman = std::get_if<BregmanCompliance>(&compliance)) {
    lo_bound = std::max(lo_bound, bregman->gen.domain_lo());
    hi_bound = std::min(hi_bound, bregman->gen.domain_hi());
    for (double b : instance.bids) scoring::CheckDomain(bregman->gen, b, "bid");
  }

  std::vector<double> effective = instance.bids;
  std::vector<double> cuts;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double moved = 0.0;
    for (int j = 0; j < n; ++j) {
      const double truth = instance.bids[j];
      cuts.assign({lo_bound, hi_bound});
      for (int k = 0; k < n; ++k) {
        if (k != j && effective[k] > lo_bound && effective[k] < hi_bound) {
          cuts.push_back(effective[k]);
        }
      }
      std::sort(cuts.begin(), cuts.end());
      cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

      std::vector<double> trial = effective;
      auto revenue_at = [&](double t) {
        trial[j] = t;
        return Revenue(instance.capacity, trial);
      };
      double best_t = effective[j];
      double best_value = -std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
        const double lo = cuts[c];
        const double hi = cuts[c + 1];
        // Revenue is linear in bhat_j strictly between adjacent cuts.
        const double t1 = lo + (hi - lo) / 3.0;
        const double t2 = lo + 2.0 * (hi - lo) / 3.0;
        const double r1 = revenue_at(t1);
        const double slope = (revenue_at(t2) - r1) / (t2 - t1);
        auto value = [&](double t) {
          return -delta * Penalty(compliance, t, truth) +
                 gamma * (r1 + slope * (t - t1));
        };
        std::vector<double> candidates;
        if (std::holds_alternative<QuadraticCompliance>(compliance)) {
          candidates.push_back(
              std::clamp(truth + gamma * slope / (2.0 * delta), lo, hi));
        } else {
          candidates =
              BregmanStationaryPoints(std::get<BregmanCompliance>(compliance).gen,
                                      truth, gamma * slope / delta, lo, hi);
        }
        for (double t : candidates) {
          const double v = value(t);
          if (v > best_value || (v == best_value &&
                                 std::abs(t - truth) < std::abs(best_t - truth))) {
            best_value = v;
            best_t = t;
          }
        }
      }
      moved = std::max(moved, std::abs(best_t - effective[j]));
      effective[j] = best_t;
    }
    if (moved <= 1e-12) return effective;
  }
  throw ConvergenceError(
      "operator coordinate ascent did not settle within 100 sweeps");
}

double FirstOrderInflation(const MarketInstance& instance, int j) {
  ValidateInstance(instance);
  return instance.gamma / (2.0 * instance.delta_rep) *
         MarginalRevenueFormula(instance.capacity, instance.bids, j);
}

AgentObservation Observe(const SubmodularCapacity& cap,
                         std::span<const double> executed, int i,
                         double own_bid) {
  CheckAgent(cap, i);
  const std::vector<double> x = GreedyAllocation(cap, executed);
  const std::vector<double> p = AtPayments(cap, executed);
  return {own_bid, x[i], p[i]};
}

std::vector<bool> VerifyNt3Signals(const SubmodularCapacity& cap,
                                   std::span<const double> true_bids,
                                   std::span<const double> inflated_bids) {
  CheckBids(cap, true_bids);
  CheckBids(cap, inflated_bids);
  int deviations = 0;
  for (int i = 0; i < cap.n(); ++i) {
    if (true_bids[i] != inflated_bids[i]) ++deviations;
  }
  if (deviations > 1) {
    throw PreconditionError(
        "inflated profile must differ from the true one in at most one "
        "coordinate");
  }
  std::vector<bool> same(cap.n());
  for (int i = 0; i < cap.n(); ++i) {
    // A: the operator runs `inflated` while agent i sealed true_bids[i].
    const AgentObservation a = Observe(cap, inflated_bids, i, true_bids[i]);
    // B: `inflated` is the honest profile and is run faithfully.
    const AgentObservation b = Observe(cap, inflated_bids, i, inflated_bids[i]);
    same[i] = a == b;
  }
  return same;
}

DeviationWelfare DeviationWelfareReport(const SubmodularCapacity& cap,
                                        std::span<const double> true_bids,
                                        std::span<const double> inflated_bids,
                                        double delta_rep, double gamma) {
  CheckBids(cap, true_bids);
  CheckBids(cap, inflated_bids);
  if (!(delta_rep > 0.0)) throw ParameterError("delta_rep must be > 0");
  const int n = cap.n();
  const std::vector<double> x0 = GreedyAllocation(cap, true_bids);
  const std::vector<double> p0 = AtPayments(cap, true_bids);
  const std::vector<double> x1 = GreedyAllocation(cap, inflated_bids);
  const std::vector<double> p1 = AtPayments(cap, inflated_bids);

  DeviationWelfare out;
  out.surplus_change.resize(n);
  double revenue0 = 0.0;
  double revenue1 = 0.0;
  double penalty = 0.0;
  double grad_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double v = true_bids[i];
    out.surplus_change[i] = (v * x1[i] - p1[i]) - (v * x0[i] - p0[i]);
    revenue0 += p0[i];
    revenue1 += p1[i];
    const double d = inflated_bids[i] - true_bids[i];
    penalty += d * d;
    const double g = MarginalRevenueFormula(cap, true_bids, i);
    grad_sq += g * g;
  }
  out.revenue_change = revenue1 - revenue0;
  out.operator_gain = -delta_rep * penalty + gamma * out.revenue_change;
  out.predicted_operator_gain = gamma * gamma * grad_sq / (4.0 * delta_rep);
  out.order_changed = GreedyOrder(true_bids) != GreedyOrder(inflated_bids);
  return out;
}

}  // namespace credlab::market
