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

// A polymatroid marketplace run by an operator who sees the true sealed bids
// b but executes effective bids bhat. Allocation is the Edmonds greedy over
// a monotone submodular capacity nu; payments follow the Archer-Tardos
// identity
//
//   p_i(bhat) = bhat_i x_i(bhat) - integral_0^{bhat_i} x_i(z, bhat_-i) dz.
//
// The operator maximizes -delta_rep ||bhat - b||^2 + gamma R(bhat) where R is
// total payment revenue.
//
// Agents are indexed from 0 in this API. Subsets are bitmasks with bit i set
// for agent i.

#ifndef CREDLAB_MARKET_H_
#define CREDLAB_MARKET_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "credlab/scoring.h"

namespace credlab::market {

using Subset = std::uint32_t;

inline constexpr int kMaxAgents = 12;

class SubmodularCapacity {
 public:
  // `table[mask]` is nu of the subset encoded by `mask`; 2^n entries.
  // Throws ParameterError for a bad size; see ValidateCapacity for the
  // structural checks.
  SubmodularCapacity(int n, std::vector<double> table);

  template <typename F>
  static SubmodularCapacity FromFunction(int n, F&& nu) {
    std::vector<double> table(std::size_t{1} << n);
    for (Subset s = 0; s < table.size(); ++s) table[s] = nu(s);
    return SubmodularCapacity(n, std::move(table));
  }

  int n() const { return n_; }
  double operator()(Subset s) const { return table_[s]; }
  const std::vector<double>& table() const { return table_; }

  // nu(S + i) - nu(S).
  double Marginal(Subset s, int i) const {
    return table_[s | (Subset{1} << i)] - table_[s];
  }

 private:
  int n_;
  std::vector<double> table_;
};

struct CapacityViolation {
  enum class Kind { kNonzeroEmpty, kNotMonotone, kNotSubmodular, kMarginalAboveOne };
  Kind kind;
  Subset smaller;  // S
  Subset larger;   // T (S subset of T); unused for kNonzeroEmpty
  int agent;       // i, or -1
  std::string description;
};

// Exhaustive check of nu(empty) = 0, monotonicity, submodularity and
// marginals <= 1, within `tolerance`. Returns the first violation found.
std::optional<CapacityViolation> FindCapacityViolation(
    const SubmodularCapacity& cap, double tolerance = 1e-12);

// Throws CapacityError carrying the violation's description.
void ValidateCapacity(const SubmodularCapacity& cap);

// Agents in processing order: bid descending, ties by ascending index.
std::vector<int> GreedyOrder(std::span<const double> bids);

std::vector<double> GreedyAllocation(const SubmodularCapacity& cap,
                                     std::span<const double> bids);

// Exact payments: x_i(z, bids_-i) is piecewise constant in z with
// breakpoints at the other bids, so the integral is a finite sum.
std::vector<double> AtPayments(const SubmodularCapacity& cap,
                               std::span<const double> bids);

double Revenue(const SubmodularCapacity& cap, std::span<const double> bids);

// nu({i}) + nu({j}) - nu({i, j}).
double NonmodularityGap(const SubmodularCapacity& cap, int i, int j);

// Sum over i != j with b_i > b_j of kappa_ij.
double MarginalRevenueFormula(const SubmodularCapacity& cap,
                              std::span<const double> bids, int j);

// (R(b + delta e_j) - R(b)) / delta. Throws OrderingChangedError when the
// step moves b_j onto or past another bid.
double MarginalRevenueFd(const SubmodularCapacity& cap,
                         std::span<const double> bids, int j, double delta);

// The operator's compliance penalty per coordinate: delta_rep (bhat - b)^2,
// or delta_rep times the Bregman regret of a scoring generator.
struct QuadraticCompliance {};
struct BregmanCompliance {
  scoring::Generator gen;
};
using ComplianceScore = std::variant<QuadraticCompliance, BregmanCompliance>;

struct MarketInstance {
  SubmodularCapacity capacity;
  std::vector<double> bids;
  double delta_rep = 1.0;
  double gamma = 0.1;
  double v_bar = 1.0;
  // Equal bids are rejected unless set; ties then go to the lower index.
  bool allow_ties = false;
};

void ValidateInstance(const MarketInstance& instance);

// -delta_rep * penalty(bhat, b) + gamma R(bhat).
double OperatorObjective(const MarketInstance& instance,
                         std::span<const double> effective_bids,
                         const ComplianceScore& compliance = {});

// Local maximizer of the operator objective by cyclic coordinate ascent
// from bhat = b. Each coordinate is maximized exactly over the intervals
// between the other effective bids, on which revenue is linear. Stops once
// a sweep moves nothing by more than 1e-12; throws ConvergenceError after
// 100 sweeps.
std::vector<double> OperatorBestResponse(
    const MarketInstance& instance, const ComplianceScore& compliance = {});

// gamma / (2 delta_rep) * MarginalRevenueFormula(j).
double FirstOrderInflation(const MarketInstance& instance, int j);

struct AgentObservation {
  double own_bid;
  double own_allocation;
  double own_payment;

  bool operator==(const AgentObservation&) const = default;
};

// What agent i sees when the mechanism executes `executed` while its own
// sealed bid was own_bid.
AgentObservation Observe(const SubmodularCapacity& cap,
                         std::span<const double> executed, int i,
                         double own_bid);

// For each agent, whether its observation is identical in scenario A (the
// operator executes `inflated` against true bids `true_bids`) and scenario
// B (`inflated` is the honest profile, executed faithfully). The two
// profiles must differ in at most one coordinate; the deviating
// coordinate's own entry is false because its sealed bid differs.
std::vector<bool> VerifyNt3Signals(const SubmodularCapacity& cap,
                                   std::span<const double> true_bids,
                                   std::span<const double> inflated_bids);

struct DeviationWelfare {
  // b_i x_i - p_i after minus before, valued at the true bids.
  std::vector<double> surplus_change;
  double revenue_change;
  // delta_rep penalty + gamma revenue, after minus before.
  double operator_gain;
  // gamma^2 ||grad R(b)||^2 / (4 delta_rep) from the first-order formula.
  double predicted_operator_gain;
  // The greedy order differs between the two profiles.
  bool order_changed;
};

DeviationWelfare DeviationWelfareReport(const SubmodularCapacity& cap,
                                        std::span<const double> true_bids,
                                        std::span<const double> inflated_bids,
                                        double delta_rep, double gamma);

}  // namespace credlab::market

#endif  // CREDLAB_MARKET_H_
