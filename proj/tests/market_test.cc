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

#include <cmath>
#include <iostream>
#include <random>
#include <vector>

#include "credlab/errors.h"
#include "credlab/scoring.h"
#include "gtest/gtest.h"
#include "test_instances.h"

namespace credlab::market {
namespace {

using testing::ModularTable;
using testing::NestedPairwiseTable;
using testing::RandomBids;
using testing::RandomCoverageTable;
using testing::TwoAgentTable;

const std::vector<double> kBids = {0.9, 0.4};

MarketInstance CanonicalInstance(double gamma = 0.1) {
  return {TwoAgentTable(), kBids, 1.0, gamma};
}

// Brute-force allocation of agent i as a function of its own bid: Riemann
// sum of the greedy allocation over a fine grid.
double PaymentOracle(const SubmodularCapacity& cap, std::vector<double> bids,
                     int i) {
  const double own = bids[i];
  const double x_own = GreedyAllocation(cap, bids)[i];
  constexpr int kCells = 200000;
  const double h = own / kCells;
  double integral = 0.0;
  for (int k = 0; k < kCells; ++k) {
    bids[i] = (k + 0.5) * h;
    integral += GreedyAllocation(cap, bids)[i] * h;
  }
  return own * x_own - integral;
}

TEST(CapacityTest, ValidTables) {
  EXPECT_NO_THROW(ValidateCapacity(TwoAgentTable()));
  EXPECT_NO_THROW(ValidateCapacity(ModularTable(4)));
  EXPECT_NO_THROW(ValidateCapacity(NestedPairwiseTable(6, 7)));
  std::mt19937_64 rng(11);
  EXPECT_NO_THROW(ValidateCapacity(RandomCoverageTable(5, rng)));
}

TEST(CapacityTest, MarginalAboveOne) {
  const SubmodularCapacity cap(2, {0.0, 1.0, 1.0, 2.5});
  const auto v = FindCapacityViolation(cap);
  ASSERT_TRUE(v.has_value());
  EXPECT_EQ(v->kind, CapacityViolation::Kind::kMarginalAboveOne);
  EXPECT_THROW(ValidateCapacity(cap), CapacityError);
}

TEST(CapacityTest, OtherViolations) {
  EXPECT_EQ(FindCapacityViolation(SubmodularCapacity(2, {0.1, 1, 1, 1.5}))
                ->kind,
            CapacityViolation::Kind::kNonzeroEmpty);
  EXPECT_EQ(FindCapacityViolation(SubmodularCapacity(2, {0, 1, 1, 0.8}))->kind,
            CapacityViolation::Kind::kNotMonotone);
  // nu({1}) = 0.2 but adding agent 1 to {2} gains 0.7: supermodular.
  const auto v = FindCapacityViolation(SubmodularCapacity(2, {0, 0.2, 0.5, 1.2}));
  ASSERT_TRUE(v.has_value());
  EXPECT_EQ(v->kind, CapacityViolation::Kind::kNotSubmodular);
  EXPECT_FALSE(v->description.empty());
}

TEST(CapacityTest, BadTableSize) {
  EXPECT_THROW(SubmodularCapacity(2, {0.0, 1.0, 1.0}), ParameterError);
}

TEST(GreedyTest, HandExamples) {
  EXPECT_EQ(GreedyAllocation(TwoAgentTable(), kBids),
            (std::vector<double>{1.0, 0.5}));
  EXPECT_EQ(GreedyAllocation(TwoAgentTable(), std::vector<double>{0.4, 0.9}),
            (std::vector<double>{0.5, 1.0}));
  EXPECT_EQ(GreedyAllocation(ModularTable(2), kBids),
            (std::vector<double>{0.5, 0.5}));
}

TEST(GreedyTest, TiesGoToLowerIndex) {
  EXPECT_EQ(GreedyOrder(std::vector<double>{0.5, 0.7, 0.5}),
            (std::vector<int>{1, 0, 2}));
}

TEST(GreedyTest, PolymatroidFeasibility) {
  std::mt19937_64 rng(2026);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 2 + trial % 5;
    const SubmodularCapacity cap = trial % 2 ? RandomCoverageTable(n, rng)
                                             : NestedPairwiseTable(n, trial);
    const std::vector<double> bids = RandomBids(n, rng);
    const std::vector<double> x = GreedyAllocation(cap, bids);
    for (Subset s = 0; s < (Subset{1} << n); ++s) {
      double load = 0.0;
      for (int i = 0; i < n; ++i) {
        if (s >> i & 1) load += x[i];
      }
      EXPECT_LE(load, cap(s) + 1e-12);
    }
    for (double xi : x) {
      EXPECT_GE(xi, 0.0);
      EXPECT_LE(xi, 1.0 + 1e-12);
    }
  }
}

TEST(PaymentsTest, HandExample) {
  const std::vector<double> p = AtPayments(TwoAgentTable(), kBids);
  EXPECT_NEAR(p[0], 0.2, 1e-15);
  EXPECT_NEAR(p[1], 0.0, 1e-15);
}

TEST(PaymentsTest, ModularPaysNothing) {
  for (double pi : AtPayments(ModularTable(3), std::vector<double>{0.2, 0.8, 0.5})) {
    EXPECT_EQ(pi, 0.0);
  }
}

TEST(PaymentsTest, MatchesBruteForceIntegral) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 4; ++trial) {
    const int n = 3 + trial % 2;
    const SubmodularCapacity cap = RandomCoverageTable(n, rng);
    const std::vector<double> bids = RandomBids(n, rng);
    const std::vector<double> p = AtPayments(cap, bids);
    for (int i = 0; i < n; ++i) {
      EXPECT_NEAR(p[i], PaymentOracle(cap, bids, i), 1e-5);
    }
  }
}

TEST(PaymentsTest, AllocationMonotoneInOwnBid) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 2 + trial % 4;
    const SubmodularCapacity cap = RandomCoverageTable(n, rng);
    std::vector<double> bids = RandomBids(n, rng);
    for (int i = 0; i < n; ++i) {
      std::vector<double> z = bids;
      double prev = -1.0;
      // One probe inside every interval between the other bids.
      std::vector<double> cuts = {0.0, 1.0};
      for (int k = 0; k < n; ++k) {
        if (k != i) cuts.push_back(bids[k]);
      }
      std::sort(cuts.begin(), cuts.end());
      for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
        z[i] = 0.5 * (cuts[c] + cuts[c + 1]);
        const double x = GreedyAllocation(cap, z)[i];
        EXPECT_GE(x, prev - 1e-15);
        prev = x;
      }
    }
  }
}

TEST(RevenueTest, Examples) {
  EXPECT_NEAR(Revenue(TwoAgentTable(), kBids), 0.2, 1e-15);
  EXPECT_EQ(Revenue(ModularTable(2), kBids), 0.0);
  EXPECT_NEAR(Revenue(TwoAgentTable(), std::vector<double>{0.9, 0.5}), 0.25,
              1e-15);
}

TEST(NonmodularityTest, Examples) {
  EXPECT_DOUBLE_EQ(NonmodularityGap(TwoAgentTable(), 0, 1), 0.5);
  EXPECT_EQ(NonmodularityGap(ModularTable(3), 0, 2), 0.0);
  const SubmodularCapacity cap = NestedPairwiseTable(5, 3);
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) {
      if (i == j) continue;
      EXPECT_EQ(NonmodularityGap(cap, i, j), NonmodularityGap(cap, j, i));
      EXPECT_GE(NonmodularityGap(cap, i, j), 0.0);
    }
  }
  EXPECT_THROW(NonmodularityGap(cap, 1, 1), PreconditionError);
}

TEST(MarginalRevenueTest, Examples) {
  EXPECT_DOUBLE_EQ(MarginalRevenueFormula(TwoAgentTable(), kBids, 1), 0.5);
  EXPECT_EQ(MarginalRevenueFormula(TwoAgentTable(), kBids, 0), 0.0);
  EXPECT_EQ(MarginalRevenueFormula(ModularTable(3),
                                   std::vector<double>{0.1, 0.5, 0.3}, 2),
            0.0);
  EXPECT_NEAR(MarginalRevenueFd(TwoAgentTable(), kBids, 1, 0.01), 0.5, 1e-12);
  EXPECT_EQ(MarginalRevenueFd(ModularTable(2), kBids, 1, 0.01), 0.0);
}

TEST(MarginalRevenueTest, FdRefusesOrderChange) {
  EXPECT_THROW(MarginalRevenueFd(TwoAgentTable(), kBids, 1, 0.5),
               OrderingChangedError);
}

TEST(MarginalRevenueTest, TwoAgentsFormulaEqualsFd) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double kappa = unit(rng);
    const SubmodularCapacity cap = TwoAgentTable(kappa);
    const std::vector<double> bids = RandomBids(2, rng, 0.05);
    for (int j = 0; j < 2; ++j) {
      EXPECT_NEAR(MarginalRevenueFormula(cap, bids, j),
                  MarginalRevenueFd(cap, bids, j, 0.01), 1e-10);
    }
  }
}

TEST(MarginalRevenueTest, PairwiseTablesMatchAtAnySize) {
  std::mt19937_64 rng(23);
  for (int n = 3; n <= 6; ++n) {
    const SubmodularCapacity cap = NestedPairwiseTable(n, 100 + n);
    const std::vector<double> bids = RandomBids(n, rng, 0.05);
    for (int j = 0; j < n; ++j) {
      EXPECT_NEAR(MarginalRevenueFormula(cap, bids, j),
                  MarginalRevenueFd(cap, bids, j, 0.01), 1e-10);
    }
  }
}

TEST(MarginalRevenueTest, HigherOrderDiscrepanciesAreLogged) {
  // The pairwise formula is not claimed exact here; record the gap only.
  std::mt19937_64 rng(29);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 3 + trial % 3;
    const SubmodularCapacity cap = RandomCoverageTable(n, rng);
    const std::vector<double> bids = RandomBids(n, rng, 0.05);
    for (int j = 0; j < n; ++j) {
      const double fd = MarginalRevenueFd(cap, bids, j, 0.01);
      ASSERT_TRUE(std::isfinite(fd));
      worst = std::max(worst,
                       std::abs(fd - MarginalRevenueFormula(cap, bids, j)));
    }
  }
  std::cout << "largest formula-vs-fd gap on coverage tables: " << worst
            << "\n";
  RecordProperty("largest_formula_fd_gap", std::to_string(worst));
}

TEST(OperatorTest, CanonicalInflation) {
  const std::vector<double> b = OperatorBestResponse(CanonicalInstance());
  EXPECT_EQ(b[0], 0.9);
  EXPECT_NEAR(b[1], 0.425, 1e-12);
  EXPECT_NEAR(FirstOrderInflation(CanonicalInstance(), 1), 0.025, 1e-15);
  EXPECT_EQ(FirstOrderInflation(CanonicalInstance(), 0), 0.0);
}

TEST(OperatorTest, NoRevenueWeightMeansTruth) {
  EXPECT_EQ(OperatorBestResponse(CanonicalInstance(0.0)), kBids);
}

TEST(OperatorTest, ModularMeansTruth) {
  const MarketInstance inst{ModularTable(3), {0.2, 0.7, 0.5}, 1.0, 0.3};
  EXPECT_EQ(OperatorBestResponse(inst), inst.bids);
}

TEST(OperatorTest, InflationMatchesFirstOrderAcrossGamma) {
  for (double gamma : {0.1, 0.05, 0.025}) {
    const MarketInstance inst = CanonicalInstance(gamma);
    const double inflation = OperatorBestResponse(inst)[1] - inst.bids[1];
    EXPECT_NEAR(inflation, FirstOrderInflation(inst, 1), 1e-12);
  }
}

TEST(OperatorTest, RejectsTiesUnlessAllowed) {
  MarketInstance inst{TwoAgentTable(), {0.5, 0.5}, 1.0, 0.1};
  EXPECT_THROW(ValidateInstance(inst), ParameterError);
  inst.allow_ties = true;
  EXPECT_NO_THROW(ValidateInstance(inst));
}

TEST(DsicTest, TruthfulBidIsOptimal) {
  std::mt19937_64 rng(404);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + trial % 3;
    const SubmodularCapacity cap = trial % 2 ? RandomCoverageTable(n, rng)
                                             : NestedPairwiseTable(n, trial);
    const std::vector<double> bids = RandomBids(n, rng);
    for (int i = 0; i < n; ++i) {
      auto utility = [&](double report) {
        std::vector<double> b = bids;
        b[i] = report;
        const double x = GreedyAllocation(cap, b)[i];
        return bids[i] * x - AtPayments(cap, b)[i];
      };
      const double truthful = utility(bids[i]);
      for (int k = 0; k <= 100; ++k) {
        EXPECT_LE(utility(k / 100.0), truthful + 1e-12)
            << "trial " << trial << " agent " << i << " misreport " << k;
      }
    }
  }
}

TEST(Nt3Test, HandExample) {
  const std::vector<bool> same = VerifyNt3Signals(
      TwoAgentTable(), kBids, std::vector<double>{0.9, 0.5});
  EXPECT_TRUE(same[0]);
  EXPECT_FALSE(same[1]);
  const std::vector<bool> top = VerifyNt3Signals(
      TwoAgentTable(), kBids, std::vector<double>{0.95, 0.4});
  EXPECT_TRUE(top[1]);
  for (bool s : VerifyNt3Signals(TwoAgentTable(), kBids, kBids)) {
    EXPECT_TRUE(s);
  }
}

TEST(Nt3Test, RandomSingleCoordinateInflation) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + trial % 4;
    const SubmodularCapacity cap = RandomCoverageTable(n, rng);
    const std::vector<double> bids = RandomBids(n, rng);
    const int j = trial % n;
    std::vector<double> inflated = bids;
    inflated[j] = std::min(1.0, bids[j] + 0.03);
    const std::vector<bool> same = VerifyNt3Signals(cap, bids, inflated);
    for (int i = 0; i < n; ++i) {
      if (i != j) {
        EXPECT_TRUE(same[i]) << "trial " << trial << " agent " << i;
      }
    }
  }
}

TEST(Nt3Test, MultiCoordinateRejected) {
  EXPECT_THROW(VerifyNt3Signals(TwoAgentTable(), kBids,
                                std::vector<double>{0.95, 0.5}),
               PreconditionError);
}

TEST(DeviationWelfareTest, HandExample) {
  const DeviationWelfare w = DeviationWelfareReport(
      TwoAgentTable(), kBids, std::vector<double>{0.9, 0.5}, 1.0, 0.1);
  EXPECT_NEAR(w.surplus_change[0], -0.05, 1e-15);
  EXPECT_NEAR(w.revenue_change, 0.05, 1e-15);
  EXPECT_FALSE(w.order_changed);
}

TEST(DeviationWelfareTest, NoDeviation) {
  const DeviationWelfare w =
      DeviationWelfareReport(TwoAgentTable(), kBids, kBids, 1.0, 0.1);
  for (double s : w.surplus_change) EXPECT_EQ(s, 0.0);
  EXPECT_EQ(w.revenue_change, 0.0);
  EXPECT_EQ(w.operator_gain, 0.0);
}

TEST(DeviationWelfareTest, OperatorGainAtEquilibrium) {
  const MarketInstance inst = CanonicalInstance();
  const DeviationWelfare w = DeviationWelfareReport(
      inst.capacity, inst.bids, OperatorBestResponse(inst), 1.0, 0.1);
  EXPECT_NEAR(w.predicted_operator_gain, 0.000625, 1e-15);
  EXPECT_NEAR(w.operator_gain, 0.000625, 1e-12);
}

TEST(DeviationWelfareTest, OrderChangeFlagged) {
  const DeviationWelfare w = DeviationWelfareReport(
      TwoAgentTable(), kBids, std::vector<double>{0.3, 0.4}, 1.0, 0.1);
  EXPECT_TRUE(w.order_changed);
}

double TotalInflation(const MarketInstance& inst) {
  const std::vector<double> b = OperatorBestResponse(inst);
  double total = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) total += std::abs(b[i] - inst.bids[i]);
  return total;
}

TEST(ComparativeStaticsTest, InflationGrowsWithAgents) {
  for (std::uint64_t seed : {1, 2, 3, 4, 5}) {
    std::mt19937_64 rng(seed * 1000);
    const std::vector<double> all_bids = RandomBids(8, rng, 0.03);
    double prev = 0.0;
    for (int n = 2; n <= 8; ++n) {
      const MarketInstance inst{
          NestedPairwiseTable(n, seed),
          std::vector<double>(all_bids.begin(), all_bids.begin() + n), 1.0,
          0.05};
      const double total = TotalInflation(inst);
      EXPECT_GE(total, prev - 1e-12) << "seed " << seed << " n " << n;
      prev = total;
    }
  }
}

TEST(ComparativeStaticsTest, LinearInGammaOverDelta) {
  std::mt19937_64 rng(8);
  const std::vector<double> bids = RandomBids(5, rng, 0.05);
  const SubmodularCapacity cap = NestedPairwiseTable(5, 8);
  const double base = TotalInflation({cap, bids, 1.0, 0.01}) / 0.005;
  EXPECT_GT(base, 0.0);
  for (auto [gamma, delta] : {std::pair{0.02, 1.0}, std::pair{0.01, 2.0},
                              std::pair{0.03, 1.5}}) {
    const double ratio = gamma / (2.0 * delta);
    EXPECT_NEAR(TotalInflation({cap, bids, delta, gamma}) / ratio, base,
                1e-9 * base);
  }
}

TEST(ComparativeStaticsTest, ModularHasNoInflation) {
  std::mt19937_64 rng(9);
  EXPECT_EQ(TotalInflation({ModularTable(5, 0.2), RandomBids(5, rng), 1.0, 0.2}),
            0.0);
}

TEST(ImpossibilityTest, EveryStrictlyProperComplianceInflates) {
  const std::vector<ComplianceScore> scores = {
      QuadraticCompliance{}, BregmanCompliance{scoring::Generator::Power(3.0)}};
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + trial % 4;
    const SubmodularCapacity cap = trial % 2 ? RandomCoverageTable(n, rng)
                                             : NestedPairwiseTable(n, trial);
    const MarketInstance inst{cap, RandomBids(n, rng, 0.05), 1.0, 0.05};
    for (const ComplianceScore& score : scores) {
      EXPECT_NE(OperatorBestResponse(inst, score), inst.bids)
          << "trial " << trial << " score " << score.index();
    }
  }
}

TEST(ImpossibilityTest, CubicComplianceStillFirstOrder) {
  // Near the truth the cubic Bregman penalty is about 3 b d^2, so the
  // first-order inflation is gamma slope / (6 b delta).
  const MarketInstance inst = CanonicalInstance(0.01);
  const std::vector<double> b = OperatorBestResponse(
      inst, BregmanCompliance{scoring::Generator::Power(3.0)});
  const double predicted = 0.01 * 0.5 / (6.0 * 0.4 * 1.0);
  EXPECT_NEAR(b[1] - 0.4, predicted, 1e-4);
}

}  // namespace
}  // namespace credlab::market
