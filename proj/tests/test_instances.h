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

// Seeded instance generators shared by the market tests and the
// acceptance binary.

#ifndef CREDLAB_TESTS_TEST_INSTANCES_H_
#define CREDLAB_TESTS_TEST_INSTANCES_H_

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "credlab/market.h"

namespace credlab::testing {

// nu(empty) = 0, nu({i}) = 1, nu({1, 2}) = 1.5.
inline market::SubmodularCapacity TwoAgentTable(double kappa = 0.5) {
  return market::SubmodularCapacity(2, {0.0, 1.0, 1.0, 2.0 - kappa});
}

inline market::SubmodularCapacity ModularTable(int n, double weight = 0.5) {
  return market::SubmodularCapacity::FromFunction(n, [&](market::Subset s) {
    return weight * std::popcount(s);
  });
}

// nu(S) = sum_i w_i - sum_{i<j in S} k_ij. Monotone and submodular when
// every w_i covers its row of k.
inline market::SubmodularCapacity PairwiseTable(
    const std::vector<double>& w, const std::vector<std::vector<double>>& k) {
  const int n = static_cast<int>(w.size());
  return market::SubmodularCapacity::FromFunction(n, [&](market::Subset s) {
    double v = 0.0;
    for (int i = 0; i < n; ++i) {
      if (!(s >> i & 1)) continue;
      v += w[i];
      for (int j = i + 1; j < n; ++j) {
        if (s >> j & 1) v -= k[i][j];
      }
    }
    return v;
  });
}

// Random pairwise table whose first m agents form the same table for any
// n >= m drawn from the same seed, so capacities nest as agents are added.
inline market::SubmodularCapacity NestedPairwiseTable(int n,
                                                      std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  constexpr int kMax = market::kMaxAgents;
  std::vector<std::vector<double>> k(kMax, std::vector<double>(kMax, 0.0));
  for (int i = 0; i < kMax; ++i) {
    for (int j = i + 1; j < kMax; ++j) k[i][j] = k[j][i] = 0.08 * unit(rng);
  }
  std::vector<double> w(kMax);
  for (int i = 0; i < kMax; ++i) {
    double row = 0.0;
    for (int j = 0; j < kMax; ++j) row += k[i][j];
    w[i] = std::min(1.0, row + 0.1 + 0.2 * unit(rng));
  }
  w.resize(n);
  k.resize(n);
  for (auto& r : k) r.resize(n);
  return PairwiseTable(w, k);
}

// Mixture of concave functions of random modular weights. Interactions are
// of every order, not only pairwise; marginals stay below 1.
inline market::SubmodularCapacity RandomCoverageTable(int n,
                                                      std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  constexpr int kComponents = 3;
  std::vector<std::vector<double>> weight(kComponents, std::vector<double>(n));
  std::vector<double> scale(kComponents);
  for (int c = 0; c < kComponents; ++c) {
    scale[c] = 0.3 + unit(rng);
    for (int i = 0; i < n; ++i) weight[c][i] = 0.2 + 0.8 * unit(rng);
  }
  return market::SubmodularCapacity::FromFunction(n, [&](market::Subset s) {
    double v = 0.0;
    for (int c = 0; c < kComponents; ++c) {
      double load = 0.0;
      for (int i = 0; i < n; ++i) {
        if (s >> i & 1) load += weight[c][i];
      }
      // s (1 - exp(-load / s)) has slope <= 1; averaging keeps that bound.
      v += scale[c] * (1.0 - std::exp(-load / scale[c])) / kComponents;
    }
    return v;
  });
}

// Pairwise distinct bids in (0.05, 0.95), at least `gap` apart.
inline std::vector<double> RandomBids(int n, std::mt19937_64& rng,
                                      double gap = 0.02) {
  std::uniform_real_distribution<double> unit(0.05, 0.95);
  std::vector<double> bids;
  while (static_cast<int>(bids.size()) < n) {
    const double b = unit(rng);
    bool ok = true;
    for (double other : bids) ok = ok && std::abs(other - b) >= gap;
    if (ok) bids.push_back(b);
  }
  return bids;
}

}  // namespace credlab::testing

#endif  // CREDLAB_TESTS_TEST_INSTANCES_H_
