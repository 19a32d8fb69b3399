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

// How hard is it to catch an inflated report? Hoeffding sample sizes for a
// single reporter checked against Bernoulli outcomes, and the probability
// that a deviant stands out among honest noisy peers.
//
// Monte Carlo results are bit-identical for a given seed regardless of the
// number of worker threads: every trial draws from its own generator seeded
// from (master seed, trial index).

#ifndef CREDLAB_DETECTION_H_
#define CREDLAB_DETECTION_H_

#include <cstdint>
#include <random>

namespace credlab::detection {

struct DetectionSpec {
  double delta = 0.1;  // inflation magnitude
  double alpha = 0.05;  // significance level
  double sigma = 1.0;  // reporter noise (competition case)
  int n = 2;  // reporter count (competition case)
  long long trials = 10000;
  std::uint64_t seed = 0x5eed;
};

void ValidateSpec(const DetectionSpec& spec);

// ceil((2 / delta^2) ln(2 / alpha)).
long long HoeffdingSampleBound(double delta, double alpha);

// Fraction of trials in which K Bernoulli(p_true) outcomes give a sample
// mean at least |r_report - p_true| / 2 away from r_report. Throws
// PreconditionError when the report is truthful.
double SimulateDetection(double p_true, double r_report, long long samples,
                         const DetectionSpec& spec);

// 1 - Phi(-delta sqrt(n) / sigma).
double CompetitionDetectionProb(double delta, double sigma, int n);

// Monte Carlo counterpart of CompetitionDetectionProb. Honest reporters and
// the receiver's own outcome signal each see truth + N(0, sigma^2); the
// deviant reports truth + delta. The receiver flags the deviant when it
// sits above the mean of the n independent signals (a one-sided z-test with
// critical value 0, which is what the closed form's null rate of 1/2
// implies). Throws PreconditionError for n < 2.
double CompetitionMc(double delta, double sigma, int n,
                     const DetectionSpec& spec);

// Seed for trial `index` of a run with master seed `seed` (SplitMix64).
std::uint64_t TrialSeed(std::uint64_t seed, std::uint64_t index);

// Draws doubles in [0, 1) with 53 random bits and standard normals by the
// polar method, so the stream depends only on the mt19937_64 sequence.
class TrialRng {
 public:
  explicit TrialRng(std::uint64_t seed) : engine_(seed) {}

  double Uniform() { return (engine_() >> 11) * 0x1.0p-53; }
  bool Bernoulli(double p) { return Uniform() < p; }
  double Normal();

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace credlab::detection

#endif  // CREDLAB_DETECTION_H_
