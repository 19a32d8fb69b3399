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

#include "credlab/detection.h"

#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

#include "credlab/errors.h"
#include "credlab/numerics.h"
#include "credlab/parallel.h"

namespace credlab::detection {

namespace {

constexpr long long kTrialsPerChunk = 1024;

// Runs `trials` independent trials in fixed-size chunks and returns the
// number for which trial(rng) returned true.
template <typename Trial>
long long CountFlags(long long trials, std::uint64_t seed, Trial trial) {
  const long long chunks = (trials + kTrialsPerChunk - 1) / kTrialsPerChunk;
  const std::vector<long long> counts =
      ParallelMap(static_cast<std::size_t>(chunks), [&](std::size_t c) {
        long long flagged = 0;
        const long long begin = static_cast<long long>(c) * kTrialsPerChunk;
        const long long end = std::min(trials, begin + kTrialsPerChunk);
        for (long long t = begin; t < end; ++t) {
          TrialRng rng(TrialSeed(seed, static_cast<std::uint64_t>(t)));
          if (trial(rng)) ++flagged;
        }
        return flagged;
      });
  return std::accumulate(counts.begin(), counts.end(), 0LL);
}

}  // namespace

void ValidateSpec(const DetectionSpec& spec) {
  std::ostringstream msg;
  if (!(spec.delta > 0.0 && spec.delta < 1.0)) {
    msg << "delta must lie in (0, 1), got " << spec.delta;
  } else if (!(spec.alpha > 0.0 && spec.alpha < 1.0)) {
    msg << "alpha must lie in (0, 1), got " << spec.alpha;
  } else if (!(spec.sigma > 0.0)) {
    msg << "sigma must be > 0, got " << spec.sigma;
  } else if (spec.n < 2) {
    msg << "n must be >= 2, got " << spec.n;
  } else if (spec.trials < 1) {
    msg << "trials must be >= 1, got " << spec.trials;
  } else {
    return;
  }
  throw ParameterError(msg.str());
}

std::uint64_t TrialSeed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double TrialRng::Normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u, v, s;
  do {
    u = 2.0 * Uniform() - 1.0;
    v = 2.0 * Uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double scale = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * scale;
  has_spare_ = true;
  return u * scale;
}

long long HoeffdingSampleBound(double delta, double alpha) {
  if (!(delta > 0.0 && delta <= 1.0)) {
    throw ParameterError("Hoeffding bound needs delta in (0, 1]");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw ParameterError("Hoeffding bound needs alpha in (0, 1)");
  }
  return numerics::CeilTolerant(2.0 / (delta * delta) * std::log(2.0 / alpha));
}

double SimulateDetection(double p_true, double r_report, long long samples,
                         const DetectionSpec& spec) {
  if (!(p_true >= 0.0 && p_true <= 1.0 && r_report >= 0.0 &&
        r_report <= 1.0)) {
    throw ParameterError("probabilities must lie in [0, 1]");
  }
  const double gap = std::abs(r_report - p_true);
  if (gap == 0.0) {
    throw PreconditionError("truthful report: there is nothing to detect");
  }
  if (samples < 1) throw ParameterError("need at least one observation");
  if (spec.trials < 1) throw ParameterError("trials must be >= 1");
  const long long flagged = CountFlags(spec.trials, spec.seed, [&](TrialRng& rng) {
    long long successes = 0;
    for (long long k = 0; k < samples; ++k) successes += rng.Bernoulli(p_true);
    const double mean = static_cast<double>(successes) / samples;
    return std::abs(mean - r_report) >= 0.5 * gap;
  });
  return static_cast<double>(flagged) / spec.trials;
}

double CompetitionDetectionProb(double delta, double sigma, int n) {
  if (!(delta >= 0.0) || !(sigma > 0.0) || n < 1) {
    throw ParameterError(
        "competition detection needs delta >= 0, sigma > 0, n >= 1");
  }
  return 1.0 - numerics::StandardNormalCdf(-delta * std::sqrt(n) / sigma);
}

double CompetitionMc(double delta, double sigma, int n,
                     const DetectionSpec& spec) {
  if (n < 2) throw PreconditionError("competition needs n >= 2 reporters");
  if (!(delta >= 0.0) || !(sigma > 0.0)) {
    throw ParameterError("competition needs delta >= 0 and sigma > 0");
  }
  if (spec.trials < 1) throw ParameterError("trials must be >= 1");
  const double truth = 0.5;
  const long long flagged = CountFlags(spec.trials, spec.seed, [&](TrialRng& rng) {
    // n - 1 honest reports plus the receiver's own outcome signal.
    double sum = 0.0;
    for (int k = 0; k < n; ++k) sum += truth + sigma * rng.Normal();
    const double pooled = sum / n;
    const double deviant = truth + delta;
    const double z = (deviant - pooled) / (sigma / std::sqrt(n));
    return z > 0.0;
  });
  return static_cast<double>(flagged) / spec.trials;
}

}  // namespace credlab::detection
