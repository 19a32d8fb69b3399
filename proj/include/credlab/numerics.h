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

// Small numerical kernels shared by the modules: composite Simpson with
// panel doubling, golden-section maximization, bisection, and the standard
// normal CDF.

#ifndef CREDLAB_NUMERICS_H_
#define CREDLAB_NUMERICS_H_

#include <cmath>
#include <cstddef>
#include <functional>

namespace credlab::numerics {

using ScalarFn = std::function<double(double)>;

struct SimpsonOptions {
  int initial_panels = 16;
  int max_panels = 1 << 14;
  // Successive estimates must agree to within this absolute tolerance.
  double tolerance = 1e-10;
  // Disagreement above this at max_panels raises NumericsError.
  double failure_tolerance = 1e-6;
};

// Composite Simpson rule with a fixed, even number of panels.
double Simpson(const ScalarFn& f, double lo, double hi, int panels);

// Composite Simpson with panel doubling. Earlier function values are reused
// across doublings. Returns 0 for an empty interval.
double SimpsonDoubling(const ScalarFn& f, double lo, double hi,
                       const SimpsonOptions& options = {});

struct Maximum {
  double x;
  double value;
};

// Golden-section search for a maximum of a unimodal function on [lo, hi],
// stopping once the bracket is narrower than `width`. The endpoints are
// considered as candidates too.
Maximum GoldenSectionMax(const ScalarFn& f, double lo, double hi,
                         double width = 1e-10);

// Root of a function with a sign change on [lo, hi] by bisection, to an
// absolute bracket width. Throws NumericsError without a sign change.
double Bisect(const ScalarFn& f, double lo, double hi, double width = 1e-14);

double StandardNormalCdf(double x);

inline double Logistic(double x) {
  // Split on sign to keep exp() from overflowing.
  if (x >= 0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// ceil(x) that ignores rounding noise just above an integer.
long long CeilTolerant(double x, double slack = 1e-9);

}  // namespace credlab::numerics

#endif  // CREDLAB_NUMERICS_H_
