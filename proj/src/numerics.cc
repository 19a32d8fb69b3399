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

#include "credlab/numerics.h"

#include <cmath>
#include <sstream>
#include <vector>

#include "credlab/errors.h"

namespace credlab::numerics {

namespace {

constexpr double kInvPhi = 0.6180339887498948482;  // (sqrt(5) - 1) / 2

}  // namespace

double Simpson(const ScalarFn& f, double lo, double hi, int panels) {
  if (panels < 2 || panels % 2 != 0) {
    throw ParameterError("Simpson: panel count must be even and >= 2");
  }
  const double h = (hi - lo) / panels;
  double odd = 0.0;
  double even = 0.0;
  for (int k = 1; k < panels; ++k) {
    const double v = f(lo + k * h);
    (k % 2 == 1 ? odd : even) += v;
  }
  return h / 3.0 * (f(lo) + f(hi) + 4.0 * odd + 2.0 * even);
}

double SimpsonDoubling(const ScalarFn& f, double lo, double hi,
                       const SimpsonOptions& options) {
  if (!(hi > lo)) return 0.0;
  int panels = options.initial_panels;
  double h = (hi - lo) / panels;
  // Sum of f at the endpoints, at the current "even" interior nodes, and at
  // the current "odd" interior nodes. After doubling all old nodes become
  // even nodes and only the new midpoints need evaluating.
  const double ends = f(lo) + f(hi);
  double even = 0.0;
  double odd = 0.0;
  for (int k = 1; k < panels; ++k) {
    const double v = f(lo + k * h);
    (k % 2 == 1 ? odd : even) += v;
  }
  double estimate = h / 3.0 * (ends + 4.0 * odd + 2.0 * even);
  double diff = 0.0;
  while (panels < options.max_panels) {
    even += odd;
    odd = 0.0;
    panels *= 2;
    h *= 0.5;
    for (int k = 1; k < panels; k += 2) odd += f(lo + k * h);
    const double next = h / 3.0 * (ends + 4.0 * odd + 2.0 * even);
    diff = std::abs(next - estimate);
    estimate = next;
    if (diff < options.tolerance) return estimate;
  }
  if (diff > options.failure_tolerance || !std::isfinite(estimate)) {
    std::ostringstream msg;
    msg << "Simpson quadrature on [" << lo << ", " << hi
        << "] did not converge: last doubling moved the estimate by " << diff;
    throw NumericsError(msg.str());
  }
  return estimate;
}

Maximum GoldenSectionMax(const ScalarFn& f, double lo, double hi,
                         double width) {
  double a = lo;
  double b = hi;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > width) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(d);
    }
  }
  Maximum best{c, fc};
  if (fd > best.value) best = {d, fd};
  for (double x : {lo, hi}) {
    const double v = f(x);
    if (v > best.value) best = {x, v};
  }
  return best;
}

double Bisect(const ScalarFn& f, double lo, double hi, double width) {
  double flo = f(lo);
  const double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0) == (fhi > 0)) {
    std::ostringstream msg;
    msg << "Bisect: no sign change on [" << lo << ", " << hi << "]";
    throw NumericsError(msg.str());
  }
  for (int iter = 0; iter < 200 && hi - lo > width; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm > 0) == (flo > 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double StandardNormalCdf(double x) {
  return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

long long CeilTolerant(double x, double slack) {
  const double r = std::round(x);
  if (std::abs(x - r) <= slack) return static_cast<long long>(r);
  return static_cast<long long>(std::ceil(x));
}

}  // namespace credlab::numerics
