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

#include "credlab/scoring.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "credlab/errors.h"

namespace credlab::scoring {

namespace {

// Reports that overshoot the domain by float noise are accepted.
constexpr double kDomainSlack = 1e-12;

}  // namespace

Generator::Generator(GeneratorKind kind, double lo, double hi)
    : kind_(kind), domain_lo_(lo), domain_hi_(hi) {
  if (!(0.0 <= lo && lo < hi && hi <= 1.0)) {
    std::ostringstream msg;
    msg << "generator domain must satisfy 0 <= lo < hi <= 1, got [" << lo
        << ", " << hi << "]";
    throw ParameterError(msg.str());
  }
}

Generator Generator::Brier() { return Generator(BrierRule{}, 0.0, 1.0); }

Generator Generator::Power(double alpha) {
  if (alpha < 2.0) return Power(alpha, kPowerDomainLo, kPowerDomainHi);
  return Power(alpha, 0.0, 1.0);
}

Generator Generator::Power(double alpha, double domain_lo, double domain_hi) {
  if (!(alpha > 1.0) || !std::isfinite(alpha)) {
    throw ParameterError("power generator needs alpha > 1");
  }
  if (alpha < 2.0 && domain_lo <= 0.0) {
    throw ParameterError(
        "power generator with alpha < 2 needs domain_lo > 0 (curvature "
        "singularity at 0)");
  }
  return Generator(PowerRule{alpha}, domain_lo, domain_hi);
}

Generator Generator::WithAffineShift(double a, double b) const {
  Generator g = *this;
  g.shift_a_ += a;
  g.shift_b_ += b;
  return g;
}

double Generator::alpha() const {
  if (const auto* power = std::get_if<PowerRule>(&kind_)) return power->alpha;
  return 2.0;
}

bool Generator::InDomain(double p) const {
  return p >= domain_lo_ - kDomainSlack && p <= domain_hi_ + kDomainSlack;
}

double Generator::Value(double p) const {
  const double affine = shift_a_ + shift_b_ * p;
  if (is_brier()) return p * p + affine;
  return std::pow(p, alpha()) + affine;
}

double Generator::Derivative(double p) const {
  if (is_brier()) return 2.0 * p + shift_b_;
  const double a = alpha();
  return a * std::pow(p, a - 1.0) + shift_b_;
}

double Generator::SecondDerivative(double p) const {
  if (is_brier()) return 2.0;
  const double a = alpha();
  return a * (a - 1.0) * std::pow(p, a - 2.0);
}

std::string Generator::Name() const {
  std::ostringstream out;
  if (is_brier()) {
    out << "brier";
  } else {
    out << "power(" << alpha() << ")";
  }
  return out.str();
}

void CheckDomain(const Generator& gen, double p, const char* what) {
  if (!std::isfinite(p) || !gen.InDomain(p)) {
    std::ostringstream msg;
    msg << what << " = " << p << " outside generator domain ["
        << gen.domain_lo() << ", " << gen.domain_hi() << "] of "
        << gen.Name();
    throw DomainError(msg.str());
  }
}

double ExpectedScore(const Generator& gen, double report, double type) {
  CheckDomain(gen, report, "report");
  CheckDomain(gen, type, "type");
  return gen.Value(report) + gen.Derivative(report) * (type - report);
}

double ScoringRegret(const Generator& gen, double report, double type) {
  CheckDomain(gen, report, "report");
  CheckDomain(gen, type, "type");
  if (report == type) return 0.0;
  if (gen.is_brier()) {
    const double d = report - type;
    return d * d;
  }
  const double regret = gen.Value(type) - gen.Value(report) -
                        gen.Derivative(report) * (type - report);
  return std::max(regret, 0.0);
}

double Curvature(const Generator& gen, double p) {
  CheckDomain(gen, p, "type");
  const double c = gen.SecondDerivative(p);
  if (!(c > 0.0) || !std::isfinite(c)) {
    std::ostringstream msg;
    msg << "curvature of " << gen.Name() << " at " << p << " is " << c
        << "; strict convexity fails there";
    throw DomainError(msg.str());
  }
  return c;
}

}  // namespace credlab::scoring
