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

// Strictly proper scoring rules for a binary outcome, represented by their
// convex generator G. The expected score of report r under true probability
// p is the Savage form G(r) + G'(r)(p - r); its shortfall against truthful
// reporting is the Bregman divergence of p from r.

#ifndef CREDLAB_SCORING_H_
#define CREDLAB_SCORING_H_

#include <string>
#include <variant>

namespace credlab::scoring {

struct BrierRule {};

// G(p) = p^alpha, alpha > 1.
struct PowerRule {
  double alpha;
};

using GeneratorKind = std::variant<BrierRule, PowerRule>;

// Default report/type domain for power rules with alpha < 2, whose
// curvature blows up at 0.
inline constexpr double kPowerDomainLo = 0.05;
inline constexpr double kPowerDomainHi = 0.95;

class Generator {
 public:
  // G(p) = p^2 on [0, 1].
  static Generator Brier();
  // G(p) = p^alpha. For alpha < 2 the domain defaults to
  // [kPowerDomainLo, kPowerDomainHi]; otherwise [0, 1].
  static Generator Power(double alpha);
  static Generator Power(double alpha, double domain_lo, double domain_hi);

  // G(p) + a + b p. Scores shift by an affine amount; regret is unchanged.
  Generator WithAffineShift(double a, double b) const;

  const GeneratorKind& kind() const { return kind_; }
  bool is_brier() const { return std::holds_alternative<BrierRule>(kind_); }
  // Exponent of the power family; 2 for Brier.
  double alpha() const;
  double domain_lo() const { return domain_lo_; }
  double domain_hi() const { return domain_hi_; }
  bool InDomain(double p) const;

  double Value(double p) const;
  double Derivative(double p) const;
  double SecondDerivative(double p) const;

  std::string Name() const;

 private:
  Generator(GeneratorKind kind, double lo, double hi);

  GeneratorKind kind_;
  double domain_lo_;
  double domain_hi_;
  double shift_a_ = 0.0;
  double shift_b_ = 0.0;
};

// Throws DomainError when p lies outside the generator's domain.
void CheckDomain(const Generator& gen, double p, const char* what);

// G(r) + G'(r)(p - r).
double ExpectedScore(const Generator& gen, double report, double type);

// G(p) - G(r) - G'(r)(p - r) >= 0, zero iff report == type.
double ScoringRegret(const Generator& gen, double report, double type);

// G''(p) > 0. Throws DomainError at a curvature singularity or zero.
double Curvature(const Generator& gen, double p);

}  // namespace credlab::scoring

#endif  // CREDLAB_SCORING_H_
