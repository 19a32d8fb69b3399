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

// The principal's screening problem. A principal commits to an approval
// function q; an agent of private type p (its true success probability)
// best-responds with a report r*(p); the principal approves with
// probability q(r*(p)) and otherwise falls back to delegation. Welfare is
//
//   U_P(q) = u_d + integral of qtilde(p) * Pi(p) * f(p) dp,
//
// with qtilde(p) = q(r*(p)) the induced screening and
// Pi(p) = p (u_s - u_f) - (u_d - u_f) the surplus from approving type p.

#ifndef CREDLAB_OVERSIGHT_H_
#define CREDLAB_OVERSIGHT_H_

#include <string>
#include <variant>
#include <vector>

#include "credlab/agent.h"
#include "credlab/scoring.h"

namespace credlab::oversight {

struct PrincipalParams {
  double u_s = 1.0;   // success
  double u_f = -1.0;  // failure
  double u_d = 0.0;   // delegation
};

// Throws ParameterError unless u_s > u_d > u_f.
void ValidatePrincipal(const PrincipalParams& principal);

// Success probability at which approving and delegating tie.
double PMin(const PrincipalParams& principal);

// Pi(p): net gain from approving type p over delegating.
double Surplus(const PrincipalParams& principal, double p);

struct UniformTypes {
  double lo;
  double hi;
};

struct BetaTypes {
  double a;
  double b;
};

class TypeDistribution {
 public:
  static TypeDistribution Uniform(double lo, double hi);
  // Shapes restricted to (0, 50].
  static TypeDistribution Beta(double a, double b);

  const std::variant<UniformTypes, BetaTypes>& kind() const { return kind_; }
  double lo() const;
  double hi() const;
  // Zero outside [lo, hi].
  double Density(double p) const;
  std::string Describe() const;

 private:
  TypeDistribution(std::variant<UniformTypes, BetaTypes> kind, double log_norm)
      : kind_(kind), log_norm_(log_norm) {}

  std::variant<UniformTypes, BetaTypes> kind_;
  double log_norm_;  // log B(a, b) for Beta
};

struct OversightGame {
  scoring::Generator gen = scoring::Generator::Brier();
  PrincipalParams principal;
  agent::AgentParams agent{1.0, 0.04};
  TypeDistribution dist = TypeDistribution::Uniform(0.0, 1.0);
};

// Brier, Uniform(0, 1), u = (1, -1, 0), beta = 1, gamma = 0.04: p_min = 0.5,
// r0 = 0.7, first-best utility 0.25.
OversightGame CanonicalGame();

// Throws ParameterError if the principal ordering fails, the agent weights
// are invalid, or the type support leaves the generator's domain.
void ValidateGame(const OversightGame& game);

// For Brier: gamma / beta <= (1 - p_min)^2. For other generators: an
// in-domain step threshold exists.
bool NonDegenerate(const OversightGame& game);

// qtilde(p) = q(best response of type p).
double InducedScreening(const OversightGame& game,
                        const agent::ApprovalFunction& q, double p);

// Quadrature options for the welfare integrals below.
struct WelfareQuadrature {
  double tolerance = 1e-10;
  double failure_tolerance = 1e-6;
  int max_panels = 1 << 12;
  // Types sampled when scanning for jumps in the induced screening.
  int scan_points = 129;
};

// U_P(q). Steps are integrated in closed form around the inflation
// threshold type; other q are integrated piecewise between the jumps of
// the agent's best response. Throws NumericsError when a piece fails to
// converge.
double PrincipalUtility(const OversightGame& game,
                        const agent::ApprovalFunction& q,
                        const WelfareQuadrature& quad = {});

// u_d + integral over p >= p_min of Pi(p) f(p).
double FirstBestUtility(const OversightGame& game);

struct ThresholdType {
  double type;
  // Every type in the domain inflates (cost at domain_lo is below gamma).
  bool all_inflate;
};

// Lowest type that inflates to report r0 under a step at r0: the unique p*
// with beta * Regret(r0, p*) = gamma.
ThresholdType ThresholdTypeFor(const OversightGame& game, double r0);

// Step threshold r0 whose inflation threshold type is p_min. Closed form
// p_min + sqrt(gamma / beta) for Brier, bisection otherwise. Throws
// DegenerateRegimeError when no r0 inside the domain works.
double OptimalStepThreshold(const OversightGame& game);

// FirstBestUtility - PrincipalUtility(Affine(a, b)).
double AffineWelfareGap(const OversightGame& game, double a, double b);

// Candidate sigmoid approvals for the smooth welfare-gap estimator.
struct SigmoidSearch {
  double r_min_lo = 0.0;
  double r_min_hi = 1.0;
  int r_min_points = 41;
  // Multiples of tau_min to scan. Must all be >= 1.
  std::vector<double> tau_multiples = {1.0, 2.0, 4.0};
  bool refine = true;
};

struct WelfareGapEstimate {
  double gap_hat;
  double best_utility;
  agent::ApprovalFunction best_q;
};

// Upper estimate of the welfare gap under smooth oversight: first-best minus
// the best principal utility over sigmoid approvals with tau >= tau_min.
WelfareGapEstimate WelfareGapSmooth(const OversightGame& game, double tau_min,
                                    const SigmoidSearch& search = {});

struct GapCurvePoint {
  double alpha;
  double gap_hat;
  double best_r_min;
  double best_tau;
};

// WelfareGapSmooth for G(p) = p^alpha with every other setting copied from
// `game_template`, whose generator supplies the domain. Points are computed
// in parallel and returned in input order.
std::vector<GapCurvePoint> PowerFamilyGapCurve(
    const OversightGame& game_template, const std::vector<double>& alphas,
    double tau_min, const SigmoidSearch& search = {});

struct RegulationDecision {
  double gain;
  bool regulate;
};

// Welfare recovered by imposing first-best screening over the organic
// approval function, and whether it beats the regulatory cost.
RegulationDecision RegulationGain(const OversightGame& game,
                                  const agent::ApprovalFunction& q_organic,
                                  double regulation_cost);

struct StaticsReport {
  double p_min;
  // d p_min / d u_d by central difference.
  double dpmin_dud;
  double r0_uniform;
  double r0_beta22;
  // Cross-agent sample size ceil((2 / delta^2) ln(2 / alpha)).
  long long sample_size;
};

StaticsReport Statics(const OversightGame& game, double detect_delta = 0.1,
                      double detect_alpha = 0.05);

}  // namespace credlab::oversight

#endif  // CREDLAB_OVERSIGHT_H_
