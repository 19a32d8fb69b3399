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

// The strategic reporter. Its objective trades scoring regret against an
// approval payoff q(r):
//
//   V(r; p) = -beta * Regret_G(r, p) + gamma * q(r)
//
// This header provides exact best responses to that objective, the
// first-order (small gamma) prediction of the report, the predicted scoring
// loss, and the gamma thresholds at which types with a flat q start to lie.

#ifndef CREDLAB_AGENT_H_
#define CREDLAB_AGENT_H_

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "credlab/scoring.h"

namespace credlab::agent {

// q(r) = clamp(a + b r, 0, 1).
struct AffineApproval {
  double a;
  double b;
};

// q(r) = logistic((r - r_min) / tau).
struct SigmoidApproval {
  double r_min;
  double tau;
};

// q(r) = 1 iff r >= r0.
struct StepApproval {
  double r0;
};

// Piecewise-linear interpolation of `values` placed on a uniform grid over
// [0, 1] (values.front() at 0, values.back() at 1).
struct TabulatedApproval {
  std::vector<double> values;
};

using ApprovalKind = std::variant<AffineApproval, SigmoidApproval,
                                  StepApproval, TabulatedApproval>;

class ApprovalFunction {
 public:
  static ApprovalFunction Affine(double a, double b);
  static ApprovalFunction Sigmoid(double r_min, double tau);
  static ApprovalFunction Step(double r0);
  static ApprovalFunction Tabulated(std::vector<double> values);
  // Tabulates f on `points` uniform nodes of [0, 1], clamping into [0, 1].
  template <typename F>
  static ApprovalFunction TabulateFrom(F&& f, int points);

  const ApprovalKind& kind() const { return kind_; }
  bool is_step() const { return std::holds_alternative<StepApproval>(kind_); }
  std::optional<double> step_threshold() const;

  // Value in [0, 1].
  double operator()(double r) const;
  // Throws NotDifferentiableError for a step.
  double Derivative(double r) const;
  double SecondDerivative(double r) const;

  // Affine only: whether a + b r leaves [0, 1] somewhere on [lo, hi].
  bool ClampActive(double lo, double hi) const;

  std::string Describe() const;

 private:
  explicit ApprovalFunction(ApprovalKind kind) : kind_(std::move(kind)) {}

  ApprovalKind kind_;
};

template <typename F>
ApprovalFunction ApprovalFunction::TabulateFrom(F&& f, int points) {
  std::vector<double> values(points);
  for (int k = 0; k < points; ++k) {
    const double v = f(static_cast<double>(k) / (points - 1));
    values[k] = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
  }
  return Tabulated(std::move(values));
}

struct AgentParams {
  double beta = 1.0;   // calibration weight, > 0
  double gamma = 0.0;  // approval (autonomy) weight, >= 0
};

void ValidateParams(const AgentParams& params);

// Number of grid points the exhaustive best-response search uses.
inline constexpr int kBestResponseGrid = 4001;
// Bracket width at which golden-section refinement stops.
inline constexpr double kRefineWidth = 1e-10;

double CombinedObjective(const scoring::Generator& gen,
                         const ApprovalFunction& q, const AgentParams& params,
                         double report, double type);

// Best responses for a fixed (generator, approval, params) triple. Caches
// q, G and G' on the report grid so repeated calls over many types cost one
// pass of multiply-adds each. Results match BestResponse() exactly.
class BestResponder {
 public:
  BestResponder(const scoring::Generator& gen, const ApprovalFunction& q,
                const AgentParams& params);

  double operator()(double type) const;

  const scoring::Generator& generator() const { return gen_; }
  const ApprovalFunction& approval() const { return q_; }
  const AgentParams& params() const { return params_; }

 private:
  scoring::Generator gen_;
  ApprovalFunction q_;
  AgentParams params_;
  std::vector<double> grid_;
  std::vector<double> approval_;
  std::vector<double> g_;
  std::vector<double> dg_;
};

// Global maximizer of CombinedObjective over the generator's report domain.
// Steps are solved by the exact binary comparison {type, r0}; other
// approval functions by a 4001-point grid followed by golden-section
// refinement. Ties go to the report closest to the truth.
double BestResponse(const scoring::Generator& gen, const ApprovalFunction& q,
                    const AgentParams& params, double type);

// type + gamma q'(type) / (beta G''(type)).
double FirstOrderPrediction(const scoring::Generator& gen,
                            const ApprovalFunction& q,
                            const AgentParams& params, double type);

// (gamma^2 / 2) q'(type)^2 / (beta G''(type)).
double PredictedScoringLoss(const scoring::Generator& gen,
                            const ApprovalFunction& q,
                            const AgentParams& params, double type);

struct ResidualThreshold {
  // beta G''(p0) / q''(p0); +inf when q''(p0) <= 0.
  double gamma_local;
  // Regret of jumping to argmax q divided by the approval gain.
  double gamma_global;
  // Report that attains the maximum of q.
  double jump_report;

  double effective() const {
    return gamma_local < gamma_global ? gamma_local : gamma_global;
  }
};

// Thresholds above which a zero-gradient type p0 stops reporting truthfully.
// Throws NoConflictError for constant q and PreconditionError when
// q'(p0) != 0.
ResidualThreshold ResidualGammaThreshold(const scoring::Generator& gen,
                                         double beta, double p0,
                                         const ApprovalFunction& q);

}  // namespace credlab::agent

#endif  // CREDLAB_AGENT_H_
