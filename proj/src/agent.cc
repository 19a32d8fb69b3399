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

#include "credlab/agent.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "credlab/errors.h"
#include "credlab/numerics.h"

namespace credlab::agent {

namespace {

using scoring::Generator;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double Clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

double TabulatedValue(const std::vector<double>& values, double r) {
  const int n = static_cast<int>(values.size());
  const double x = Clamp01(r) * (n - 1);
  const int k = std::min(static_cast<int>(x), n - 2);
  const double t = x - k;
  // Cubic Hermite with central-difference slopes (second-order one-sided
  // slopes at the ends). Quadratics are reproduced exactly and q stays C1,
  // so a tabulated smooth rule has no kinks at the nodes.
  auto slope = [&](int i) {
    if (n < 3) return values[1] - values[0];
    if (i == 0) return 0.5 * (-3.0 * values[0] + 4.0 * values[1] - values[2]);
    if (i == n - 1) {
      return 0.5 * (3.0 * values[n - 1] - 4.0 * values[n - 2] + values[n - 3]);
    }
    return 0.5 * (values[i + 1] - values[i - 1]);
  };
  const double t2 = t * t;
  const double t3 = t2 * t;
  const double v = (2 * t3 - 3 * t2 + 1) * values[k] +
                   (t3 - 2 * t2 + t) * slope(k) +
                   (-2 * t3 + 3 * t2) * values[k + 1] + (t3 - t2) * slope(k + 1);
  return Clamp01(v);
}

double TabulatedSpacing(const std::vector<double>& values) {
  return 1.0 / (static_cast<double>(values.size()) - 1.0);
}

// Lexicographic "better" for reports: higher objective, then closer to the
// truth.
bool Better(double value, double report, double best_value, double best_report,
            double type) {
  if (value != best_value) return value > best_value;
  return std::abs(report - type) < std::abs(best_report - type);
}

}  // namespace

ApprovalFunction ApprovalFunction::Affine(double a, double b) {
  if (!std::isfinite(a) || !std::isfinite(b)) {
    throw ParameterError("affine approval needs finite coefficients");
  }
  return ApprovalFunction(AffineApproval{a, b});
}

ApprovalFunction ApprovalFunction::Sigmoid(double r_min, double tau) {
  if (!(r_min >= 0.0 && r_min <= 1.0)) {
    throw ParameterError("sigmoid approval needs r_min in [0, 1]");
  }
  if (!(tau > 0.0)) throw ParameterError("sigmoid approval needs tau > 0");
  return ApprovalFunction(SigmoidApproval{r_min, tau});
}

ApprovalFunction ApprovalFunction::Step(double r0) {
  if (!(r0 >= 0.0 && r0 <= 1.0)) {
    throw ParameterError("step approval needs r0 in [0, 1]");
  }
  return ApprovalFunction(StepApproval{r0});
}

ApprovalFunction ApprovalFunction::Tabulated(std::vector<double> values) {
  if (values.size() < 3) {
    throw ParameterError("tabulated approval needs at least 3 grid values");
  }
  for (double v : values) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw ParameterError("tabulated approval values must lie in [0, 1]");
    }
  }
  return ApprovalFunction(TabulatedApproval{std::move(values)});
}

std::optional<double> ApprovalFunction::step_threshold() const {
  if (const auto* step = std::get_if<StepApproval>(&kind_)) return step->r0;
  return std::nullopt;
}

double ApprovalFunction::operator()(double r) const {
  return std::visit(
      Overloaded{
          [r](const AffineApproval& q) { return Clamp01(q.a + q.b * r); },
          [r](const SigmoidApproval& q) {
            return numerics::Logistic((r - q.r_min) / q.tau);
          },
          [r](const StepApproval& q) { return r >= q.r0 ? 1.0 : 0.0; },
          [r](const TabulatedApproval& q) {
            return TabulatedValue(q.values, r);
          },
      },
      kind_);
}

double ApprovalFunction::Derivative(double r) const {
  return std::visit(
      Overloaded{
          [r](const AffineApproval& q) {
            const double v = q.a + q.b * r;
            return (v < 0.0 || v > 1.0) ? 0.0 : q.b;
          },
          [r](const SigmoidApproval& q) {
            const double s = numerics::Logistic((r - q.r_min) / q.tau);
            return s * (1.0 - s) / q.tau;
          },
          [](const StepApproval&) -> double {
            throw NotDifferentiableError(
                "step approval has no derivative at its threshold and zero "
                "elsewhere; use the exact best response instead");
          },
          [r](const TabulatedApproval& q) {
            const double h = TabulatedSpacing(q.values);
            const double lo = std::max(0.0, r - h);
            const double hi = std::min(1.0, r + h);
            return (TabulatedValue(q.values, hi) -
                    TabulatedValue(q.values, lo)) /
                   (hi - lo);
          },
      },
      kind_);
}

double ApprovalFunction::SecondDerivative(double r) const {
  return std::visit(
      Overloaded{
          [](const AffineApproval&) { return 0.0; },
          [r](const SigmoidApproval& q) {
            const double s = numerics::Logistic((r - q.r_min) / q.tau);
            return s * (1.0 - s) * (1.0 - 2.0 * s) / (q.tau * q.tau);
          },
          [](const StepApproval&) -> double {
            throw NotDifferentiableError("step approval is not differentiable");
          },
          [r](const TabulatedApproval& q) {
            const double h = TabulatedSpacing(q.values);
            const double c = std::clamp(r, h, 1.0 - h);
            return (TabulatedValue(q.values, c + h) -
                    2.0 * TabulatedValue(q.values, c) +
                    TabulatedValue(q.values, c - h)) /
                   (h * h);
          },
      },
      kind_);
}

bool ApprovalFunction::ClampActive(double lo, double hi) const {
  const auto* affine = std::get_if<AffineApproval>(&kind_);
  if (affine == nullptr) return false;
  for (double r : {lo, hi}) {
    const double v = affine->a + affine->b * r;
    if (v < 0.0 || v > 1.0) return true;
  }
  return false;
}

std::string ApprovalFunction::Describe() const {
  std::ostringstream out;
  std::visit(Overloaded{
                 [&](const AffineApproval& q) {
                   out << "affine(" << q.a << "," << q.b << ")";
                 },
                 [&](const SigmoidApproval& q) {
                   out << "sigmoid(" << q.r_min << "," << q.tau << ")";
                 },
                 [&](const StepApproval& q) { out << "step(" << q.r0 << ")"; },
                 [&](const TabulatedApproval& q) {
                   out << "tabulated(" << q.values.size() << ")";
                 },
             },
             kind_);
  return out.str();
}

void ValidateParams(const AgentParams& params) {
  if (!(params.beta > 0.0) || !std::isfinite(params.beta)) {
    throw ParameterError("beta must be > 0");
  }
  if (!(params.gamma >= 0.0) || !std::isfinite(params.gamma)) {
    throw ParameterError("gamma must be >= 0");
  }
}

double CombinedObjective(const Generator& gen, const ApprovalFunction& q,
                         const AgentParams& params, double report,
                         double type) {
  return -params.beta * scoring::ScoringRegret(gen, report, type) +
         params.gamma * q(report);
}

BestResponder::BestResponder(const Generator& gen, const ApprovalFunction& q,
                             const AgentParams& params)
    : gen_(gen), q_(q), params_(params) {
  ValidateParams(params_);
  if (q_.is_step()) return;
  const double lo = gen_.domain_lo();
  const double hi = gen_.domain_hi();
  const double step = (hi - lo) / (kBestResponseGrid - 1);
  grid_.resize(kBestResponseGrid);
  approval_.resize(kBestResponseGrid);
  g_.resize(kBestResponseGrid);
  dg_.resize(kBestResponseGrid);
  for (int k = 0; k < kBestResponseGrid; ++k) {
    const double r = (k == kBestResponseGrid - 1) ? hi : lo + k * step;
    grid_[k] = r;
    approval_[k] = q_(r);
    g_[k] = gen_.Value(r);
    dg_[k] = gen_.Derivative(r);
  }
}

double BestResponder::operator()(double type) const {
  scoring::CheckDomain(gen_, type, "type");
  const double lo = gen_.domain_lo();
  const double hi = gen_.domain_hi();
  auto objective = [&](double r) {
    return CombinedObjective(gen_, q_, params_, r, type);
  };

  if (auto r0 = q_.step_threshold()) {
    // Only two reports can be optimal: the truth, or the cheapest report
    // that clears the threshold.
    if (type >= *r0 || *r0 > hi) return type;
    const double inflate = std::max(*r0, lo);
    // The two values can tie exactly in real arithmetic (type at the
    // inflation threshold); rounding must not break that tie toward
    // inflating.
    const double gain = objective(inflate) - objective(type);
    const double scale = std::max({1.0, params_.gamma, params_.beta});
    return gain > 1e-12 * scale ? inflate : type;
  }

  // Same arithmetic as ScoringRegret, with G and G' read from the cache.
  const double beta = params_.beta;
  const double gamma = params_.gamma;
  const bool brier = gen_.is_brier();
  const double g_type = gen_.Value(type);
  int best_k = 0;
  double best_value = -std::numeric_limits<double>::infinity();
  double best_report = lo;
  for (int k = 0; k < kBestResponseGrid; ++k) {
    const double r = grid_[k];
    double regret = 0.0;
    if (r != type) {
      if (brier) {
        const double d = r - type;
        regret = d * d;
      } else {
        regret = std::max(g_type - g_[k] - dg_[k] * (type - r), 0.0);
      }
    }
    const double v = -beta * regret + gamma * approval_[k];
    if (Better(v, r, best_value, best_report, type)) {
      best_k = k;
      best_value = v;
      best_report = r;
    }
  }
  const double bracket_lo = grid_[std::max(best_k - 1, 0)];
  const double bracket_hi = grid_[std::min(best_k + 1, kBestResponseGrid - 1)];
  const numerics::Maximum refined = numerics::GoldenSectionMax(
      objective, bracket_lo, bracket_hi, kRefineWidth);
  if (Better(refined.value, refined.x, best_value, best_report, type)) {
    best_value = refined.value;
    best_report = refined.x;
  }
  const double truthful = objective(type);
  if (Better(truthful, type, best_value, best_report, type)) {
    best_report = type;
  }
  return best_report;
}

double BestResponse(const Generator& gen, const ApprovalFunction& q,
                    const AgentParams& params, double type) {
  return BestResponder(gen, q, params)(type);
}

namespace {

double ApprovalSlopeForPrediction(const Generator& gen,
                                  const ApprovalFunction& q,
                                  const AgentParams& params, double type) {
  ValidateParams(params);
  scoring::CheckDomain(gen, type, "type");
  if (q.is_step()) {
    throw NotDifferentiableError(
        "first-order analysis needs a differentiable approval function");
  }
  const double reach = params.gamma / params.beta;
  if (q.ClampActive(type - reach, type + reach)) {
    std::ostringstream msg;
    msg << "affine approval " << q.Describe() << " is clamped within "
        << reach << " of type " << type;
    throw PreconditionError(msg.str());
  }
  return q.Derivative(type);
}

}  // namespace

double FirstOrderPrediction(const Generator& gen, const ApprovalFunction& q,
                            const AgentParams& params, double type) {
  const double slope = ApprovalSlopeForPrediction(gen, q, params, type);
  return type +
         params.gamma * slope / (params.beta * scoring::Curvature(gen, type));
}

double PredictedScoringLoss(const Generator& gen, const ApprovalFunction& q,
                            const AgentParams& params, double type) {
  const double slope = ApprovalSlopeForPrediction(gen, q, params, type);
  return 0.5 * params.gamma * params.gamma * slope * slope /
         (params.beta * scoring::Curvature(gen, type));
}

ResidualThreshold ResidualGammaThreshold(const Generator& gen, double beta,
                                         double p0,
                                         const ApprovalFunction& q) {
  ValidateParams({beta, 0.0});
  scoring::CheckDomain(gen, p0, "p0");
  if (q.is_step()) {
    throw NotDifferentiableError("residual thresholds need a smooth q");
  }

  const double lo = gen.domain_lo();
  const double hi = gen.domain_hi();
  const double step = (hi - lo) / (kBestResponseGrid - 1);
  double q_min = std::numeric_limits<double>::infinity();
  double q_max = -q_min;
  double jump = lo;
  for (int k = 0; k < kBestResponseGrid; ++k) {
    const double r = (k == kBestResponseGrid - 1) ? hi : lo + k * step;
    const double v = q(r);
    q_min = std::min(q_min, v);
    // Among maximizers keep the one closest to p0 (smallest regret).
    if (v > q_max || (v == q_max && std::abs(r - p0) < std::abs(jump - p0))) {
      q_max = v;
      jump = r;
    }
  }
  if (q_max - q_min <= 1e-15) {
    throw NoConflictError("approval function is constant; no type lies");
  }
  const double slope = q.Derivative(p0);
  if (std::abs(slope) > 1e-10) {
    std::ostringstream msg;
    msg << "q'(" << p0 << ") = " << slope
        << " is nonzero; the first-order perturbation applies instead";
    throw PreconditionError(msg.str());
  }

  ResidualThreshold out{};
  out.jump_report = jump;
  const double q2 = q.SecondDerivative(p0);
  out.gamma_local = q2 > 0.0 ? beta * scoring::Curvature(gen, p0) / q2
                             : std::numeric_limits<double>::infinity();
  const double gain = q(jump) - q(p0);
  out.gamma_global = gain > 0.0
                         ? beta * scoring::ScoringRegret(gen, jump, p0) / gain
                         : std::numeric_limits<double>::infinity();
  return out;
}

}  // namespace credlab::agent
