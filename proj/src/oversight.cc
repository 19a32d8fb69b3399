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

#include "credlab/oversight.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>

#include "credlab/detection.h"
#include "credlab/errors.h"
#include "credlab/numerics.h"
#include "credlab/parallel.h"

namespace credlab::oversight {

using agent::AffineApproval;
using agent::ApprovalFunction;
using agent::BestResponder;
using scoring::Generator;

void ValidatePrincipal(const PrincipalParams& u) {
  if (!(u.u_s > u.u_d && u.u_d > u.u_f)) {
    std::ostringstream msg;
    msg << "principal utilities must satisfy u_s > u_d > u_f, got (" << u.u_s
        << ", " << u.u_f << ", " << u.u_d << ")";
    throw ParameterError(msg.str());
  }
}

double PMin(const PrincipalParams& principal) {
  ValidatePrincipal(principal);
  return (principal.u_d - principal.u_f) / (principal.u_s - principal.u_f);
}

double Surplus(const PrincipalParams& principal, double p) {
  return p * (principal.u_s - principal.u_f) - (principal.u_d - principal.u_f);
}

// ---------------------------------------------------------------------------
// TypeDistribution

TypeDistribution TypeDistribution::Uniform(double lo, double hi) {
  if (!(0.0 <= lo && lo < hi && hi <= 1.0)) {
    throw ParameterError("uniform types need 0 <= lo < hi <= 1");
  }
  return TypeDistribution(UniformTypes{lo, hi}, 0.0);
}

TypeDistribution TypeDistribution::Beta(double a, double b) {
  if (!(a > 0.0 && a <= 50.0 && b > 0.0 && b <= 50.0)) {
    throw ParameterError("beta types need shapes in (0, 50]");
  }
  const double log_norm =
      std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
  return TypeDistribution(BetaTypes{a, b}, log_norm);
}

double TypeDistribution::lo() const {
  if (const auto* u = std::get_if<UniformTypes>(&kind_)) return u->lo;
  return 0.0;
}

double TypeDistribution::hi() const {
  if (const auto* u = std::get_if<UniformTypes>(&kind_)) return u->hi;
  return 1.0;
}

double TypeDistribution::Density(double p) const {
  if (p < lo() || p > hi()) return 0.0;
  if (const auto* u = std::get_if<UniformTypes>(&kind_)) {
    return 1.0 / (u->hi - u->lo);
  }
  const auto& beta = std::get<BetaTypes>(kind_);
  if ((p == 0.0 && beta.a == 1.0) || (p == 1.0 && beta.b == 1.0)) {
    // 0^0 terms; the log form below would produce NaN.
    const double other = p == 0.0 ? std::pow(1.0 - p, beta.b - 1.0)
                                   : std::pow(p, beta.a - 1.0);
    return other * std::exp(-log_norm_);
  }
  if (p == 0.0 || p == 1.0) {
    const double shape = p == 0.0 ? beta.a : beta.b;
    return shape > 1.0 ? 0.0 : std::numeric_limits<double>::infinity();
  }
  return std::exp((beta.a - 1.0) * std::log(p) +
                  (beta.b - 1.0) * std::log1p(-p) - log_norm_);
}

std::string TypeDistribution::Describe() const {
  std::ostringstream out;
  if (const auto* u = std::get_if<UniformTypes>(&kind_)) {
    out << "uniform(" << u->lo << "," << u->hi << ")";
  } else {
    const auto& b = std::get<BetaTypes>(kind_);
    out << "beta(" << b.a << "," << b.b << ")";
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Games

OversightGame CanonicalGame() { return OversightGame{}; }

void ValidateGame(const OversightGame& game) {
  ValidatePrincipal(game.principal);
  agent::ValidateParams(game.agent);
  const double slack = 1e-12;
  if (game.dist.lo() < game.gen.domain_lo() - slack ||
      game.dist.hi() > game.gen.domain_hi() + slack) {
    std::ostringstream msg;
    msg << "type support " << game.dist.Describe()
        << " leaves the generator domain [" << game.gen.domain_lo() << ", "
        << game.gen.domain_hi() << "]";
    throw ParameterError(msg.str());
  }
}

bool NonDegenerate(const OversightGame& game) {
  if (game.gen.is_brier()) {
    const double gap = 1.0 - PMin(game.principal);
    return game.agent.gamma / game.agent.beta <= gap * gap;
  }
  try {
    OptimalStepThreshold(game);
    return true;
  } catch (const DegenerateRegimeError&) {
    return false;
  }
}

double InducedScreening(const OversightGame& game, const ApprovalFunction& q,
                        double p) {
  return q(agent::BestResponse(game.gen, q, game.agent, p));
}

ThresholdType ThresholdTypeFor(const OversightGame& game, double r0) {
  agent::ValidateParams(game.agent);
  scoring::CheckDomain(game.gen, r0, "r0");
  const double lo = game.gen.domain_lo();
  const double beta = game.agent.beta;
  const double gamma = game.agent.gamma;
  if (game.gen.is_brier()) {
    const double p = r0 - std::sqrt(gamma / beta);
    if (p < lo) return {lo, true};
    return {p, false};
  }
  // Inflation cost is strictly decreasing in the type on [lo, r0].
  auto excess = [&](double p) {
    return beta * scoring::ScoringRegret(game.gen, r0, p) - gamma;
  };
  if (excess(lo) < 0.0) return {lo, true};
  return {numerics::Bisect(excess, lo, r0, 1e-15), false};
}

double OptimalStepThreshold(const OversightGame& game) {
  agent::ValidateParams(game.agent);
  const double p_min = PMin(game.principal);
  scoring::CheckDomain(game.gen, p_min, "p_min");
  const double hi = game.gen.domain_hi();
  const double beta = game.agent.beta;
  const double gamma = game.agent.gamma;
  auto degenerate = [&](double r0) {
    std::ostringstream msg;
    msg << "step threshold " << r0 << " for p_min = " << p_min
        << " lies beyond the report space (upper end " << hi
        << "); the optimal step degenerates to q = 0";
    return DegenerateRegimeError(msg.str());
  };
  if (game.gen.is_brier()) {
    const double r0 = p_min + std::sqrt(gamma / beta);
    if (r0 > hi + 1e-15) throw degenerate(r0);
    return std::min(r0, hi);
  }
  if (gamma == 0.0) return p_min;
  // Cost of pushing type p_min up to r is increasing in r.
  auto excess = [&](double r) {
    return beta * scoring::ScoringRegret(game.gen, r, p_min) - gamma;
  };
  if (excess(hi) < 0.0) throw degenerate(hi);
  return numerics::Bisect(excess, p_min, hi, 1e-15);
}

// ---------------------------------------------------------------------------
// Welfare integrals

namespace {

using ScreeningFn = std::function<double(double)>;

// A stretch of types on which the induced screening is continuous.
struct Piece {
  double lo;
  double hi;
  ScreeningFn screening;
};

ScreeningFn Constant(double v) {
  return [v](double) { return v; };
}

std::vector<Piece> StepPieces(const OversightGame& game, double r0) {
  const double lo = game.dist.lo();
  const double hi = game.dist.hi();
  if (r0 > game.gen.domain_hi()) return {{lo, hi, Constant(0.0)}};
  if (r0 <= game.gen.domain_lo()) return {{lo, hi, Constant(1.0)}};
  const ThresholdType cut = ThresholdTypeFor(game, r0);
  const double split = std::clamp(cut.type, lo, hi);
  std::vector<Piece> pieces;
  if (split > lo) pieces.push_back({lo, split, Constant(0.0)});
  if (split < hi) pieces.push_back({split, hi, Constant(1.0)});
  return pieces;
}

struct ScanPoint {
  double report;
  double screening;
};

// Report levels where the screening is continuous but not smooth: the
// domain edges, where the best response starts to stick, and the reports
// at which an affine rule clamps.
std::vector<double> KinkReports(const OversightGame& game,
                                const ApprovalFunction& q) {
  const double lo = game.gen.domain_lo();
  const double hi = game.gen.domain_hi();
  std::vector<double> levels = {lo + 1e-12, hi - 1e-12};
  if (const auto* affine = std::get_if<AffineApproval>(&q.kind())) {
    if (affine->b != 0.0) {
      for (double v : {0.0, 1.0}) {
        const double r = (v - affine->a) / affine->b;
        if (r > lo && r < hi) levels.push_back(r);
      }
    }
  }
  return levels;
}

std::vector<Piece> SplitAtKinks(const OversightGame& game,
                                const ApprovalFunction& q,
                                const BestResponder& responder,
                                const std::vector<Piece>& pieces) {
  const std::vector<double> levels = KinkReports(game, q);
  std::vector<Piece> out;
  for (const Piece& piece : pieces) {
    std::vector<double> cuts;
    const double r_lo = responder(piece.lo);
    const double r_hi = responder(piece.hi);
    for (double level : levels) {
      if (!(r_lo < level && r_hi >= level)) continue;
      // The response is non-decreasing, so the first type reaching `level`
      // is found by bisection.
      double a = piece.lo;
      double b = piece.hi;
      while (b - a > 1e-13) {
        const double m = 0.5 * (a + b);
        (responder(m) >= level ? b : a) = m;
      }
      cuts.push_back(b);
    }
    std::sort(cuts.begin(), cuts.end());
    double start = piece.lo;
    for (double c : cuts) {
      if (c > start && c < piece.hi) {
        out.push_back({start, c, piece.screening});
        start = c;
      }
    }
    out.push_back({start, piece.hi, piece.screening});
  }
  return out;
}

// Splits the type support at the jumps of the best response. The response
// is non-decreasing in the type (the objective has increasing differences),
// so a jump is located by bisecting towards the half with the larger rise.
std::vector<Piece> SmoothPieces(const OversightGame& game,
                                const ApprovalFunction& q,
                                const WelfareQuadrature& quad) {
  auto responder =
      std::make_shared<const BestResponder>(game.gen, q, game.agent);
  auto eval = [&](double p) -> ScanPoint {
    const double r = (*responder)(p);
    return {r, q(r)};
  };
  ScreeningFn screening = [responder](double p) {
    return responder->approval()((*responder)(p));
  };

  const double lo = game.dist.lo();
  const double hi = game.dist.hi();
  const int n = std::max(quad.scan_points, 3);
  const double h = (hi - lo) / (n - 1);
  std::vector<double> types(n);
  std::vector<ScanPoint> scan(n);
  for (int k = 0; k < n; ++k) {
    types[k] = k == n - 1 ? hi : lo + k * h;
    scan[k] = eval(types[k]);
  }

  auto rise = [](const ScanPoint& a, const ScanPoint& b) {
    return (b.report - a.report) + std::abs(b.screening - a.screening);
  };

  std::vector<Piece> pieces;
  double start = lo;
  for (int k = 0; k + 1 < n; ++k) {
    const ScanPoint& left = scan[k];
    const ScanPoint& right = scan[k + 1];
    const bool jumpy =
        right.report - left.report > 4.0 * h + 1e-9 ||
        std::abs(right.screening - left.screening) > 0.02;
    if (!jumpy) continue;
    double a = types[k];
    double b = types[k + 1];
    ScanPoint fa = left;
    ScanPoint fb = right;
    for (int iter = 0; iter < 80 && b - a > 1e-13; ++iter) {
      const double m = 0.5 * (a + b);
      const ScanPoint fm = eval(m);
      if (rise(fa, fm) >= rise(fm, fb)) {
        b = m;
        fb = fm;
      } else {
        a = m;
        fa = fm;
      }
    }
    if (a > start) pieces.push_back({start, a, screening});
    start = b;
  }
  if (hi > start) pieces.push_back({start, hi, screening});
  return SplitAtKinks(game, q, *responder, pieces);
}

std::vector<Piece> ScreeningPieces(const OversightGame& game,
                                   const ApprovalFunction& q,
                                   const WelfareQuadrature& quad) {
  if (auto r0 = q.step_threshold()) return StepPieces(game, *r0);
  return SmoothPieces(game, q, quad);
}

// Integrates integrand(p, qtilde(p)) over all pieces, additionally splitting
// at `cut` when it falls inside a piece.
double IntegratePieces(const std::vector<Piece>& pieces,
                       const std::function<double(double, double)>& integrand,
                       const WelfareQuadrature& quad,
                       std::optional<double> cut = std::nullopt) {
  numerics::SimpsonOptions options;
  options.tolerance = quad.tolerance;
  options.failure_tolerance = quad.failure_tolerance;
  options.max_panels = quad.max_panels;
  double total = 0.0;
  for (const Piece& piece : pieces) {
    auto f = [&](double p) { return integrand(p, piece.screening(p)); };
    if (cut && *cut > piece.lo && *cut < piece.hi) {
      total += numerics::SimpsonDoubling(f, piece.lo, *cut, options);
      total += numerics::SimpsonDoubling(f, *cut, piece.hi, options);
    } else {
      total += numerics::SimpsonDoubling(f, piece.lo, piece.hi, options);
    }
  }
  return total;
}

}  // namespace

double PrincipalUtility(const OversightGame& game, const ApprovalFunction& q,
                        const WelfareQuadrature& quad) {
  ValidateGame(game);
  const std::vector<Piece> pieces = ScreeningPieces(game, q, quad);
  const double integral = IntegratePieces(
      pieces,
      [&](double p, double screening) {
        return screening * Surplus(game.principal, p) * game.dist.Density(p);
      },
      quad);
  return game.principal.u_d + integral;
}

double FirstBestUtility(const OversightGame& game) {
  ValidateGame(game);
  const double from = std::max(PMin(game.principal), game.dist.lo());
  numerics::SimpsonOptions options;
  options.tolerance = 1e-12;
  const double integral = numerics::SimpsonDoubling(
      [&](double p) {
        return Surplus(game.principal, p) * game.dist.Density(p);
      },
      from, game.dist.hi(), options);
  return game.principal.u_d + integral;
}

double AffineWelfareGap(const OversightGame& game, double a, double b) {
  return FirstBestUtility(game) -
         PrincipalUtility(game, ApprovalFunction::Affine(a, b));
}

// ---------------------------------------------------------------------------
// Smooth oversight

namespace {

struct Candidate {
  double r_min = 0.0;
  double tau = 0.0;
  double utility = -std::numeric_limits<double>::infinity();
};

}  // namespace

WelfareGapEstimate WelfareGapSmooth(const OversightGame& game, double tau_min,
                                    const SigmoidSearch& search) {
  ValidateGame(game);
  if (!(tau_min > 0.0)) throw ParameterError("tau_min must be > 0");
  if (search.r_min_points < 1 || search.tau_multiples.empty()) {
    throw ParameterError("sigmoid search grid is empty");
  }
  for (double m : search.tau_multiples) {
    if (!(m >= 1.0)) {
      throw ParameterError("tau multiples must be >= 1 (tau >= tau_min)");
    }
  }
  if (!(search.r_min_lo >= 0.0 && search.r_min_hi <= 1.0 &&
        search.r_min_lo <= search.r_min_hi)) {
    throw ParameterError("r_min search range must lie in [0, 1]");
  }

  auto utility = [&](double r_min, double tau) {
    return PrincipalUtility(game, ApprovalFunction::Sigmoid(r_min, tau));
  };

  const int nr = search.r_min_points;
  const int nt = static_cast<int>(search.tau_multiples.size());
  const double r_step =
      nr > 1 ? (search.r_min_hi - search.r_min_lo) / (nr - 1) : 0.0;
  std::vector<Candidate> grid = ParallelMap(
      static_cast<std::size_t>(nr * nt), [&](std::size_t idx) {
        const int i = static_cast<int>(idx) % nr;
        const int j = static_cast<int>(idx) / nr;
        Candidate c;
        c.r_min = nr > 1 ? search.r_min_lo + i * r_step : search.r_min_lo;
        c.tau = tau_min * search.tau_multiples[j];
        c.utility = utility(c.r_min, c.tau);
        return c;
      });
  Candidate best = grid.front();
  for (const Candidate& c : grid) {
    if (c.utility > best.utility) best = c;
  }

  if (search.refine) {
    auto refine_r_min = [&](double half_width) {
      const double lo = std::max(search.r_min_lo, best.r_min - half_width);
      const double hi = std::min(search.r_min_hi, best.r_min + half_width);
      if (hi <= lo) return;
      const double tau = best.tau;
      const numerics::Maximum m = numerics::GoldenSectionMax(
          [&](double r) { return utility(r, tau); }, lo, hi, 1e-7);
      if (m.value > best.utility) best = {m.x, tau, m.value};
    };
    refine_r_min(std::max(r_step, 1e-3));
    const double log_lo = std::log(tau_min);
    const double log_hi = std::log(best.tau * 2.0);
    const double r_min = best.r_min;
    const numerics::Maximum m = numerics::GoldenSectionMax(
        [&](double lt) { return utility(r_min, std::exp(lt)); }, log_lo,
        log_hi, 1e-4);
    if (m.value > best.utility) best = {r_min, std::exp(m.x), m.value};
    refine_r_min(std::max(r_step, 1e-3) * 0.25);
  }

  const double first_best = FirstBestUtility(game);
  return {first_best - best.utility, best.utility,
          ApprovalFunction::Sigmoid(best.r_min, best.tau)};
}

std::vector<GapCurvePoint> PowerFamilyGapCurve(
    const OversightGame& game_template, const std::vector<double>& alphas,
    double tau_min, const SigmoidSearch& search) {
  for (double alpha : alphas) {
    if (!(alpha > 1.0)) throw ParameterError("power exponents must be > 1");
  }
  return ParallelMap(alphas.size(), [&](std::size_t i) {
    OversightGame game = game_template;
    game.gen = Generator::Power(alphas[i], game_template.gen.domain_lo(),
                                game_template.gen.domain_hi());
    const WelfareGapEstimate est = WelfareGapSmooth(game, tau_min, search);
    const auto& sig = std::get<agent::SigmoidApproval>(est.best_q.kind());
    return GapCurvePoint{alphas[i], est.gap_hat, sig.r_min, sig.tau};
  });
}

// ---------------------------------------------------------------------------
// Regulation and comparative statics

RegulationDecision RegulationGain(const OversightGame& game,
                                  const ApprovalFunction& q_organic,
                                  double regulation_cost) {
  ValidateGame(game);
  if (!(regulation_cost >= 0.0)) {
    throw ParameterError("regulatory cost must be >= 0");
  }
  const double p_min = PMin(game.principal);
  const WelfareQuadrature quad;
  const double gain = IntegratePieces(
      ScreeningPieces(game, q_organic, quad),
      [&](double p, double screening) {
        const double surplus = Surplus(game.principal, p);
        const double f = game.dist.Density(p);
        // Approved bad types cost |Pi|; rejected good types forgo Pi.
        if (p < p_min) return screening * std::abs(surplus) * f;
        return (1.0 - screening) * surplus * f;
      },
      quad, p_min);
  return {gain, gain > regulation_cost};
}

StaticsReport Statics(const OversightGame& game, double detect_delta,
                      double detect_alpha) {
  StaticsReport report{};
  const PrincipalParams& u = game.principal;
  report.p_min = PMin(u);
  const double h = 1e-6 * (u.u_s - u.u_f);
  PrincipalParams up = u;
  PrincipalParams down = u;
  up.u_d += h;
  down.u_d -= h;
  report.dpmin_dud = (PMin(up) - PMin(down)) / (2.0 * h);

  // The threshold depends on the principal and agent only; swapping the
  // type distribution must leave it untouched.
  OversightGame uniform = game;
  uniform.dist = TypeDistribution::Uniform(0.0, 1.0);
  OversightGame beta = game;
  beta.dist = TypeDistribution::Beta(2.0, 2.0);
  report.r0_uniform = OptimalStepThreshold(uniform);
  report.r0_beta22 = OptimalStepThreshold(beta);
  report.sample_size =
      detection::HoeffdingSampleBound(detect_delta, detect_alpha);
  return report;
}

}  // namespace credlab::oversight
