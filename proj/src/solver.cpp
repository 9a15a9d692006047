#include "fwadapt/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include "fwadapt/errors.hpp"

namespace fwadapt {
namespace {

// V(s, x) at or below this is treated as s == x.
constexpr double kMinVertexDivergence = 1e-15;
// Round-off allowance in the acceptance tests.
constexpr double kAcceptanceSlack = 1e-12;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double ExpandGamma(double gamma, const SolverConfig& config) {
  return std::min(gamma + config.eta * (gamma - 1.0), config.gamma_max);
}

double ShrinkGamma(double gamma, const SolverConfig& config) {
  return 1.0 + (gamma - 1.0) / config.eta;
}

SolverRun RunFrankWolfe(const Objective& objective, const BregmanDivergence& geometry,
                        const ClippedSimplex& set, const SolverConfig& config, const Vector& x0) {
  config.Validate();
  if (objective.dim() != set.dim() || x0.size() != set.dim()) {
    throw InputError("solver: objective, feasible set and x0 dimensions differ");
  }
  if (!set.InRelativeInterior(x0)) {
    throw InputError("solver: x0 must lie in the relative interior of the feasible set");
  }

  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  const Variant variant = config.variant;

  SolverRun run;
  run.config = config;
  run.trace.reserve(static_cast<std::size_t>(std::min(config.max_iter, 1 << 20)) + 1);

  Vector x = x0;
  double L = config.l0;
  double gamma = config.gamma0;
  long long cum_checks = 0;

  for (int k = 0;; ++k) {
    IterationRecord rec;
    rec.k = k;
    rec.L_k = L;
    rec.gamma_k = gamma;

    auto finish = [&](Termination reason, std::string message = {}) {
      rec.terminal = true;
      rec.alpha = 0.0;
      rec.cum_inner_checks = cum_checks;
      run.trace.push_back(rec);
      run.final_point = x;
      run.termination = reason;
      run.message = std::move(message);
      return std::move(run);
    };

    double f = kNaN;
    Vector gradient;
    try {
      std::tie(f, gradient) = objective.ValueAndGradient(x);
    } catch (const DomainError& e) {
      rec.f_value = kNaN;
      rec.fw_gap = kNaN;
      rec.elapsed_seconds = std::chrono::duration<double>(Clock::now() - start).count();
      return finish(Termination::kDomainError, e.what());
    }
    const FwGapResult fw = FwGap(gradient, x, set);
    rec.f_value = f;
    rec.fw_gap = fw.gap;
    rec.directional_derivative = -fw.gap;
    rec.elapsed_seconds = std::chrono::duration<double>(Clock::now() - start).count();

    if (fw.gap <= config.gap_tol) return finish(Termination::kGapTolerance);
    if (k >= config.max_iter) return finish(Termination::kIterationBudget);

    double vertex_divergence = kNaN;
    try {
      vertex_divergence = geometry(fw.vertex, x);
    } catch (const DomainError& e) {
      return finish(Termination::kDomainError, e.what());
    }
    rec.vertex_divergence = vertex_divergence;
    if (!(vertex_divergence > kMinVertexDivergence)) return finish(Termination::kGapTolerance);

    switch (variant) {
      case Variant::kFullAdapt:
        L /= 2.0;
        gamma = ExpandGamma(gamma, config);
        break;
      case Variant::kLAdapt:
        L /= 2.0;
        break;
      case Variant::kGammaAdapt:
        gamma = ExpandGamma(gamma, config);
        break;
      case Variant::kFixed:
        break;
    }

    int checks = 0;
    double alpha = 0.0;
    Vector trial;
    double step_divergence = kNaN;
    for (;;) {
      alpha = AdaptiveStep(fw.gap, L, gamma, vertex_divergence);
      trial = x + alpha * fw.direction;
      ++checks;
      ++cum_checks;
      if (variant == Variant::kFixed) break;

      bool accepted = false;
      try {
        const double scaled = std::pow(alpha, gamma) * vertex_divergence;
        if (variant == Variant::kGammaAdapt) {
          step_divergence = geometry.StepDivergence(x, alpha * fw.direction);
          accepted = step_divergence <= scaled * (1.0 + kAcceptanceSlack);
        } else {
          const double f_trial = objective.Value(trial);
          accepted = f_trial <= f - alpha * fw.gap + L * scaled + kAcceptanceSlack * (1.0 + std::abs(f));
        }
      } catch (const DomainError&) {
        accepted = false;
      }
      if (accepted) break;

      if (checks >= config.max_inner_checks) {
        rec.L_k = L;
        rec.gamma_k = gamma;
        rec.inner_checks = checks;
        std::ostringstream msg;
        msg << "no acceptable step after " << checks << " checks at iteration " << k;
        return finish(Termination::kInnerCheckBudget, msg.str());
      }

      const int rejection = checks - 1;
      const double rejected_gamma = gamma;
      switch (variant) {
        case Variant::kFullAdapt: {
          const bool double_l = config.rejection_parity == RejectionParity::kRejectionCount
                                    ? rejection % 2 == 0
                                    : k % 2 == 0;
          if (double_l) {
            L *= 2.0;
          } else {
            gamma = ShrinkGamma(gamma, config);
          }
          break;
        }
        case Variant::kLAdapt:
          L *= 2.0;
          break;
        case Variant::kGammaAdapt:
          gamma = ShrinkGamma(gamma, config);
          break;
        case Variant::kFixed:
          break;
      }
      if (!(gamma > 1.0)) {
        rec.L_k = L;
        rec.gamma_k = rejected_gamma;
        rec.inner_checks = checks;
        std::ostringstream msg;
        msg << "gamma shrank to 1 in floating point after " << checks << " checks at iteration " << k;
        return finish(Termination::kInnerCheckBudget, msg.str());
      }
    }

    if (variant != Variant::kGammaAdapt) {
      try {
        step_divergence = geometry.StepDivergence(x, alpha * fw.direction);
      } catch (const DomainError&) {
        step_divergence = kNaN;
      }
    }

    rec.alpha = alpha;
    rec.L_k = L;
    rec.gamma_k = gamma;
    rec.inner_checks = checks;
    rec.cum_inner_checks = cum_checks;
    rec.step_divergence = step_divergence;
    run.trace.push_back(rec);
    x = std::move(trial);
  }
}

}  // namespace

std::string ToString(Variant variant) {
  switch (variant) {
    case Variant::kFullAdapt:
      return "full-adapt";
    case Variant::kGammaAdapt:
      return "gamma-adapt";
    case Variant::kLAdapt:
      return "L-adapt";
    case Variant::kFixed:
      return "fixed";
  }
  return "unknown";
}

std::string ToString(Termination termination) {
  switch (termination) {
    case Termination::kGapTolerance:
      return "gap-tolerance";
    case Termination::kIterationBudget:
      return "iteration-budget";
    case Termination::kInnerCheckBudget:
      return "inner-check-budget";
    case Termination::kDomainError:
      return "domain-error";
  }
  return "unknown";
}

std::string ToString(RejectionParity parity) {
  return parity == RejectionParity::kRejectionCount ? "rejection-count" : "outer-k";
}

Variant ParseVariant(const std::string& name) {
  for (Variant v : {Variant::kFullAdapt, Variant::kGammaAdapt, Variant::kLAdapt, Variant::kFixed}) {
    if (ToString(v) == name) return v;
  }
  throw InputError("unknown solver variant '" + name +
                   "' (expected full-adapt, gamma-adapt, L-adapt or fixed)");
}

RejectionParity ParseRejectionParity(const std::string& name) {
  if (name == "rejection-count") return RejectionParity::kRejectionCount;
  if (name == "outer-k") return RejectionParity::kOuterIteration;
  throw InputError("unknown rejection parity '" + name + "' (expected rejection-count or outer-k)");
}

void SolverConfig::Validate() const {
  auto fail = [](const std::string& what) { throw InputError("solver config: " + what); };
  if (!(l0 > 0.0) || !std::isfinite(l0)) fail("L0 must be positive and finite");
  if (!(eta > 1.0) || !std::isfinite(eta)) fail("eta must exceed 1");
  if (!(gamma_max > 1.0) || !std::isfinite(gamma_max)) fail("gamma_max must exceed 1");
  if (!(gamma0 > 1.0 && gamma0 <= gamma_max)) fail("gamma0 must lie in (1, gamma_max]");
  if (!(gap_tol >= 0.0)) fail("gap tolerance must be nonnegative");
  if (max_iter < 0) fail("max_iter must be nonnegative");
  if (max_inner_checks < 1) fail("max_inner_checks must be at least 1");
}

int SolverRun::StepCount() const {
  return static_cast<int>(std::count_if(trace.begin(), trace.end(),
                                        [](const IterationRecord& r) { return !r.terminal; }));
}

long long SolverRun::TotalInnerChecks() const {
  return trace.empty() ? 0 : trace.back().cum_inner_checks;
}

double SolverRun::MaxL() const {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& r : trace) {
    if (!r.terminal) best = std::max(best, r.L_k);
  }
  return std::isfinite(best) ? best : config.l0;
}

double SolverRun::MinGamma() const {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& r : trace) {
    if (!r.terminal) best = std::min(best, r.gamma_k);
  }
  return std::isfinite(best) ? best : config.gamma0;
}

double SolverRun::FinalValue() const { return trace.empty() ? kNaN : trace.back().f_value; }

FwGapResult FwGap(const Vector& gradient, const Vector& x, const ClippedSimplex& set) {
  FwGapResult result;
  result.vertex = set.Lmo(gradient);
  result.direction = result.vertex - x;
  result.gap = -gradient.dot(result.direction);
  return result;
}

double AdaptiveStep(double neg_grad_dot_d, double L, double gamma, double vertex_divergence) {
  if (!(gamma > 1.0)) throw InputError("AdaptiveStep: gamma must exceed 1");
  if (!(L > 0.0)) throw InputError("AdaptiveStep: L must be positive");
  if (!(vertex_divergence > 0.0)) throw InputError("AdaptiveStep: V(s, x) must be positive");
  if (!(neg_grad_dot_d >= 0.0)) throw InputError("AdaptiveStep: -<grad, d> must be nonnegative");
  const double ratio = neg_grad_dot_d / (2.0 * L * vertex_divergence);
  if (ratio >= 1.0) return 1.0;
  return std::pow(ratio, 1.0 / (gamma - 1.0));
}

SolverRun Solve(const Objective& objective, const BregmanDivergence& geometry,
                const ClippedSimplex& set, const SolverConfig& config, const Vector& x0) {
  return RunFrankWolfe(objective, geometry, set, config, x0);
}

SolverRun SolveFullyAdaptive(const Objective& objective, const BregmanDivergence& geometry,
                             const ClippedSimplex& set, SolverConfig config, const Vector& x0) {
  config.variant = Variant::kFullAdapt;
  return RunFrankWolfe(objective, geometry, set, config, x0);
}

SolverRun SolveGammaAdaptive(const Objective& objective, const BregmanDivergence& geometry,
                             const ClippedSimplex& set, SolverConfig config, const Vector& x0) {
  config.variant = Variant::kGammaAdapt;
  return RunFrankWolfe(objective, geometry, set, config, x0);
}

SolverRun SolveBaseline(const Objective& objective, const BregmanDivergence& geometry,
                        const ClippedSimplex& set, const SolverConfig& config, const Vector& x0) {
  if (config.variant != Variant::kFixed && config.variant != Variant::kLAdapt) {
    throw InputError("SolveBaseline: variant must be fixed or L-adapt");
  }
  return RunFrankWolfe(objective, geometry, set, config, x0);
}

}  // namespace fwadapt
