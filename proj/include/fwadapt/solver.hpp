#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fwadapt/bregman.hpp"
#include "fwadapt/objectives.hpp"
#include "fwadapt/simplex.hpp"
#include "fwadapt/types.hpp"

namespace fwadapt {

enum class Variant {
  kFullAdapt,   // adapts L and gamma, function-value acceptance test
  kGammaAdapt,  // fixed L, adapts gamma, divergence-only acceptance test
  kLAdapt,      // adapts L, gamma fixed at gamma0, function-value test
  kFixed,       // constant L0 and gamma0, no acceptance test
};

/// Which counter decides between doubling L and shrinking gamma after a
/// rejection in the fully adaptive variant.
enum class RejectionParity {
  kRejectionCount,  // 1st rejection doubles L, 2nd shrinks gamma, 3rd doubles L, ...
  kOuterIteration,  // even outer k doubles L, odd outer k shrinks gamma
};

enum class Termination { kGapTolerance, kIterationBudget, kInnerCheckBudget, kDomainError };

std::string ToString(Variant variant);
std::string ToString(Termination termination);
std::string ToString(RejectionParity parity);
/// Accepts "full-adapt", "gamma-adapt", "L-adapt", "fixed". Throws InputError.
Variant ParseVariant(const std::string& name);
RejectionParity ParseRejectionParity(const std::string& name);

struct SolverConfig {
  Variant variant = Variant::kFullAdapt;
  double l0 = 1.0;
  double gamma0 = 2.0;
  double gamma_max = 2.0;
  double eta = 2.0;
  double gap_tol = 1e-6;
  int max_iter = 1000;
  int max_inner_checks = 200;
  RejectionParity rejection_parity = RejectionParity::kRejectionCount;
  /// Carried in the config but never read by the iteration.
  double delta = 0.0;

  /// Throws InputError unless l0 > 0, eta > 1, 1 < gamma0 <= gamma_max,
  /// gap_tol >= 0, max_iter >= 0 and max_inner_checks >= 1.
  void Validate() const;
};

/// One row per outer iteration. The last row of every trace describes the
/// final point and takes no step (alpha = 0, terminal = true).
struct IterationRecord {
  int k = 0;
  double f_value = 0.0;
  double fw_gap = 0.0;
  double alpha = 0.0;
  double L_k = 0.0;
  double gamma_k = 0.0;
  int inner_checks = 0;
  long long cum_inner_checks = 0;
  double elapsed_seconds = 0.0;

  // Quantities needed to re-verify the step from the trace alone.
  double directional_derivative = 0.0;  // <grad f(x_k), d_k>
  double vertex_divergence = 0.0;       // V(s_k, x_k)
  double step_divergence = 0.0;         // V(x_k + alpha d_k, x_k), from the step vector
  bool terminal = false;
};

struct SolverRun {
  SolverConfig config;
  std::vector<IterationRecord> trace;
  Vector final_point;
  Termination termination = Termination::kIterationBudget;
  std::string message;

  /// Rows that took a step (all but the terminal row).
  int StepCount() const;
  long long TotalInnerChecks() const;
  /// max / min over accepted step rows; l0 / gamma0 when no step was taken.
  double MaxL() const;
  double MinGamma() const;
  double FinalValue() const;
};

struct FwGapResult {
  double gap = 0.0;
  Vector vertex;
  Vector direction;
};

/// s = LMO(gradient), d = s - x, gap = -<gradient, d>.
FwGapResult FwGap(const Vector& gradient, const Vector& x, const ClippedSimplex& set);

/// alpha = min{ (neg_grad_dot_d / (2 L V_sx))^(1/(gamma-1)), 1 }.
/// Throws InputError if gamma <= 1, L <= 0, V_sx <= 0 or neg_grad_dot_d < 0.
double AdaptiveStep(double neg_grad_dot_d, double L, double gamma, double vertex_divergence);

/// Runs the variant selected by config.variant. x0 must lie in the relative
/// interior of the set. Domain errors at trial points count as rejections; a
/// domain error at an accepted point ends the run with kDomainError.
SolverRun Solve(const Objective& objective, const BregmanDivergence& geometry,
                const ClippedSimplex& set, const SolverConfig& config, const Vector& x0);

/// Both L and gamma adapt; acceptance test
///   f(x + a d) <= f(x) + a <grad, d> + a^gamma L V(s, x).
SolverRun SolveFullyAdaptive(const Objective& objective, const BregmanDivergence& geometry,
                             const ClippedSimplex& set, SolverConfig config, const Vector& x0);

/// L fixed at config.l0; acceptance test V(x + a d, x) <= a^gamma V(s, x).
/// Function values are evaluated for the trace only.
SolverRun SolveGammaAdaptive(const Objective& objective, const BregmanDivergence& geometry,
                             const ClippedSimplex& set, SolverConfig config, const Vector& x0);

/// config.variant must be kFixed or kLAdapt.
SolverRun SolveBaseline(const Objective& objective, const BregmanDivergence& geometry,
                        const ClippedSimplex& set, const SolverConfig& config, const Vector& x0);

}  // namespace fwadapt
