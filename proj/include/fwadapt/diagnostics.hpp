#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "fwadapt/bregman.hpp"
#include "fwadapt/simplex.hpp"
#include "fwadapt/solver.hpp"
#include "fwadapt/types.hpp"

namespace fwadapt {

/// Outcome of checking one inequality at many points of a trace.
struct InequalityReport {
  int checked = 0;
  int violations = 0;
  /// Largest (lhs - rhs - allowed slack) seen; <= 0 when every check passed.
  double worst_excess = -std::numeric_limits<double>::infinity();
  int worst_k = -1;

  bool ok() const { return violations == 0; }
  void Record(int k, double excess);
};

/// Per-step progress bound, re-derived from the trace:
///   f(x_{k+1}) - f(x_k) <= <g, d> min{1/2, 1/2 (-<g, d> / (2 L_max V(s, x)))^(1/(gamma_min - 1))}
/// with L_max, gamma_min running over iterations 0..k and slack
/// rel_slack (1 + |f(x_k)|).
InequalityReport CheckProgressBound(const SolverRun& run, double rel_slack = 1e-9);

/// Re-evaluates each accepted step's acceptance inequality from the stored
/// record (function-value test for full/L-adapt, divergence test for
/// gamma-adapt). Fixed runs have no test and report zero checks.
InequalityReport CheckAcceptanceInequality(const SolverRun& run);

/// f(x_{k+1}) <= f(x_k) + tol (1 + |f(x_k)|).
InequalityReport CheckMonotoneDescent(const SolverRun& run, double tol = 1e-10);

/// f(x_k) - f_star <= fw_gap(x_k) + abs_tol at every row.
InequalityReport CheckGapDomination(const SolverRun& run, double f_star, double abs_tol = 1e-8);

/// f(x_k) - f_star <= (2/(k+2))^(gamma_min - 1) L_max R^2 for k >= 1, with
/// L_max and gamma_min over iterations 0..k.
InequalityReport CheckSublinearEnvelope(const SolverRun& run, double f_star,
                                        double divergence_radius_sq);

struct CheckBudget {
  long long total_checks = 0;
  int iterations = 0;
  double bound = 0.0;
  bool ok() const { return static_cast<double>(total_checks) <= bound; }
};

/// total checks <= 3N + log2(2 L_max / L0) + log_eta((gamma0 - 1)/(gamma_min - 1)).
CheckBudget CheckInnerCheckBudget(const SolverRun& run);

/// Full steps (alpha == 1) at least halve the residual: h_{k+1} <= h_k / 2 + abs_tol.
InequalityReport CheckHalvingOnFullSteps(const SolverRun& run, double f_star,
                                         double abs_tol = 1e-9);

struct ScalingDiagnostic {
  double lhs = 0.0;         // -<g, d> / V(s, x)
  double rhs_factor = 0.0;  // <-g, (x* - x) / V(x*, x)>
  std::optional<double> tau_implied;
  /// (delta / D) (epsilon / D_V), the guaranteed lower bound on tau.
  double tau_theory = 0.0;
  bool vacuous = false;
  std::string note;
};

/// Evaluates the Bregman scaling condition at x. boundary_distance is
/// dist(x*, boundary of the set). Requires V(x*, x) > 0.
ScalingDiagnostic DiagnoseScaling(const Vector& x, const Vector& gradient, const Vector& vertex,
                                  const Vector& solution, const SetConstants& constants,
                                  double boundary_distance, const BregmanDivergence& geometry,
                                  double epsilon);

struct LinearRateEnvelope {
  /// phi_i for each step row i (contraction of the step x_i -> x_{i+1}).
  std::vector<double> factors;
  /// (f(x_0) - f*) prod_{i<k} phi_i for each row k.
  std::vector<double> bounds;
  bool consistent = true;
  std::string note;
  InequalityReport report;
};

/// phi_i = 1/2 if alpha_i == 1, else
///   1 - (tau/2) (gamma^(gamma/(gamma+1)) / (gamma+1)) (mu / (2 L_i))^(1/(gamma-1)).
/// Checks f(x_k) - f* <= bound_k (1 + rel_slack). Factors outside (0, 1] mark
/// the parameters inconsistent and skip the check.
LinearRateEnvelope ComputeLinearRateEnvelope(const SolverRun& run, double mu, double tau,
                                             double gamma, double f_star,
                                             double rel_slack = 1e-6);

}  // namespace fwadapt
