#include "fwadapt/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fwadapt/errors.hpp"

namespace fwadapt {

void InequalityReport::Record(int k, double excess) {
  ++checked;
  if (excess > 0.0) ++violations;
  if (excess > worst_excess) {
    worst_excess = excess;
    worst_k = k;
  }
}

InequalityReport CheckProgressBound(const SolverRun& run, double rel_slack) {
  InequalityReport report;
  double l_max = -std::numeric_limits<double>::infinity();
  double gamma_min = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < run.trace.size(); ++i) {
    const IterationRecord& rec = run.trace[i];
    if (rec.terminal) break;
    l_max = std::max(l_max, rec.L_k);
    gamma_min = std::min(gamma_min, rec.gamma_k);
    const double f_next = run.trace[i + 1].f_value;
    if (!std::isfinite(f_next)) continue;
    const double gd = rec.directional_derivative;
    const double ratio = -gd / (2.0 * l_max * rec.vertex_divergence);
    const double multiplier = std::min(0.5, 0.5 * std::pow(ratio, 1.0 / (gamma_min - 1.0)));
    const double bound = gd * multiplier;
    report.Record(rec.k, (f_next - rec.f_value) - bound - rel_slack * (1.0 + std::abs(rec.f_value)));
  }
  return report;
}

InequalityReport CheckAcceptanceInequality(const SolverRun& run) {
  InequalityReport report;
  if (run.config.variant == Variant::kFixed) return report;
  // Same allowance as the solver, doubled to absorb re-evaluation round-off.
  constexpr double kSlack = 2e-12;
  for (std::size_t i = 0; i + 1 < run.trace.size(); ++i) {
    const IterationRecord& rec = run.trace[i];
    if (rec.terminal) break;
    const double scaled = std::pow(rec.alpha, rec.gamma_k) * rec.vertex_divergence;
    double excess;
    if (run.config.variant == Variant::kGammaAdapt) {
      excess = rec.step_divergence - scaled * (1.0 + kSlack);
    } else {
      const double f_next = run.trace[i + 1].f_value;
      if (!std::isfinite(f_next)) continue;
      excess = f_next - (rec.f_value + rec.alpha * rec.directional_derivative + rec.L_k * scaled) -
               kSlack * (1.0 + std::abs(rec.f_value));
    }
    report.Record(rec.k, excess);
  }
  return report;
}

InequalityReport CheckMonotoneDescent(const SolverRun& run, double tol) {
  InequalityReport report;
  for (std::size_t i = 0; i + 1 < run.trace.size(); ++i) {
    const double f = run.trace[i].f_value;
    const double f_next = run.trace[i + 1].f_value;
    if (!std::isfinite(f_next)) continue;
    report.Record(run.trace[i].k, f_next - f - tol * (1.0 + std::abs(f)));
  }
  return report;
}

InequalityReport CheckGapDomination(const SolverRun& run, double f_star, double abs_tol) {
  InequalityReport report;
  for (const IterationRecord& rec : run.trace) {
    if (!std::isfinite(rec.f_value)) continue;
    report.Record(rec.k, (rec.f_value - f_star) - rec.fw_gap - abs_tol);
  }
  return report;
}

InequalityReport CheckSublinearEnvelope(const SolverRun& run, double f_star,
                                        double divergence_radius_sq) {
  InequalityReport report;
  double l_max = -std::numeric_limits<double>::infinity();
  double gamma_min = std::numeric_limits<double>::infinity();
  for (const IterationRecord& rec : run.trace) {
    if (!rec.terminal) {
      l_max = std::max(l_max, rec.L_k);
      gamma_min = std::min(gamma_min, rec.gamma_k);
    }
    if (rec.k < 1 || !std::isfinite(rec.f_value) || !std::isfinite(l_max)) continue;
    const double envelope =
        std::pow(2.0 / (rec.k + 2.0), gamma_min - 1.0) * l_max * divergence_radius_sq;
    report.Record(rec.k, (rec.f_value - f_star) - envelope);
  }
  return report;
}

CheckBudget CheckInnerCheckBudget(const SolverRun& run) {
  CheckBudget budget;
  budget.total_checks = run.TotalInnerChecks();
  budget.iterations = run.StepCount();
  const SolverConfig& c = run.config;
  budget.bound = 3.0 * budget.iterations + std::log2(2.0 * run.MaxL() / c.l0) +
                 std::log((c.gamma0 - 1.0) / (run.MinGamma() - 1.0)) / std::log(c.eta);
  return budget;
}

InequalityReport CheckHalvingOnFullSteps(const SolverRun& run, double f_star, double abs_tol) {
  InequalityReport report;
  for (std::size_t i = 0; i + 1 < run.trace.size(); ++i) {
    const IterationRecord& rec = run.trace[i];
    if (rec.terminal || rec.alpha != 1.0) continue;
    const double h = rec.f_value - f_star;
    const double h_next = run.trace[i + 1].f_value - f_star;
    report.Record(rec.k, h_next - 0.5 * h - abs_tol);
  }
  return report;
}

ScalingDiagnostic DiagnoseScaling(const Vector& x, const Vector& gradient, const Vector& vertex,
                                  const Vector& solution, const SetConstants& constants,
                                  double boundary_distance, const BregmanDivergence& geometry,
                                  double epsilon) {
  const double solution_divergence = geometry(solution, x);
  if (!(solution_divergence > 0.0)) {
    throw InputError("DiagnoseScaling: V(x*, x) must be positive");
  }
  ScalingDiagnostic diag;
  const double vertex_divergence = geometry(vertex, x);
  const double descent = -gradient.dot(vertex - x);
  diag.lhs = vertex_divergence > 0.0 ? descent / vertex_divergence : 0.0;
  diag.rhs_factor = -gradient.dot(solution - x) / solution_divergence;
  diag.tau_theory = (boundary_distance / constants.euclidean_diameter) *
                    (epsilon / constants.divergence_diameter);
  if (diag.rhs_factor > 0.0) {
    diag.tau_implied = diag.lhs / diag.rhs_factor;
  } else {
    diag.vacuous = true;
    diag.note = "condition vacuous at this point";
  }
  return diag;
}

LinearRateEnvelope ComputeLinearRateEnvelope(const SolverRun& run, double mu, double tau,
                                             double gamma, double f_star, double rel_slack) {
  LinearRateEnvelope env;
  if (run.trace.empty()) return env;
  const double shape = std::pow(gamma, gamma / (gamma + 1.0)) / (gamma + 1.0);
  for (const IterationRecord& rec : run.trace) {
    if (rec.terminal) break;
    double phi = 0.5;
    if (rec.alpha != 1.0) {
      phi = 1.0 - 0.5 * tau * shape * std::pow(mu / (2.0 * rec.L_k), 1.0 / (gamma - 1.0));
    }
    if (!(phi > 0.0 && phi <= 1.0)) {
      env.consistent = false;
      env.note = "contraction factor outside (0, 1] at iteration " + std::to_string(rec.k) +
                 ": parameters inconsistent";
    }
    env.factors.push_back(phi);
  }
  if (!env.consistent) return env;

  const double h0 = run.trace.front().f_value - f_star;
  double bound = h0;
  for (std::size_t k = 0; k < run.trace.size(); ++k) {
    if (k > 0) bound *= env.factors[k - 1];
    env.bounds.push_back(bound);
    const double h = run.trace[k].f_value - f_star;
    if (!std::isfinite(h)) continue;
    env.report.Record(run.trace[k].k, h - bound * (1.0 + rel_slack));
  }
  return env;
}

}  // namespace fwadapt
