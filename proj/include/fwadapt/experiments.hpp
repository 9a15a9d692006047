#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fwadapt/distributed.hpp"
#include "fwadapt/simplex.hpp"
#include "fwadapt/solver.hpp"

namespace fwadapt {

enum class ExperimentKind { kDOptimal, kPoisson, kDistributed };

std::string ToString(ExperimentKind kind);

struct ExperimentSpec {
  ExperimentKind experiment = ExperimentKind::kDOptimal;
  int m = 25;
  int n = 100;
  // Distributed instances only.
  int nodes = 16;
  int central = 1;
  double cond = 100.0;
  double sigma_ratio = 0.01;

  std::uint64_t seed = 0;
  /// Variant names; for distributed runs "similarity" and "euclidean".
  /// Empty selects every solver of the experiment.
  std::vector<std::string> solvers;
  /// Unset fields take the per-experiment defaults.
  std::optional<int> max_iter;
  std::optional<double> tol;
  std::optional<double> eta;
  std::optional<double> l0;
  std::optional<double> gamma_max;
  RejectionParity rejection_parity = RejectionParity::kRejectionCount;
  /// Reference run budget as a multiple of max_iter.
  int reference_multiplier = 10;

  /// Empty: no files are written.
  std::filesystem::path out_dir;
  std::optional<std::filesystem::path> save_instance;
  std::optional<std::filesystem::path> load_instance;

  /// Throws InputError for nonpositive dimensions, n < m + 1 on doptimal,
  /// unknown solver names or invalid overrides.
  void Validate() const;
  std::vector<std::string> SolverNames() const;
  int MaxIter() const;
};

struct VariantOutcome {
  std::string name;
  SolverRun run;
  std::optional<CommunicationLedger> ledger;
  /// Last f_value minus the reference optimum.
  double final_residual = 0.0;
  bool failed = false;
  std::string error;
  std::filesystem::path csv_path;

  /// Exception, domain error or exhausted inner-check budget.
  bool SolverFailure() const;
};

struct ExperimentResult {
  ExperimentSpec spec;
  std::vector<VariantOutcome> outcomes;
  double f_star_ref = 0.0;
  /// Starting L of the experiment's solvers.
  double l0 = 1.0;
  /// Sampled constants of the feasible set under the experiment geometry.
  SetConstants constants;
  /// Distributed runs only.
  double sigma_hat = 0.0;
  double mu_euk = 0.0;
  double l_euk = 0.0;

  bool AnyFailure() const;
  const VariantOutcome* Find(const std::string& name) const;
};

/// Runs every requested solver from x0 = (1/n, ..., 1/n) on one instance,
/// computes the reference optimum and, if out_dir is set, writes one CSV per
/// solver plus summary.txt. Solver exceptions are recorded per outcome.
ExperimentResult RunExperiment(const ExperimentSpec& spec);

/// Best value found by a fully adaptive and an L-adaptive run, each with gap
/// tolerance 0 and base.max_iter iterations, also minimised over every row of
/// `runs`.
double ReferenceOptimum(const Objective& objective, const BregmanDivergence& geometry,
                        const ClippedSimplex& set, const SolverConfig& base, const Vector& x0,
                        const std::vector<const SolverRun*>& runs);

/// Worker cap from FW_THREADS (default: hardware concurrency, at least 1).
int WorkerCount();

void WriteSummary(const std::filesystem::path& path, const ExperimentResult& result);

}  // namespace fwadapt
