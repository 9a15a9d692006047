#include "fwadapt/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <memory>
#include <random>
#include <thread>

#include "fwadapt/errors.hpp"
#include "fwadapt/instance_io.hpp"
#include "fwadapt/objectives.hpp"
#include "fwadapt/trace_csv.hpp"

namespace fwadapt {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr int kSetConstantSamples = 2000;

// Independent streams: adding a solver never perturbs the instance.
enum Stream : std::uint64_t { kInstanceStream = 0, kSolverStream = 1 };

std::mt19937_64 MakeStream(std::uint64_t seed, Stream stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  return std::mt19937_64(seq);
}

const char* kDistributedSolvers[] = {"similarity", "euclidean"};
const char* kSimplexSolvers[] = {"full-adapt", "gamma-adapt", "L-adapt", "fixed"};

/// Runs task(i) for i in [0, count) on at most `workers` threads.
void ParallelFor(int count, int workers, const std::function<void(int)>& task) {
  workers = std::clamp(workers, 1, std::max(count, 1));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) task(i);
    return;
  }
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (int i = w; i < count; i += workers) task(i);
    });
  }
  for (std::thread& t : pool) t.join();
}

SolverConfig BaseConfig(const ExperimentSpec& spec, double default_l0) {
  SolverConfig config;
  config.l0 = spec.l0.value_or(default_l0);
  config.eta = spec.eta.value_or(2.0);
  config.gamma_max = spec.gamma_max.value_or(2.0);
  config.gamma0 = std::min(2.0, config.gamma_max);
  config.gap_tol = spec.tol.value_or(1e-6);
  config.max_iter = spec.MaxIter();
  config.rejection_parity = spec.rejection_parity;
  return config;
}

double MinOverTrace(const SolverRun& run) {
  double best = std::numeric_limits<double>::infinity();
  for (const IterationRecord& rec : run.trace) {
    if (std::isfinite(rec.f_value)) best = std::min(best, rec.f_value);
  }
  return best;
}

void RunSimplexExperiment(const ExperimentSpec& spec, ExperimentResult& result) {
  std::mt19937_64 instance_rng = MakeStream(spec.seed, kInstanceStream);
  std::unique_ptr<Objective> objective;
  double default_l0 = 1.0;
  if (spec.experiment == ExperimentKind::kDOptimal) {
    auto problem = std::make_unique<DOptimalDesign>(
        spec.load_instance ? LoadDOptimalDesign(*spec.load_instance)
                           : RandomDOptimalDesign(spec.m, spec.n, instance_rng));
    if (spec.save_instance) SaveInstance(*spec.save_instance, *problem);
    default_l0 = SmoothnessConstant(*problem);
    objective = std::move(problem);
  } else {
    auto problem = std::make_unique<PoissonInverse>(
        spec.load_instance ? LoadPoissonInverse(*spec.load_instance)
                           : RandomPoissonInverse(spec.m, spec.n, instance_rng));
    if (spec.save_instance) SaveInstance(*spec.save_instance, *problem);
    default_l0 = SmoothnessConstant(*problem);
    objective = std::move(problem);
  }

  const int n = objective->dim();
  const ClippedSimplex set = ClippedSimplex::WithDefaultFloor(n);
  const BregmanDivergence geometry = BregmanDivergence::Burg();
  const Vector x0 = set.Center();
  const SolverConfig base = BaseConfig(spec, default_l0);
  result.l0 = base.l0;
  std::mt19937_64 solver_rng = MakeStream(spec.seed, kSolverStream);
  result.constants =
      ComputeSetConstants(set, geometry, kSetConstantSamples, solver_rng());

  const std::vector<std::string> names = spec.SolverNames();
  result.outcomes.resize(names.size());
  ParallelFor(static_cast<int>(names.size()), WorkerCount(), [&](int i) {
    VariantOutcome& outcome = result.outcomes[i];
    outcome.name = names[i];
    SolverConfig config = base;
    config.variant = ParseVariant(names[i]);
    try {
      outcome.run = Solve(*objective, geometry, set, config, x0);
    } catch (const std::exception& e) {
      outcome.failed = true;
      outcome.error = e.what();
    }
  });

  std::vector<const SolverRun*> runs;
  for (const VariantOutcome& outcome : result.outcomes) {
    if (!outcome.failed) runs.push_back(&outcome.run);
  }
  SolverConfig reference = base;
  reference.max_iter = base.max_iter * spec.reference_multiplier;
  result.f_star_ref = ReferenceOptimum(*objective, geometry, set, reference, x0, runs);
}

void RunDistributedExperiment(const ExperimentSpec& spec, ExperimentResult& result) {
  std::mt19937_64 instance_rng = MakeStream(spec.seed, kInstanceStream);
  std::optional<Vector> planted;
  std::optional<SimilarityNetwork> loaded;
  if (spec.load_instance) {
    loaded.emplace(LoadNetwork(*spec.load_instance));
  } else {
    GeneratedNetwork generated = GenerateNetwork(spec.n, spec.nodes, spec.central, spec.cond,
                                                 spec.sigma_ratio, instance_rng);
    planted = generated.solution;
    loaded.emplace(std::move(generated.network));
  }
  const SimilarityNetwork& network = *loaded;
  if (spec.save_instance) SaveNetwork(*spec.save_instance, network);

  const int n = network.dim();
  const ClippedSimplex set(n, 0.0);
  const Vector x0 = set.Center();
  const SolverConfig base = BaseConfig(spec, 1.0);
  result.l0 = base.l0;
  result.sigma_hat = EstimateSigma(network);
  result.mu_euk = network.global().mu_euk();
  result.l_euk = network.global().l_euk();
  const DistributedOptions defaults;
  const SimilarityGeometry similarity =
      BuildSimilarityGeometry(network, defaults.sigma_safety * result.sigma_hat);
  std::mt19937_64 solver_rng = MakeStream(spec.seed, kSolverStream);
  result.constants =
      ComputeSetConstants(set, similarity.divergence, kSetConstantSamples, solver_rng());

  const std::vector<std::string> names = spec.SolverNames();
  result.outcomes.resize(names.size());
  ParallelFor(static_cast<int>(names.size()), WorkerCount(), [&](int i) {
    VariantOutcome& outcome = result.outcomes[i];
    outcome.name = names[i];
    DistributedOptions options;
    options.geometry = names[i] == "similarity" ? DistributedGeometry::kSimilarity
                                                : DistributedGeometry::kEuclidean;
    try {
      DistributedRun run = SolveDistributed(network, set, base, x0, options);
      outcome.run = std::move(run.run);
      outcome.ledger = run.ledger;
    } catch (const std::exception& e) {
      outcome.failed = true;
      outcome.error = e.what();
    }
  });

  std::vector<const SolverRun*> runs;
  for (const VariantOutcome& outcome : result.outcomes) {
    if (!outcome.failed) runs.push_back(&outcome.run);
  }
  SolverConfig reference = base;
  reference.l0 = 1.0;
  reference.max_iter = base.max_iter * spec.reference_multiplier;
  result.f_star_ref = ReferenceOptimum(network.global(), similarity.divergence, set, reference,
                                       x0, runs);
  if (planted) result.f_star_ref = std::min(result.f_star_ref, network.global().Value(*planted));
}

std::string CsvName(const ExperimentSpec& spec, const std::string& solver) {
  return ToString(spec.experiment) + "_" + solver + ".csv";
}

}  // namespace

std::string ToString(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::kDOptimal:
      return "doptimal";
    case ExperimentKind::kPoisson:
      return "poisson";
    case ExperimentKind::kDistributed:
      return "distributed";
  }
  return "unknown";
}

void ExperimentSpec::Validate() const {
  if (experiment == ExperimentKind::kDistributed) {
    if (n < 2) throw InputError("distributed: --n must be >= 2");
    if (nodes < 1 || central < 1 || central > nodes) {
      throw InputError("distributed: need 1 <= --central <= --nodes");
    }
    if (!(cond >= 1.0)) throw InputError("distributed: --cond must be >= 1");
    if (!(sigma_ratio >= 0.0)) throw InputError("distributed: --sigma-ratio must be >= 0");
  } else if (!load_instance) {
    if (m < 1 || n < 2) throw InputError("--m must be >= 1 and --n >= 2");
    if (experiment == ExperimentKind::kDOptimal && n < m + 1) {
      throw InputError("doptimal requires n >= m + 1");
    }
  }
  if (max_iter && *max_iter < 0) throw InputError("--max-iter must be >= 0");
  if (reference_multiplier < 1) throw InputError("reference multiplier must be >= 1");
  for (const std::string& name : SolverNames()) {
    if (experiment == ExperimentKind::kDistributed) {
      if (name != "similarity" && name != "euclidean") {
        throw InputError("distributed solvers are 'similarity' and 'euclidean', got '" + name + "'");
      }
    } else {
      ParseVariant(name);
    }
  }
  SolverConfig probe;
  probe.l0 = l0.value_or(1.0);
  probe.eta = eta.value_or(2.0);
  probe.gamma_max = gamma_max.value_or(2.0);
  probe.gamma0 = std::min(2.0, probe.gamma_max);
  probe.gap_tol = tol.value_or(1e-6);
  probe.max_iter = MaxIter();
  probe.Validate();
}

std::vector<std::string> ExperimentSpec::SolverNames() const {
  if (!solvers.empty()) return solvers;
  if (experiment == ExperimentKind::kDistributed) {
    return {std::begin(kDistributedSolvers), std::end(kDistributedSolvers)};
  }
  return {std::begin(kSimplexSolvers), std::end(kSimplexSolvers)};
}

int ExperimentSpec::MaxIter() const {
  if (max_iter) return *max_iter;
  return experiment == ExperimentKind::kDistributed ? 100000 : 1000;
}

bool VariantOutcome::SolverFailure() const {
  return failed || run.termination == Termination::kDomainError ||
         run.termination == Termination::kInnerCheckBudget;
}

bool ExperimentResult::AnyFailure() const {
  return std::any_of(outcomes.begin(), outcomes.end(),
                     [](const VariantOutcome& o) { return o.SolverFailure(); });
}

const VariantOutcome* ExperimentResult::Find(const std::string& name) const {
  for (const VariantOutcome& outcome : outcomes) {
    if (outcome.name == name) return &outcome;
  }
  return nullptr;
}

int WorkerCount() {
  int workers = static_cast<int>(std::thread::hardware_concurrency());
  if (const char* env = std::getenv("FW_THREADS")) {
    char* end = nullptr;
    const long parsed = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && parsed >= 1) workers = static_cast<int>(parsed);
  }
  return std::max(workers, 1);
}

double ReferenceOptimum(const Objective& objective, const BregmanDivergence& geometry,
                        const ClippedSimplex& set, const SolverConfig& base, const Vector& x0,
                        const std::vector<const SolverRun*>& runs) {
  SolverConfig config = base;
  config.gap_tol = 0.0;
  double best = std::numeric_limits<double>::infinity();
  // The L-adaptive run only ever lowers the estimate.
  for (Variant variant : {Variant::kFullAdapt, Variant::kLAdapt}) {
    config.variant = variant;
    best = std::min(best, MinOverTrace(Solve(objective, geometry, set, config, x0)));
  }
  for (const SolverRun* run : runs) best = std::min(best, MinOverTrace(*run));
  return best;
}

ExperimentResult RunExperiment(const ExperimentSpec& spec) {
  spec.Validate();
  ExperimentResult result;
  result.spec = spec;
  if (!spec.out_dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(spec.out_dir, ec);
    if (ec) throw IoError("cannot create output directory " + spec.out_dir.string());
  }

  if (spec.experiment == ExperimentKind::kDistributed) {
    RunDistributedExperiment(spec, result);
  } else {
    RunSimplexExperiment(spec, result);
  }

  for (VariantOutcome& outcome : result.outcomes) {
    outcome.final_residual = outcome.failed ? kNaN : outcome.run.FinalValue() - result.f_star_ref;
  }
  if (spec.out_dir.empty()) return result;

  for (VariantOutcome& outcome : result.outcomes) {
    if (outcome.failed) continue;
    outcome.csv_path = spec.out_dir / CsvName(spec, outcome.name);
    std::optional<LedgerFooter> footer;
    if (outcome.ledger) footer = LedgerFooter{outcome.ledger->rounds, outcome.ledger->gradient_vectors_sent};
    WriteTraceFile(outcome.csv_path, outcome.run, footer);
  }
  WriteSummary(spec.out_dir / "summary.txt", result);
  return result;
}

void WriteSummary(const std::filesystem::path& path, const ExperimentResult& result) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  const ExperimentSpec& spec = result.spec;
  out << std::setprecision(17);
  out << "experiment: " << ToString(spec.experiment) << '\n';
  out << "seed: " << spec.seed << '\n';
  if (spec.experiment == ExperimentKind::kDistributed) {
    out << "n: " << spec.n << "\nnodes: " << spec.nodes << "\ncentral: " << spec.central << '\n';
    out << "sigma_hat: " << result.sigma_hat << "\nmu_euk: " << result.mu_euk
        << "\nL_euk: " << result.l_euk
        << "\nrelative_condition_number: " << RelativeConditionNumber(result.mu_euk, result.sigma_hat)
        << '\n';
  } else {
    out << "m: " << spec.m << "\nn: " << spec.n << '\n';
  }
  out << "L0: " << result.l0 << '\n';
  out << "max_iter: " << spec.MaxIter() << '\n';
  out << "f_star_ref: " << result.f_star_ref << '\n';
  out << "solver,final_residual,total_inner_checks,iterations,elapsed_seconds,termination,csv\n";
  for (const VariantOutcome& outcome : result.outcomes) {
    if (outcome.failed) {
      out << outcome.name << ",nan,0,0,0,error: " << outcome.error << ",\n";
      continue;
    }
    const SolverRun& run = outcome.run;
    const double elapsed = run.trace.empty() ? 0.0 : run.trace.back().elapsed_seconds;
    out << outcome.name << ',' << outcome.final_residual << ',' << run.TotalInnerChecks() << ','
        << run.StepCount() << ',' << elapsed << ',' << ToString(run.termination) << ','
        << outcome.csv_path.filename().string() << '\n';
  }
  out.flush();
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace fwadapt
