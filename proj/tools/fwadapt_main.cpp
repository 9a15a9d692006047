// Command-line runner for the Frank-Wolfe experiments.
//
//   fwadapt doptimal --m 25 --n 100 --solvers full-adapt,L-adapt,fixed --out runs/dopt
//   fwadapt poisson --m 500 --n 200 --seed 0 --out runs/poisson
//   fwadapt distributed --n 50 --nodes 16 --central 1 --cond 100 --sigma-ratio 0.01
//
// Exit status: 0 success, 1 input or I/O error, 2 solver failure.

#include <cstdio>
#include <exception>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fwadapt/errors.hpp"
#include "fwadapt/experiments.hpp"

namespace {

constexpr int kExitInput = 1;
constexpr int kExitSolver = 2;

struct Flags {
  int m = 0;
  int n = 0;
  int nodes = 16;
  int central = 1;
  double cond = 100.0;
  double sigma_ratio = 0.01;
  std::uint64_t seed = 0;
  std::optional<int> max_iter;
  std::optional<double> tol;
  std::vector<std::string> solvers;
  std::optional<double> eta;
  std::optional<double> l0;
  std::optional<double> gamma_max;
  std::string rejection_parity = "rejection-count";
  std::string out;
  std::string save_instance;
  std::string load_instance;
};

CLI::App* AddExperiment(CLI::App& app, const std::string& name, const std::string& description,
                        Flags& flags, int default_m, int default_n) {
  CLI::App* sub = app.add_subcommand(name, description);
  if (name != "distributed") {
    sub->add_option("--m", flags.m, "rows of the design / measurement matrix")
        ->default_val(default_m);
  }
  sub->add_option("--n", flags.n, "dimension of the simplex")->default_val(default_n);
  if (name == "distributed") {
    sub->add_option("--nodes", flags.nodes, "number of nodes m")->default_val(16);
    sub->add_option("--central", flags.central, "nodes held by the central server")
        ->default_val(1);
    sub->add_option("--cond", flags.cond, "L_euk / mu_euk of the base Hessian")->default_val(100.0);
    sub->add_option("--sigma-ratio", flags.sigma_ratio, "similarity constant over L_euk")
        ->default_val(0.01);
  }
  sub->add_option("--seed", flags.seed, "random seed")->default_val(0);
  sub->add_option("--max-iter", flags.max_iter, "outer iterations per solver");
  sub->add_option("--tol", flags.tol, "FW gap tolerance (default 1e-6)");
  sub->add_option("--solvers", flags.solvers, "comma-separated solver list")->delimiter(',');
  sub->add_option("--eta", flags.eta, "gamma adaptation factor (> 1)");
  sub->add_option("--l0", flags.l0, "initial smoothness estimate");
  sub->add_option("--gamma-max", flags.gamma_max, "upper bound on gamma");
  sub->add_option("--rejection-parity", flags.rejection_parity,
                  "rejection-count or outer-k")
      ->default_val("rejection-count");
  sub->add_option("--out", flags.out, "output directory for CSV traces and summary.txt");
  sub->add_option("--save-instance", flags.save_instance, "write the generated instance");
  sub->add_option("--load-instance", flags.load_instance, "read the instance instead of generating");
  return sub;
}

void PrintResult(const fwadapt::ExperimentResult& result) {
  std::cout << "experiment " << fwadapt::ToString(result.spec.experiment) << " seed "
            << result.spec.seed << "  f*_ref = " << std::setprecision(12) << result.f_star_ref
            << '\n';
  for (const fwadapt::VariantOutcome& outcome : result.outcomes) {
    std::cout << "  " << std::left << std::setw(12) << outcome.name << std::right;
    if (outcome.failed) {
      std::cout << "  error: " << outcome.error << '\n';
      continue;
    }
    const fwadapt::SolverRun& run = outcome.run;
    std::cout << "  residual " << std::setw(12) << std::setprecision(5) << outcome.final_residual
              << "  iters " << std::setw(7) << run.StepCount() << "  checks " << std::setw(8)
              << run.TotalInnerChecks() << "  " << fwadapt::ToString(run.termination);
    if (outcome.ledger) {
      std::cout << "  rounds " << outcome.ledger->rounds << "  grad_msgs "
                << outcome.ledger->gradient_vectors_sent;
    }
    std::cout << '\n';
  }
  if (!result.spec.out_dir.empty()) std::cout << "wrote " << result.spec.out_dir.string() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Frank-Wolfe with adaptive Bregman step sizes"};
  app.require_subcommand(1);
  // One flag set per subcommand: CLI11 writes defaults at registration time.
  Flags doptimal_flags, poisson_flags, distributed_flags;
  CLI::App* doptimal =
      AddExperiment(app, "doptimal", "D-optimal design on the simplex", doptimal_flags, 25, 100);
  CLI::App* poisson =
      AddExperiment(app, "poisson", "Poisson linear inverse problem", poisson_flags, 500, 200);
  CLI::App* distributed = AddExperiment(
      app, "distributed", "similarity-geometry FW on a simulated network", distributed_flags, 0, 50);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  fwadapt::ExperimentSpec spec;
  Flags* selected = &doptimal_flags;
  if (poisson->parsed()) {
    spec.experiment = fwadapt::ExperimentKind::kPoisson;
    selected = &poisson_flags;
  } else if (distributed->parsed()) {
    spec.experiment = fwadapt::ExperimentKind::kDistributed;
    selected = &distributed_flags;
  } else if (!doptimal->parsed()) {
    return kExitInput;
  }
  const Flags& flags = *selected;
  spec.m = flags.m;
  spec.n = flags.n;
  spec.nodes = flags.nodes;
  spec.central = flags.central;
  spec.cond = flags.cond;
  spec.sigma_ratio = flags.sigma_ratio;
  spec.seed = flags.seed;
  spec.solvers = flags.solvers;
  spec.max_iter = flags.max_iter;
  spec.tol = flags.tol;
  spec.eta = flags.eta;
  spec.l0 = flags.l0;
  spec.gamma_max = flags.gamma_max;
  spec.out_dir = flags.out;
  if (!flags.save_instance.empty()) spec.save_instance = flags.save_instance;
  if (!flags.load_instance.empty()) spec.load_instance = flags.load_instance;

  try {
    spec.rejection_parity = fwadapt::ParseRejectionParity(flags.rejection_parity);
    const fwadapt::ExperimentResult result = fwadapt::RunExperiment(spec);
    PrintResult(result);
    return result.AnyFailure() ? kExitSolver : 0;
  } catch (const fwadapt::InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kExitInput;
  } catch (const fwadapt::IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return kExitSolver;
  }
}
