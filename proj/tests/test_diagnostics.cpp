#include <cmath>
#include <random>

#include "doctest.h"
#include "fwadapt/diagnostics.hpp"
#include "fwadapt/errors.hpp"
#include "fwadapt/objectives.hpp"
#include "test_support.hpp"

using namespace fwadapt;

namespace {

Vector Vec(std::initializer_list<double> values) {
  Vector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double value : values) v[i++] = value;
  return v;
}

IterationRecord Row(int k, double f, double alpha, double L = 1.0, double gamma = 2.0) {
  IterationRecord r;
  r.k = k;
  r.f_value = f;
  r.fw_gap = 1.0;
  r.alpha = alpha;
  r.L_k = L;
  r.gamma_k = gamma;
  r.inner_checks = 1;
  r.directional_derivative = -1.0;
  r.vertex_divergence = 1.0;
  return r;
}

SolverRun Synthetic(std::vector<IterationRecord> rows) {
  SolverRun run;
  long long cum = 0;
  for (auto& r : rows) {
    cum += r.inner_checks;
    r.cum_inner_checks = cum;
  }
  rows.back().terminal = true;
  rows.back().alpha = 0.0;
  run.trace = std::move(rows);
  return run;
}

// Strongly convex quadratic with an interior minimiser on the simplex.
struct InteriorQuadratic {
  QuadraticObjective f;
  Vector solution;
  double f_star;
};

InteriorQuadratic MakeInteriorQuadratic(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const Vector entries = testing::RandomGaussian(n * n, rng);
  const Matrix a = Eigen::Map<const Matrix>(entries.data(), n, n);
  const Matrix hessian = a * a.transpose() / n + Matrix::Identity(n, n);
  const Vector solution = testing::RandomInteriorPoint(n, rng, 0.5 / n);
  QuadraticObjective f(hessian, hessian * solution);
  const double f_star = f.Value(solution);
  return {std::move(f), solution, f_star};
}

}  // namespace

TEST_CASE("monotone descent flags an increase") {
  const SolverRun run = Synthetic({Row(0, 3.0, 0.5), Row(1, 2.0, 0.5), Row(2, 2.5, 0.0)});
  const InequalityReport report = CheckMonotoneDescent(run);
  CHECK(report.checked == 2);
  CHECK(report.violations == 1);
  CHECK(report.worst_k == 1);
}

TEST_CASE("progress bound recomputed by hand") {
  // gd = -1, V = 1, L = 1, gamma = 2: bound = -1 * min(1/2, 1/2 * 1/2) = -0.25.
  const SolverRun ok = Synthetic({Row(0, 1.0, 0.5), Row(1, 0.75, 0.0)});
  CHECK(CheckProgressBound(ok).ok());
  const SolverRun bad = Synthetic({Row(0, 1.0, 0.5), Row(1, 0.76, 0.0)});
  const InequalityReport report = CheckProgressBound(bad);
  CHECK_FALSE(report.ok());
  CHECK(report.worst_excess == doctest::Approx(0.01 - 2e-9).epsilon(1e-6));
}

TEST_CASE("gap domination and halving on synthetic traces") {
  SolverRun run = Synthetic({Row(0, 1.0, 1.0), Row(1, 0.6, 0.5), Row(2, 0.2, 0.0)});
  CHECK(CheckGapDomination(run, 0.0).ok());
  CHECK(CheckGapDomination(run, -0.5).violations == 2);
  // h: 1.0 -> 0.6 after a full step is not a halving.
  CHECK(CheckHalvingOnFullSteps(run, 0.0).violations == 1);
  CHECK(CheckHalvingOnFullSteps(run, 0.0).checked == 1);
}

TEST_CASE("inner-check budget formula") {
  std::vector<IterationRecord> rows{Row(0, 1, 0.5, 2.0, 1.5), Row(1, 0.9, 0.5, 4.0, 2.0),
                                    Row(2, 0.8, 0.0)};
  rows[0].inner_checks = 3;
  rows[1].inner_checks = 2;
  rows[2].inner_checks = 0;
  SolverRun run = Synthetic(rows);
  run.config.l0 = 1.0;
  run.config.gamma0 = 2.0;
  run.config.eta = 2.0;
  const CheckBudget budget = CheckInnerCheckBudget(run);
  CHECK(budget.total_checks == 5);
  CHECK(budget.iterations == 2);
  // 3 * 2 + log2(2 * 4 / 1) + log_2((2 - 1) / (1.5 - 1)) = 6 + 3 + 1.
  CHECK(budget.bound == doctest::Approx(10.0));
  CHECK(budget.ok());
}

TEST_CASE("sublinear envelope on a synthetic trace") {
  // k = 1: (2/3)^1 * L_max * R^2 with L_max = 2, R^2 = 1.
  const SolverRun run = Synthetic({Row(0, 5.0, 0.5, 2.0), Row(1, 1.3, 0.0)});
  CHECK(CheckSublinearEnvelope(run, 0.0, 1.0).ok());
  const SolverRun high = Synthetic({Row(0, 5.0, 0.5, 2.0), Row(1, 1.4, 0.0)});
  CHECK_FALSE(CheckSublinearEnvelope(high, 0.0, 1.0).ok());
}

TEST_CASE("scaling diagnostic with the LMO hitting the solution") {
  const Vector x = Vec({0.2, 0.3, 0.5});
  const Vector s = Vec({1, 0, 0});
  const Vector g = Vec({-1, 0.5, 0.2});
  const ScalingDiagnostic diag = DiagnoseScaling(x, g, s, s, SetConstants{std::sqrt(2.0), 1.0, 2.0},
                                                 0.0, BregmanDivergence::Euclidean(), 1.0);
  REQUIRE(diag.tau_implied.has_value());
  CHECK(*diag.tau_implied == doctest::Approx(1.0));
  CHECK_FALSE(diag.vacuous);
}

TEST_CASE("scaling diagnostic at a stationary point is vacuous") {
  const Vector x = Vec({0.2, 0.3, 0.5});
  const ScalingDiagnostic diag =
      DiagnoseScaling(x, Vector::Zero(3), Vec({1, 0, 0}), Vec({0.3, 0.3, 0.4}),
                      SetConstants{std::sqrt(2.0), 1.0, 2.0}, 0.1, BregmanDivergence::Euclidean(), 0.1);
  CHECK(diag.lhs == 0.0);
  CHECK(diag.rhs_factor == 0.0);
  CHECK(diag.vacuous);
  CHECK(diag.note == "condition vacuous at this point");
  CHECK_FALSE(diag.tau_implied.has_value());
  CHECK_THROWS_AS(DiagnoseScaling(x, Vector::Zero(3), Vec({1, 0, 0}), x, SetConstants{}, 0.1,
                                  BregmanDivergence::Euclidean(), 0.1),
                  InputError);
}

TEST_CASE("implied tau dominates the theoretical tau on an interior quadratic") {
  const int n = 6;
  const InteriorQuadratic q = MakeInteriorQuadratic(n, 71);
  const ClippedSimplex set(n, 0.0);
  const BregmanDivergence geometry = BregmanDivergence::Euclidean();
  const SetConstants constants = ComputeSetConstants(set, geometry, 2000);
  const double delta = set.BoundaryDistance(q.solution);
  std::mt19937_64 rng(72);
  for (int trial = 0; trial < 100; ++trial) {
    const Vector x = set.SampleUniform(rng);
    const Vector g = q.f.Gradient(x);
    const double epsilon = geometry(q.solution, x);
    const ScalingDiagnostic diag =
        DiagnoseScaling(x, g, set.Lmo(g), q.solution, constants, delta, geometry, epsilon);
    REQUIRE(diag.tau_implied.has_value());
    REQUIRE(*diag.tau_implied >= diag.tau_theory * (1 - 1e-12));
  }
}

TEST_CASE("linear-rate factors") {
  const SolverRun run = Synthetic({Row(0, 1.0, 1.0), Row(1, 0.4, 0.3), Row(2, 0.3, 0.0)});
  const LinearRateEnvelope zero_tau = ComputeLinearRateEnvelope(run, 1.0, 0.0, 2.0, 0.0);
  REQUIRE(zero_tau.factors.size() == 2);
  CHECK(zero_tau.factors[0] == 0.5);
  CHECK(zero_tau.factors[1] == 1.0);
  CHECK(zero_tau.bounds[2] == doctest::Approx(0.5));
  CHECK(zero_tau.report.ok());

  // gamma = 2, mu = 1, L = 1, tau = 1: 1 - 1/2 * (2^(2/3)/3) * 1/2.
  const LinearRateEnvelope env = ComputeLinearRateEnvelope(run, 1.0, 1.0, 2.0, 0.0);
  CHECK(env.factors[1] == doctest::Approx(1.0 - 0.25 * std::pow(2.0, 2.0 / 3.0) / 3.0));

  const LinearRateEnvelope inconsistent = ComputeLinearRateEnvelope(run, 100.0, 10.0, 2.0, 0.0);
  CHECK_FALSE(inconsistent.consistent);
  CHECK_FALSE(inconsistent.note.empty());
  CHECK(inconsistent.report.checked == 0);
}

TEST_CASE("diagnostics hold on real runs of every variant") {
  std::mt19937_64 rng(73);
  const DOptimalDesign f = RandomDOptimalDesign(6, 24, rng);
  const ClippedSimplex set = ClippedSimplex::WithDefaultFloor(24);
  for (Variant v : {Variant::kFullAdapt, Variant::kGammaAdapt, Variant::kLAdapt, Variant::kFixed}) {
    SolverConfig config;
    config.variant = v;
    config.max_iter = 300;
    const SolverRun run = Solve(f, BregmanDivergence::Burg(), set, config, set.Center());
    CAPTURE(ToString(v));
    CHECK(CheckProgressBound(run).ok());
    CHECK(CheckAcceptanceInequality(run).ok());
    CHECK(CheckInnerCheckBudget(run).ok());
    if (v != Variant::kFixed) CHECK(CheckMonotoneDescent(run).ok());
  }
}

TEST_CASE("acceptance re-check catches a tampered record") {
  std::mt19937_64 rng(74);
  const DOptimalDesign f = RandomDOptimalDesign(4, 10, rng);
  const ClippedSimplex set = ClippedSimplex::WithDefaultFloor(10);
  SolverConfig config;
  config.max_iter = 50;
  SolverRun run = Solve(f, BregmanDivergence::Burg(), set, config, set.Center());
  REQUIRE(CheckAcceptanceInequality(run).ok());
  run.trace[10].L_k *= 1e-6;
  CHECK_FALSE(CheckAcceptanceInequality(run).ok());
}
