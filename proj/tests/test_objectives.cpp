#include <cmath>
#include <random>

#include "doctest.h"
#include "fwadapt/errors.hpp"
#include "fwadapt/objectives.hpp"
#include "fwadapt/simplex.hpp"
#include "test_support.hpp"

using namespace fwadapt;
using fwadapt::testing::FiniteDifferenceGradient;
using fwadapt::testing::RandomInteriorPoint;
using fwadapt::testing::RelativeError;

namespace {

Vector Vec(std::initializer_list<double> values) {
  Vector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double value : values) v[i++] = value;
  return v;
}

PairSampler SimplexPairs(int n, std::mt19937_64& rng) {
  return [n, &rng] {
    return std::make_pair(RandomInteriorPoint(n, rng, 1e-3), RandomInteriorPoint(n, rng, 1e-3));
  };
}

}  // namespace

TEST_CASE("d-optimal value and gradient on the identity design") {
  const DOptimalDesign problem(Matrix::Identity(2, 3).leftCols(3));
  // Three columns (e1, e2, 0) keep n >= m + 1; the zero column only feeds H.
  const Vector x = Vec({0.5, 0.5, 0.0});
  const Matrix h = problem.InformationMatrix(x);
  CHECK(h.isApprox(0.5 * Matrix::Identity(2, 2)));
  CHECK(problem.Value(x) == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-14));
  CHECK(problem.Value(x) == doctest::Approx(1.38629).epsilon(1e-5));
  const Vector g = problem.Gradient(x);
  CHECK(g[0] == doctest::Approx(-2.0));
  CHECK(g[1] == doctest::Approx(-2.0));
  CHECK(g[2] == doctest::Approx(0.0));
}

TEST_CASE("d-optimal gradient is invariant to scaling the design vectors") {
  std::mt19937_64 rng(31);
  const DOptimalDesign problem = RandomDOptimalDesign(3, 8, rng);
  const DOptimalDesign scaled(3.5 * problem.vectors());
  for (int s = 0; s < 20; ++s) {
    const Vector x = RandomInteriorPoint(8, rng);
    CHECK(RelativeError(scaled.Gradient(x), problem.Gradient(x)) <= 1e-12);
    CHECK(scaled.Value(x) == doctest::Approx(problem.Value(x) - 2 * 3 * std::log(3.5)));
  }
}

TEST_CASE("d-optimal construction errors") {
  CHECK_THROWS_AS(DOptimalDesign(Matrix::Identity(2, 2)), InputError);
  Matrix rank_deficient = Matrix::Zero(2, 4);
  rank_deficient.row(0).setOnes();
  CHECK_THROWS_AS(DOptimalDesign{rank_deficient}, SingularMatrixError);
  std::mt19937_64 rng(32);
  const DOptimalDesign problem = RandomDOptimalDesign(3, 5, rng);
  Vector degenerate = Vector::Zero(5);
  degenerate[0] = 1.0;
  CHECK_THROWS_AS(problem.Value(degenerate), SingularMatrixError);
}

TEST_CASE("poisson value on identical vectors is zero") {
  const Vector y = Vec({0.2, 0.3, 0.5});
  const PoissonInverse problem(Matrix::Identity(3, 3), y);
  CHECK(problem.Value(y) == doctest::Approx(0.0));
  CHECK(problem.Gradient(y).norm() <= 1e-15);
}

TEST_CASE("poisson scalar instance") {
  const PoissonInverse problem(Matrix::Constant(1, 1, 1.0), Vec({2}));
  CHECK(problem.Value(Vec({1})) == doctest::Approx(1.0 - std::log(2.0)).epsilon(1e-14));
  CHECK(problem.Value(Vec({1})) == doctest::Approx(0.30685).epsilon(1e-5));
  CHECK(problem.Gradient(Vec({1}))[0] == doctest::Approx(std::log(0.5)).epsilon(1e-14));
}

TEST_CASE("poisson input validation and domain errors") {
  CHECK_THROWS_AS(PoissonInverse(Matrix::Constant(2, 2, -1.0), Vec({1, 1})), InputError);
  CHECK_THROWS_AS(PoissonInverse(Matrix::Zero(2, 2), Vec({1, 1})), InputError);
  CHECK_THROWS_AS(PoissonInverse(Matrix::Identity(2, 2), Vec({1, 0})), InputError);
  const PoissonInverse problem(Matrix::Identity(2, 2), Vec({1, 1}));
  CHECK_THROWS_AS(problem.Value(Vec({0.0, 1.0})), DomainError);
}

TEST_CASE("smoothness constants") {
  std::mt19937_64 rng(33);
  CHECK(SmoothnessConstant(RandomDOptimalDesign(2, 5, rng)) == 1.0);
  CHECK(SmoothnessConstant(PoissonInverse(Matrix::Ones(3, 2), Vec({1, 2, 3}))) == 6.0);
  CHECK(SmoothnessConstant(PoissonInverse(Matrix::Ones(1, 2), Vec({1}))) == 1.0);
}

TEST_CASE("gradients match finite differences") {
  std::mt19937_64 rng(34);
  const DOptimalDesign dopt = RandomDOptimalDesign(4, 12, rng);
  const PoissonInverse poisson = RandomPoissonInverse(15, 12, rng);
  const Matrix a = Matrix::Random(12, 12);
  const QuadraticObjective quad(a * a.transpose(), Vector::Random(12));
  for (const Objective* f : std::initializer_list<const Objective*>{&dopt, &poisson, &quad}) {
    for (int s = 0; s < 50; ++s) {
      const Vector x = RandomInteriorPoint(12, rng, 5e-3);
      const Vector fd = FiniteDifferenceGradient([&](const Vector& p) { return f->Value(p); }, x);
      const auto [value, gradient] = f->ValueAndGradient(x);
      REQUIRE(RelativeError(gradient, fd) <= 1e-5);
      REQUIRE(value == f->Value(x));
      REQUIRE(gradient == f->Gradient(x));
    }
  }
}

TEST_CASE("poisson value is nonnegative on feasible points") {
  std::mt19937_64 rng(35);
  const PoissonInverse problem = RandomPoissonInverse(20, 10, rng);
  for (int s = 0; s < 1000; ++s) REQUIRE(problem.Value(RandomInteriorPoint(10, rng, 1e-4)) >= 0.0);
}

TEST_CASE("d-optimal value is midpoint convex") {
  std::mt19937_64 rng(36);
  const DOptimalDesign problem = RandomDOptimalDesign(3, 9, rng);
  for (int s = 0; s < 100; ++s) {
    const Vector x = RandomInteriorPoint(9, rng);
    const Vector y = RandomInteriorPoint(9, rng);
    CHECK(problem.Value(0.5 * (x + y)) <= 0.5 * (problem.Value(x) + problem.Value(y)) + 1e-9);
  }
}

TEST_CASE("quadratic objective caches its spectrum and checks symmetry") {
  Matrix a(2, 2);
  a << 2, 0, 0, 5;
  const QuadraticObjective quad(a, Vec({1, 1}));
  CHECK(quad.mu_euk() == doctest::Approx(2.0));
  CHECK(quad.l_euk() == doctest::Approx(5.0));
  a(0, 1) = 1.0;
  CHECK_THROWS_AS(QuadraticObjective(a, Vec({1, 1})), InputError);
}

TEST_CASE("d-optimal is 1-smooth relative to burg entropy") {
  std::mt19937_64 rng(37);
  const DOptimalDesign problem = RandomDOptimalDesign(5, 20, rng);
  const RelativeSmoothnessCheck check = VerifyRelativeSmoothness(
      problem, BregmanDivergence::Burg(), 1.0, SimplexPairs(20, rng), 10000);
  CHECK(check.passed);
  CHECK(check.samples == 10000);
}

TEST_CASE("poisson is |y|_1-smooth relative to burg entropy") {
  std::mt19937_64 rng(38);
  const PoissonInverse problem = RandomPoissonInverse(30, 10, rng);
  const RelativeSmoothnessCheck check =
      VerifyRelativeSmoothness(problem, BregmanDivergence::Burg(), SmoothnessConstant(problem),
                               SimplexPairs(10, rng), 2000);
  CHECK(check.passed);
}

TEST_CASE("relative smoothness on identical pairs is tight") {
  std::mt19937_64 rng(39);
  const DOptimalDesign problem = RandomDOptimalDesign(2, 4, rng);
  const Vector x = RandomInteriorPoint(4, rng);
  const RelativeSmoothnessCheck check = VerifyRelativeSmoothness(
      problem, BregmanDivergence::Burg(), 1.0, [&] { return std::make_pair(x, x); }, 3);
  CHECK(check.passed);
  CHECK(check.worst_violation == doctest::Approx(0.0));
}

TEST_CASE("half squared norm: L = 1 passes, L = 0.5 fails with a witness") {
  std::mt19937_64 rng(40);
  const QuadraticObjective quad(Matrix::Identity(3, 3), Vector::Zero(3));
  const PairSampler gaussian = [&] {
    return std::make_pair(testing::RandomGaussian(3, rng), testing::RandomGaussian(3, rng));
  };
  CHECK(VerifyRelativeSmoothness(quad, BregmanDivergence::Euclidean(), 1.0, gaussian, 1000).passed);
  const RelativeSmoothnessCheck fail =
      VerifyRelativeSmoothness(quad, BregmanDivergence::Euclidean(), 0.5, gaussian, 1000);
  CHECK_FALSE(fail.passed);
  REQUIRE(fail.witness_x.size() == 3);
  const Vector& x = fail.witness_x;
  const Vector& y = fail.witness_y;
  CHECK(quad.Value(x) > quad.Value(y) + quad.Gradient(y).dot(x - y) + 0.25 * (x - y).squaredNorm());
}

TEST_CASE("generators are deterministic and respect the data rules") {
  std::mt19937_64 a(41), b(41);
  CHECK(RandomDOptimalDesign(3, 7, a).vectors() == RandomDOptimalDesign(3, 7, b).vectors());
  const PoissonInverse problem = RandomPoissonInverse(50, 20, a);
  CHECK(problem.measurement().minCoeff() >= 0.0);
  CHECK(problem.measurement().maxCoeff() <= 1.0);
  CHECK(problem.counts().minCoeff() >= 1e-3);
  CHECK(problem.counts().maxCoeff() <= 1.0);
}
