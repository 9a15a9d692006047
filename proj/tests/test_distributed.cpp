#include <cmath>
#include <filesystem>
#include <random>

#include "doctest.h"
#include "fwadapt/distributed.hpp"
#include "fwadapt/errors.hpp"
#include "test_support.hpp"

using namespace fwadapt;

namespace {

Vector Vec(std::initializer_list<double> values) {
  Vector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double value : values) v[i++] = value;
  return v;
}

// Two nodes, A_1 = I, A_2 = 3I, node 1 central.
SimilarityNetwork HandNetwork() {
  std::vector<QuadraticObjective> nodes;
  nodes.emplace_back(Matrix::Identity(3, 3), Vec({0.1, 0.2, 0.3}));
  nodes.emplace_back(3.0 * Matrix::Identity(3, 3), Vec({0.3, 0.2, 0.1}));
  return SimilarityNetwork(std::move(nodes), 1);
}

SimilarityNetwork RandomNetwork(int n, int m, int central, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return GenerateNetwork(n, m, central, 20.0, 0.05, rng).network;
}

}  // namespace

TEST_CASE("aggregate gradient of two unit quadratics") {
  std::vector<QuadraticObjective> nodes;
  nodes.emplace_back(Matrix::Identity(2, 2), Vec({1, 0}));
  nodes.emplace_back(Matrix::Identity(2, 2), Vec({0, 1}));
  const SimilarityNetwork network(std::move(nodes), 1);
  CommunicationLedger ledger;
  const Vector g = network.AggregateGradient(Vector::Zero(2), &ledger);
  CHECK(g[0] == doctest::Approx(-0.5));
  CHECK(g[1] == doctest::Approx(-0.5));
  CHECK(ledger.rounds == 1);
  CHECK(ledger.gradient_vectors_sent == 1);
}

TEST_CASE("all-central networks send nothing") {
  std::vector<QuadraticObjective> nodes;
  nodes.emplace_back(Matrix::Identity(2, 2), Vec({1, 0}));
  nodes.emplace_back(Matrix::Identity(2, 2), Vec({0, 1}));
  const SimilarityNetwork network(std::move(nodes), 2);
  CommunicationLedger ledger;
  network.AggregateGradient(Vector::Zero(2), &ledger);
  network.AggregateGradient(Vector::Ones(2), &ledger);
  CHECK(ledger.rounds == 2);
  CHECK(ledger.gradient_vectors_sent == 0);
}

TEST_CASE("aggregation matches the explicit average and is thread-count independent") {
  const SimilarityNetwork network = RandomNetwork(12, 7, 2, 91);
  std::mt19937_64 rng(92);
  for (int s = 0; s < 50; ++s) {
    const Vector x = testing::RandomGaussian(12, rng);
    const Vector serial = network.AggregateGradient(x);
    CHECK((serial - network.global().Gradient(x)).norm() <= 1e-12 * (1 + serial.norm()));
    CHECK(network.AggregateGradient(x, nullptr, 3) == serial);
    CHECK(network.AggregateGradient(x, nullptr, 7) == serial);
    CHECK(network.AggregateValue(x) == doctest::Approx(network.global().Value(x)).epsilon(1e-12));
    // F~ is the explicit central average.
    const double central = 0.5 * (network.nodes()[0].Value(x) + network.nodes()[1].Value(x));
    CHECK(network.central().Value(x) == doctest::Approx(central).epsilon(1e-12));
  }
}

TEST_CASE("network validation") {
  std::vector<QuadraticObjective> nodes;
  nodes.emplace_back(Matrix::Identity(2, 2), Vec({1, 0}));
  CHECK_THROWS_AS(SimilarityNetwork(nodes, 0), InputError);
  CHECK_THROWS_AS(SimilarityNetwork(nodes, 2), InputError);
  nodes.emplace_back(Matrix::Identity(3, 3), Vec({1, 0, 0}));
  CHECK_THROWS_AS(SimilarityNetwork(nodes, 1), InputError);
}

TEST_CASE("sigma of identical nodes is zero") {
  std::vector<QuadraticObjective> nodes(3, QuadraticObjective(Matrix::Identity(4, 4), Vector::Ones(4)));
  const SimilarityNetwork network(std::move(nodes), 1);
  CHECK(EstimateSigma(network) == 0.0);
  CHECK(EstimateSigma(network, SigmaMode::kSampled, 100) == 0.0);
}

TEST_CASE("sigma of the hand network is one") {
  CHECK(EstimateSigma(HandNetwork()) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("sigma power iteration matches a dense eigensolver") {
  for (std::uint64_t seed = 93; seed < 98; ++seed) {
    const SimilarityNetwork network = RandomNetwork(15, 6, 2, seed);
    const Matrix gap = network.global().hessian() - network.central().hessian();
    const double exact = Eigen::SelfAdjointEigenSolver<Matrix>(gap).eigenvalues().cwiseAbs().maxCoeff();
    CHECK(EstimateSigma(network) == doctest::Approx(exact).epsilon(1e-7));
  }
}

TEST_CASE("sampled sigma lower-bounds the quadratic estimate") {
  for (std::uint64_t seed = 100; seed < 105; ++seed) {
    const SimilarityNetwork network = RandomNetwork(10, 5, 1, seed);
    CHECK(EstimateSigma(network, SigmaMode::kSampled, 2000, seed) <= EstimateSigma(network) + 1e-6);
  }
}

TEST_CASE("similarity inequality holds with the quadratic sigma") {
  const SimilarityNetwork network = RandomNetwork(10, 6, 2, 106);
  const double sigma = EstimateSigma(network);
  std::mt19937_64 rng(107);
  for (int s = 0; s < 10000; ++s) {
    const Vector x = testing::RandomGaussian(10, rng);
    const Vector y = testing::RandomGaussian(10, rng);
    const Vector dgrad = network.global().Gradient(x) - network.central().Gradient(x) -
                         network.global().Gradient(y) + network.central().Gradient(y);
    REQUIRE(dgrad.norm() <= sigma * (x - y).norm() * (1 + 1e-8));
  }
}

TEST_CASE("sigma zero with F~ = F gives the Bregman divergence of F") {
  std::vector<QuadraticObjective> nodes(2, QuadraticObjective(2.0 * Matrix::Identity(3, 3), Vector::Ones(3)));
  const SimilarityNetwork network(std::move(nodes), 1);
  const SimilarityGeometry geometry = BuildSimilarityGeometry(network, 0.0, 1000);
  std::mt19937_64 rng(108);
  for (int s = 0; s < 100; ++s) {
    const Vector x = testing::RandomGaussian(3, rng);
    const Vector y = testing::RandomGaussian(3, rng);
    const QuadraticObjective& f = network.global();
    const double taylor_gap = f.Value(y) - f.Value(x) - f.Gradient(x).dot(y - x);
    CHECK(geometry.divergence(y, x) == doctest::Approx(taylor_gap).epsilon(1e-12));
  }
  CHECK(geometry.strong_convexity == 1.0);
}

TEST_CASE("hand network constants") {
  const SimilarityNetwork network = HandNetwork();
  const SimilarityGeometry geometry = BuildSimilarityGeometry(network, 1.0);
  CHECK(geometry.mu_euk == doctest::Approx(2.0));
  CHECK(geometry.strong_convexity == doctest::Approx(0.5));
  CHECK(geometry.verified_pairs == 10000);
  CHECK(RelativeConditionNumber(geometry.mu_euk, 1.0) == doctest::Approx(2.0));
}

TEST_CASE("similarity divergence matches its defining formula") {
  const SimilarityNetwork network = RandomNetwork(8, 4, 1, 109);
  const double sigma = 1.05 * EstimateSigma(network);
  const SimilarityGeometry geometry = BuildSimilarityGeometry(network, sigma, 100);
  std::mt19937_64 rng(110);
  const QuadraticObjective& ft = network.central();
  for (int s = 0; s < 100; ++s) {
    const Vector x = testing::RandomGaussian(8, rng);
    const Vector y = testing::RandomGaussian(8, rng);
    const double expected = ft.Value(y) - ft.Value(x) - ft.Gradient(x).dot(y - x) +
                            0.5 * sigma * (y - x).squaredNorm();
    CHECK(geometry.divergence(y, x) == doctest::Approx(expected).epsilon(1e-10));
  }
}

TEST_CASE("an undersized sigma is caught with a witness") {
  const SimilarityNetwork network = HandNetwork();
  try {
    BuildSimilarityGeometry(network, 0.5);
    FAIL("expected a construction error");
  } catch (const ConstructionError& e) {
    CHECK(e.x.size() == 3);
    CHECK(e.y.size() == 3);
  }
  CHECK_THROWS_AS(BuildSimilarityGeometry(network, -1.0), InputError);
}

TEST_CASE("relative condition number") {
  CHECK(RelativeConditionNumber(3.0, 0.0) == 1.0);
  CHECK(RelativeConditionNumber(1.0, 2.0) == 5.0);
  CHECK_THROWS_AS(RelativeConditionNumber(0.0, 1.0), InputError);
  CHECK_THROWS_AS(RelativeConditionNumber(1.0, -1.0), InputError);
  for (std::uint64_t seed = 111; seed < 116; ++seed) {
    const SimilarityNetwork network = RandomNetwork(10, 5, 1, seed);
    const double mu = network.global().mu_euk();
    const double L = network.global().l_euk();
    const double sigma = EstimateSigma(network);
    if (sigma < (L - mu) / 2) CHECK(RelativeConditionNumber(mu, sigma) < L / mu);
  }
}

TEST_CASE("generator hits the requested conditioning and similarity") {
  std::mt19937_64 rng(117);
  const GeneratedNetwork generated = GenerateNetwork(20, 8, 1, 100.0, 0.01, rng);
  const SimilarityNetwork& network = generated.network;
  CHECK(network.global().mu_euk() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(network.global().l_euk() == doctest::Approx(100.0).epsilon(1e-9));
  CHECK(EstimateSigma(network) == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(generated.solution.sum() == doctest::Approx(1.0));
  CHECK(generated.solution.minCoeff() >= 0.8 / 20);
  CHECK(network.global().Gradient(generated.solution).norm() <= 1e-10);
}

TEST_CASE("distributed solve on an identical-node network") {
  std::mt19937_64 rng(118);
  const GeneratedNetwork generated = GenerateNetwork(10, 4, 4, 10.0, 0.0, rng);
  const ClippedSimplex set(10, 0.0);
  SolverConfig config;
  config.max_iter = 20000;
  const DistributedRun run = SolveDistributed(generated.network, set, config, set.Center());
  CHECK(run.sigma_hat == 0.0);
  CHECK(run.run.termination == Termination::kGapTolerance);
  CHECK(run.ledger.gradient_vectors_sent == 0);
}

TEST_CASE("distributed ledger counts one round per gradient evaluation") {
  const SimilarityNetwork network = RandomNetwork(10, 6, 2, 119);
  const ClippedSimplex set(10, 0.0);
  SolverConfig config;
  config.max_iter = 50;
  config.gap_tol = 0.0;
  const DistributedRun run = SolveDistributed(network, set, config, set.Center());
  CHECK(run.run.config.variant == Variant::kGammaAdapt);
  CHECK(run.L_used == 1.0);
  CHECK(run.sigma_used == doctest::Approx(1.05 * run.sigma_hat));
  CHECK(run.ledger.rounds == static_cast<long long>(run.run.trace.size()));
  CHECK(run.ledger.gradient_vectors_sent == run.ledger.rounds * 4);
  DistributedOptions euclidean;
  euclidean.geometry = DistributedGeometry::kEuclidean;
  const DistributedRun baseline = SolveDistributed(network, set, config, set.Center(), euclidean);
  CHECK(baseline.L_used == doctest::Approx(network.global().l_euk()));
}

TEST_CASE("network files round trip") {
  const SimilarityNetwork network = RandomNetwork(5, 3, 2, 120);
  const auto path = std::filesystem::temp_directory_path() / "fwadapt_network.txt";
  SaveNetwork(path, network);
  const SimilarityNetwork loaded = LoadNetwork(path);
  CHECK(loaded.size() == 3);
  CHECK(loaded.central_count() == 2);
  for (int j = 0; j < 3; ++j) {
    CHECK(loaded.nodes()[j].hessian() == network.nodes()[j].hessian());
    CHECK(loaded.nodes()[j].linear() == network.nodes()[j].linear());
  }
  std::filesystem::remove(path);
  CHECK_THROWS_AS(LoadNetwork(path), IoError);
}
