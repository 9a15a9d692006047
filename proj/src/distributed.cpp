#include "fwadapt/distributed.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <memory>
#include <string>
#include <thread>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "fwadapt/errors.hpp"

namespace fwadapt {
namespace {

QuadraticObjective AverageOf(const std::vector<QuadraticObjective>& nodes, int count) {
  Matrix hessian = nodes[0].hessian();
  Vector linear = nodes[0].linear();
  for (int j = 1; j < count; ++j) {
    hessian += nodes[j].hessian();
    linear += nodes[j].linear();
  }
  return QuadraticObjective(hessian / count, linear / count);
}

void RequireValidNodes(const std::vector<QuadraticObjective>& nodes, int central_count) {
  if (nodes.empty()) throw InputError("network: at least one node required");
  if (central_count < 1 || central_count > static_cast<int>(nodes.size())) {
    throw InputError("network: central count must lie in [1, m]");
  }
  for (const QuadraticObjective& node : nodes) {
    if (node.dim() != nodes.front().dim()) throw InputError("network: node dimensions differ");
  }
}

Matrix SimilarityGap(const SimilarityNetwork& network) {
  return network.global().hessian() - network.central().hessian();
}

double PowerIterationNorm(const Matrix& gap) {
  if (gap.cwiseAbs().maxCoeff() == 0.0) return 0.0;
  constexpr int kMaxSteps = 10000;
  constexpr double kTolerance = 1e-8;
  std::mt19937_64 rng(0x5eedULL);
  std::normal_distribution<double> normal;
  Vector v(gap.rows());
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = normal(rng);
  v.normalize();
  // Iterates on gap^2 so symmetric +/- eigenvalue pairs cannot stall the sign.
  for (int step = 0; step < kMaxSteps; ++step) {
    const Vector w = gap * (gap * v);
    const double lambda = v.dot(w);
    if (lambda <= 0.0) return 0.0;
    if ((w - lambda * v).norm() <= kTolerance * lambda) return std::sqrt(lambda);
    v = w / w.norm();
  }
  throw EstimationError("EstimateSigma: power iteration did not converge in 1e4 steps");
}

double SampledNorm(const SimilarityNetwork& network, int samples, std::uint64_t seed) {
  if (samples < 1) throw InputError("EstimateSigma: samples must be >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  const int n = network.dim();
  double best = 0.0;
  Vector x(n), y(n);
  for (int s = 0; s < samples; ++s) {
    for (int i = 0; i < n; ++i) x(i) = normal(rng);
    for (int i = 0; i < n; ++i) y(i) = normal(rng);
    const double distance = (x - y).norm();
    if (distance == 0.0) continue;
    const Vector dgrad = network.global().Gradient(x) - network.central().Gradient(x) -
                         network.global().Gradient(y) + network.central().Gradient(y);
    best = std::max(best, dgrad.norm() / distance);
  }
  return best;
}

}  // namespace

SimilarityNetwork::SimilarityNetwork(std::vector<QuadraticObjective> nodes, int central_count)
    : nodes_((RequireValidNodes(nodes, central_count), std::move(nodes))),
      central_count_(central_count),
      global_(AverageOf(nodes_, static_cast<int>(nodes_.size()))),
      central_(AverageOf(nodes_, central_count)) {}

Vector SimilarityNetwork::AggregateGradient(const Vector& x, CommunicationLedger* ledger,
                                            int threads) const {
  if (x.size() != dim()) throw InputError("AggregateGradient: dimension mismatch");
  const int m = size();
  std::vector<Vector> local(m);
  const int workers = std::clamp(threads, 1, m);
  if (workers == 1) {
    for (int j = 0; j < m; ++j) local[j] = nodes_[j].Gradient(x);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (int j = w; j < m; j += workers) local[j] = nodes_[j].Gradient(x);
      });
    }
    for (std::thread& t : pool) t.join();
  }
  Vector sum = local[0];
  for (int j = 1; j < m; ++j) sum += local[j];
  if (ledger) {
    ++ledger->rounds;
    ledger->gradient_vectors_sent += remote_count();
  }
  return sum / m;
}

double SimilarityNetwork::AggregateValue(const Vector& x, CommunicationLedger* ledger) const {
  if (x.size() != dim()) throw InputError("AggregateValue: dimension mismatch");
  double sum = 0.0;
  for (const QuadraticObjective& node : nodes_) sum += node.Value(x);
  if (ledger) ledger->scalars_sent += remote_count();
  return sum / size();
}

double EstimateSigma(const SimilarityNetwork& network, SigmaMode mode, int samples,
                     std::uint64_t seed) {
  if (mode == SigmaMode::kQuadratic) return PowerIterationNorm(SimilarityGap(network));
  return SampledNorm(network, samples, seed);
}

SimilarityGeometry BuildSimilarityGeometry(const SimilarityNetwork& network, double sigma,
                                           int samples, std::uint64_t seed) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw InputError("BuildSimilarityGeometry: sigma must be finite and >= 0");
  }
  const QuadraticObjective& central = network.central();
  const int n = network.dim();
  SimilarityGeometry geometry;
  geometry.sigma = sigma;
  geometry.mu_euk = network.global().mu_euk();
  geometry.strong_convexity = geometry.mu_euk / (geometry.mu_euk + 2.0 * sigma);
  geometry.divergence = BregmanDivergence(std::make_shared<QuadraticReference>(
      central.hessian() + sigma * Matrix::Identity(n, n), -central.linear()));
  geometry.worst_smoothness_excess = -std::numeric_limits<double>::infinity();
  geometry.worst_convexity_excess = -std::numeric_limits<double>::infinity();

  const QuadraticObjective& global = network.global();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Vector x(n), y(n);
  for (int s = 0; s < samples; ++s) {
    for (int i = 0; i < n; ++i) x(i) = normal(rng);
    for (int i = 0; i < n; ++i) y(i) = normal(rng);
    const double fy = global.Value(y);
    const double linearised = global.Value(x) + global.Gradient(x).dot(y - x);
    const double v = geometry.divergence(y, x);
    const double slack = 1e-9 * (1.0 + std::abs(fy));
    const double smooth_excess = fy - (linearised + v) - slack;
    const double convex_excess = (linearised + geometry.strong_convexity * v) - fy - slack;
    geometry.worst_smoothness_excess = std::max(geometry.worst_smoothness_excess, smooth_excess);
    geometry.worst_convexity_excess = std::max(geometry.worst_convexity_excess, convex_excess);
    if (smooth_excess > 0.0) {
      throw ConstructionError("similarity geometry: 1-relative smoothness violated", x, y);
    }
    if (convex_excess > 0.0) {
      throw ConstructionError("similarity geometry: relative strong convexity violated", x, y);
    }
    ++geometry.verified_pairs;
  }
  return geometry;
}

double RelativeConditionNumber(double mu_euk, double sigma) {
  if (!(mu_euk > 0.0)) throw InputError("RelativeConditionNumber: mu must be positive");
  if (!(sigma >= 0.0)) throw InputError("RelativeConditionNumber: sigma must be >= 0");
  return 1.0 + 2.0 * sigma / mu_euk;
}

double AggregatedObjective::Value(const Vector& x) const {
  scalar_messages_ += network_.remote_count();
  return network_.AggregateValue(x);
}

Vector AggregatedObjective::Gradient(const Vector& x) const {
  ++rounds_;
  return network_.AggregateGradient(x, nullptr, threads_);
}

std::pair<double, Vector> AggregatedObjective::ValueAndGradient(const Vector& x) const {
  return {Value(x), Gradient(x)};
}

CommunicationLedger AggregatedObjective::ledger() const {
  CommunicationLedger ledger;
  ledger.rounds = rounds_;
  ledger.gradient_vectors_sent = rounds_ * network_.remote_count();
  ledger.scalars_sent = scalar_messages_;
  return ledger;
}

DistributedRun SolveDistributed(const SimilarityNetwork& network, const ClippedSimplex& set,
                                SolverConfig config, const Vector& x0,
                                const DistributedOptions& options) {
  DistributedRun result;
  result.sigma_hat = EstimateSigma(network);
  config.variant = Variant::kGammaAdapt;
  std::optional<BregmanDivergence> geometry;
  if (options.geometry == DistributedGeometry::kSimilarity) {
    result.sigma_used = options.sigma_safety * result.sigma_hat;
    result.L_used = 1.0;
    geometry = BuildSimilarityGeometry(network, result.sigma_used, options.verification_samples)
                   .divergence;
  } else {
    result.L_used = network.global().l_euk();
    geometry = BregmanDivergence::Euclidean();
  }
  config.l0 = result.L_used;
  const AggregatedObjective objective(network, options.threads);
  result.run = SolveGammaAdaptive(objective, *geometry, set, config, x0);
  result.ledger = objective.ledger();
  return result;
}

GeneratedNetwork GenerateNetwork(int n, int nodes, int central, double cond, double sigma_ratio,
                                 std::mt19937_64& rng) {
  if (n < 2) throw InputError("GenerateNetwork: n must be >= 2");
  if (nodes < 1 || central < 1 || central > nodes) {
    throw InputError("GenerateNetwork: need 1 <= central <= nodes");
  }
  if (!(cond >= 1.0) || !std::isfinite(cond)) throw InputError("GenerateNetwork: cond must be >= 1");
  if (!(sigma_ratio >= 0.0) || !std::isfinite(sigma_ratio)) {
    throw InputError("GenerateNetwork: sigma ratio must be >= 0");
  }
  std::normal_distribution<double> normal;
  auto gaussian = [&](int rows, int cols) {
    Matrix g(rows, cols);
    for (int j = 0; j < cols; ++j)
      for (int i = 0; i < rows; ++i) g(i, j) = normal(rng);
    return g;
  };

  const Matrix q = Eigen::HouseholderQR<Matrix>(gaussian(n, n)).householderQ();
  Vector spectrum(n);
  for (int i = 0; i < n; ++i) spectrum(i) = std::pow(cond, static_cast<double>(i) / (n - 1));
  const Matrix base = q * spectrum.asDiagonal() * q.transpose();

  std::vector<Matrix> perturbations;
  Matrix mean = Matrix::Zero(n, n);
  for (int j = 0; j < nodes; ++j) {
    const Matrix g = gaussian(n, n);
    perturbations.push_back(0.5 * (g + g.transpose()));
    mean += perturbations.back();
  }
  mean /= nodes;
  Matrix central_mean = Matrix::Zero(n, n);
  for (int j = 0; j < nodes; ++j) {
    perturbations[j] -= mean;
    if (j < central) central_mean += perturbations[j];
  }
  central_mean /= central;
  const double central_norm =
      Eigen::SelfAdjointEigenSolver<Matrix>(central_mean, Eigen::EigenvaluesOnly)
          .eigenvalues()
          .cwiseAbs()
          .maxCoeff();
  // With every node central the perturbations cannot create dissimilarity.
  const double scale = central_norm > 0.0 ? sigma_ratio * cond / central_norm : 0.0;

  std::gamma_distribution<double> exponential(1.0, 1.0);
  Vector weights(n);
  for (int i = 0; i < n; ++i) weights(i) = exponential(rng);
  const Vector solution = Vector::Constant(n, 0.8 / n) + 0.2 * weights / weights.sum();

  std::vector<QuadraticObjective> locals;
  for (int j = 0; j < nodes; ++j) {
    Matrix hessian = base + scale * perturbations[j];
    hessian = 0.5 * (hessian + hessian.transpose());
    Vector linear = hessian * solution;
    locals.emplace_back(std::move(hessian), std::move(linear));
  }
  return GeneratedNetwork{SimilarityNetwork(std::move(locals), central), solution};
}

void SaveNetwork(const std::filesystem::path& path, const SimilarityNetwork& network) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << network.size() << ' ' << network.central_count() << ' ' << network.dim() << '\n';
  out << std::setprecision(17);
  const int n = network.dim();
  for (const QuadraticObjective& node : network.nodes()) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) out << (j ? " " : "") << node.hessian()(i, j);
      out << '\n';
    }
    for (int i = 0; i < n; ++i) out << (i ? " " : "") << node.linear()(i);
    out << '\n';
  }
  out.flush();
  if (!out) throw IoError("failed writing " + path.string());
}

SimilarityNetwork LoadNetwork(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  long long m = 0, central = 0, n = 0;
  if (!(in >> m >> central >> n) || m < 1 || n < 1 || central < 1 || central > m) {
    throw InputError("network file: bad header, expected 'm mtilde n'");
  }
  auto read = [&](double& value) {
    std::string token;
    if (!(in >> token)) throw InputError("network file: unexpected end of data");
    try {
      std::size_t used = 0;
      value = std::stod(token, &used);
      if (used != token.size() || !std::isfinite(value)) throw std::invalid_argument(token);
    } catch (const std::exception&) {
      throw InputError("network file: bad number '" + token + "'");
    }
  };
  std::vector<QuadraticObjective> nodes;
  for (long long q = 0; q < m; ++q) {
    Matrix hessian(n, n);
    Vector linear(n);
    for (long long i = 0; i < n; ++i)
      for (long long j = 0; j < n; ++j) read(hessian(i, j));
    for (long long i = 0; i < n; ++i) read(linear(i));
    nodes.emplace_back(std::move(hessian), std::move(linear));
  }
  return SimilarityNetwork(std::move(nodes), static_cast<int>(central));
}

}  // namespace fwadapt
