#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <random>
#include <stdexcept>
#include <vector>

#include "fwadapt/bregman.hpp"
#include "fwadapt/objectives.hpp"
#include "fwadapt/simplex.hpp"
#include "fwadapt/solver.hpp"
#include "fwadapt/types.hpp"

namespace fwadapt {

/// Message counts of the in-process aggregation protocol: every round each
/// non-central node sends one gradient vector (and one scalar value).
struct CommunicationLedger {
  long long rounds = 0;
  long long gradient_vectors_sent = 0;
  long long scalars_sent = 0;
};

/// Quadratic local objectives f_1..f_m. The first `central_count` nodes live on
/// the central server. F = mean of all f_j, F~ = mean of the central ones.
class SimilarityNetwork {
 public:
  /// Throws InputError unless 1 <= central_count <= nodes.size() and all
  /// nodes share one dimension.
  SimilarityNetwork(std::vector<QuadraticObjective> nodes, int central_count);

  int dim() const { return nodes_.front().dim(); }
  int size() const { return static_cast<int>(nodes_.size()); }
  int central_count() const { return central_count_; }
  /// Non-central nodes, i.e. messages per aggregation round.
  int remote_count() const { return size() - central_count_; }
  const std::vector<QuadraticObjective>& nodes() const { return nodes_; }

  /// Explicit averages (index-ascending sums).
  const QuadraticObjective& global() const { return global_; }
  const QuadraticObjective& central() const { return central_; }

  /// (1/m) sum_j grad f_j(x), reduced in index order whatever the thread
  /// count. Adds one round to the ledger when given.
  Vector AggregateGradient(const Vector& x, CommunicationLedger* ledger = nullptr,
                           int threads = 1) const;
  double AggregateValue(const Vector& x, CommunicationLedger* ledger = nullptr) const;

 private:
  std::vector<QuadraticObjective> nodes_;
  int central_count_;
  QuadraticObjective global_;
  QuadraticObjective central_;
};

enum class SigmaMode { kQuadratic, kSampled };

/// kQuadratic: spectral norm of (mean Hessian - central mean Hessian) by power
/// iteration to 1e-8 relative residual, EstimationError after 1e4 steps.
/// kSampled: max over `samples` Gaussian pairs of ||dgrad|| / ||x - y||.
double EstimateSigma(const SimilarityNetwork& network, SigmaMode mode = SigmaMode::kQuadratic,
                     int samples = 10000, std::uint64_t seed = 0);

/// Sampled inequality violation; carries the offending pair.
class ConstructionError : public std::runtime_error {
 public:
  ConstructionError(const std::string& what, Vector x, Vector y)
      : std::runtime_error(what), x(std::move(x)), y(std::move(y)) {}
  Vector x;
  Vector y;
};

/// Reference d(x) = F~(x) + sigma/2 ||x||^2 and the constants it implies.
struct SimilarityGeometry {
  double sigma = 0.0;
  double mu_euk = 0.0;  // lambda_min of the mean Hessian
  /// mu / (mu + 2 sigma)
  double strong_convexity = 0.0;
  BregmanDivergence divergence = BregmanDivergence::Euclidean();
  int verified_pairs = 0;
  /// Largest scaled excess of either sampled inequality (<= 0 when verified).
  double worst_smoothness_excess = 0.0;
  double worst_convexity_excess = 0.0;
};

/// Verifies on `samples` Gaussian pairs, with 1e-9 (1 + |F(y)|) slack,
///   F(y) <= F(x) + <grad F(x), y - x> + V(y, x)
///   F(y) >= F(x) + <grad F(x), y - x> + mu/(mu + 2 sigma) V(y, x).
/// Throws ConstructionError with the witness pair on a violation and
/// InputError if sigma < 0.
SimilarityGeometry BuildSimilarityGeometry(const SimilarityNetwork& network, double sigma,
                                           int samples = 10000, std::uint64_t seed = 1);

/// 1 + 2 sigma / mu. Throws InputError if mu <= 0 or sigma < 0.
double RelativeConditionNumber(double mu_euk, double sigma);

/// Serves F through the aggregation protocol and records every round.
class AggregatedObjective final : public Objective {
 public:
  explicit AggregatedObjective(const SimilarityNetwork& network, int threads = 1)
      : network_(network), threads_(threads) {}

  int dim() const override { return network_.dim(); }
  double Value(const Vector& x) const override;
  Vector Gradient(const Vector& x) const override;
  std::pair<double, Vector> ValueAndGradient(const Vector& x) const override;

  CommunicationLedger ledger() const;

 private:
  const SimilarityNetwork& network_;
  int threads_;
  mutable std::atomic<long long> rounds_{0};
  mutable std::atomic<long long> scalar_messages_{0};
};

enum class DistributedGeometry {
  kSimilarity,  // V from F~ + 1.05 sigma_hat/2 ||.||^2 with L = 1
  kEuclidean,   // 1/2 ||.||^2 with L = L_euk
};

struct DistributedOptions {
  DistributedGeometry geometry = DistributedGeometry::kSimilarity;
  double sigma_safety = 1.05;
  int threads = 1;
  int verification_samples = 10000;
};

struct DistributedRun {
  SolverRun run;
  CommunicationLedger ledger;
  double sigma_hat = 0.0;
  double sigma_used = 0.0;
  double L_used = 0.0;
};

/// gamma-adaptive FW with the divergence-only acceptance test. config.variant
/// and config.l0 are overridden by the chosen geometry.
DistributedRun SolveDistributed(const SimilarityNetwork& network, const ClippedSimplex& set,
                                SolverConfig config, const Vector& x0,
                                const DistributedOptions& options = {});

/// Generated instance together with the planted minimiser.
struct GeneratedNetwork {
  SimilarityNetwork network;
  Vector solution;  // interior point of the simplex with grad F = 0
};

/// A_j = A_base + E_j with A_base = Q diag(logspace 1..cond) Q^T, E_j symmetric
/// Gaussian, centred so that sum E_j = 0 and scaled so the central mean has
/// spectral norm sigma_ratio * cond. b_j = A_j x* with
/// x* = 0.8/n + 0.2 Dirichlet(1).
GeneratedNetwork GenerateNetwork(int n, int nodes, int central, double cond, double sigma_ratio,
                                 std::mt19937_64& rng);

/// Text format: "m mtilde n", then per node n rows of A_j and one row of b_j.
void SaveNetwork(const std::filesystem::path& path, const SimilarityNetwork& network);
SimilarityNetwork LoadNetwork(const std::filesystem::path& path);

}  // namespace fwadapt
