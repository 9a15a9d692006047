#pragma once

#include <functional>
#include <memory>
#include <string>

#include "fwadapt/types.hpp"

namespace fwadapt {

enum class ReferenceKind { kSquaredEuclidean, kBurgEntropy, kSimilarity };

enum class DomainKind { kFullSpace, kPositiveOrthant };

/// Convex reference function h generating a Bregman divergence.
///
/// Implementations are immutable; every method is safe to call concurrently.
class ReferenceFunction {
 public:
  virtual ~ReferenceFunction() = default;

  virtual ReferenceKind kind() const = 0;
  virtual DomainKind domain() const = 0;

  /// Throws DomainError if x is outside the domain.
  virtual double Value(const Vector& x) const = 0;
  virtual Vector Gradient(const Vector& x) const = 0;

  /// V(x, y) = h(x) - h(y) - <grad h(y), x - y>. Subclasses override with a
  /// closed form that is exact at x == y.
  virtual double Divergence(const Vector& x, const Vector& y) const;
  /// V(x + step, x), evaluated from `step` itself so that short steps do not
  /// lose precision to the cancellation in (x + step) - x.
  virtual double StepDivergence(const Vector& x, const Vector& step) const;

  bool InDomain(const Vector& x) const;
};

/// h(x) = 1/2 ||x||^2, V(x, y) = 1/2 ||x - y||^2.
class SquaredEuclidean final : public ReferenceFunction {
 public:
  ReferenceKind kind() const override { return ReferenceKind::kSquaredEuclidean; }
  DomainKind domain() const override { return DomainKind::kFullSpace; }
  double Value(const Vector& x) const override;
  Vector Gradient(const Vector& x) const override;
  double Divergence(const Vector& x, const Vector& y) const override;
  double StepDivergence(const Vector& x, const Vector& step) const override;
};

/// h(x) = -sum log x_i on the strictly positive orthant. The induced
/// divergence is Itakura-Saito: sum (x_i/y_i - log(x_i/y_i) - 1).
class BurgEntropy final : public ReferenceFunction {
 public:
  ReferenceKind kind() const override { return ReferenceKind::kBurgEntropy; }
  DomainKind domain() const override { return DomainKind::kPositiveOrthant; }
  double Value(const Vector& x) const override;
  Vector Gradient(const Vector& x) const override;
  double Divergence(const Vector& x, const Vector& y) const override;
  double StepDivergence(const Vector& x, const Vector& step) const override;
};

/// h(x) = 1/2 x^T M x + c^T x with M symmetric positive semidefinite.
/// Used for the similarity-induced geometry d(x) = F~(x) + sigma/2 ||x||^2.
class QuadraticReference final : public ReferenceFunction {
 public:
  QuadraticReference(Matrix hessian, Vector linear);

  ReferenceKind kind() const override { return ReferenceKind::kSimilarity; }
  DomainKind domain() const override { return DomainKind::kFullSpace; }
  double Value(const Vector& x) const override;
  Vector Gradient(const Vector& x) const override;
  double Divergence(const Vector& x, const Vector& y) const override;
  double StepDivergence(const Vector& x, const Vector& step) const override;

  const Matrix& hessian() const { return hessian_; }
  const Vector& linear() const { return linear_; }

 private:
  Matrix hessian_;
  Vector linear_;
};

/// Value-semantic handle on a shared, immutable reference function.
class BregmanDivergence {
 public:
  explicit BregmanDivergence(std::shared_ptr<const ReferenceFunction> reference);

  static BregmanDivergence Euclidean();
  static BregmanDivergence Burg();

  double operator()(const Vector& x, const Vector& y) const {
    return reference_->Divergence(x, y);
  }
  double StepDivergence(const Vector& x, const Vector& step) const {
    return reference_->StepDivergence(x, step);
  }

  const ReferenceFunction& reference() const { return *reference_; }
  ReferenceKind kind() const { return reference_->kind(); }
  bool InDomain(const Vector& x) const { return reference_->InDomain(x); }

 private:
  std::shared_ptr<const ReferenceFunction> reference_;
};

/// V(x, y) for the given geometry. Result is >= -1e-12 for domain points.
double Divergence(const BregmanDivergence& geometry, const Vector& x, const Vector& y);

std::string ToString(ReferenceKind kind);

// Triangle scaling exponent estimation.

struct TseSample {
  Vector x;
  Vector z;
  Vector z_tilde;
  double theta = 0.0;
};

struct TseEstimate {
  /// Largest exponent consistent with every sample, clipped to (0, 2].
  double gamma_hat = 2.0;
  /// Samples drawn (including non-binding ones).
  int sample_count = 0;
  /// Samples with V(z, z~) > 0 that contributed a constraint.
  int informative_count = 0;
  /// The sample attaining gamma_hat; unset (theta == 0) if no sample bound below 2.
  TseSample worst_ratio_witness;
};

using TseSampler = std::function<TseSample()>;

/// Empirical infimum over samples of log(V(mix)/V(z, z~)) / log(theta), where
/// mix = ((1-theta) x + theta z, (1-theta) x + theta z~). Throws EstimationError
/// if every sample is degenerate (V(z, z~) == 0), InputError if num_samples < 1
/// or a sample has theta outside (0, 1].
TseEstimate EstimateTse(const BregmanDivergence& geometry, const TseSampler& sampler,
                        int num_samples);

}  // namespace fwadapt
