#pragma once

#include <functional>
#include <limits>
#include <random>
#include <utility>

#include "fwadapt/bregman.hpp"
#include "fwadapt/types.hpp"

namespace fwadapt {

/// Differentiable objective f. Implementations are immutable and thread-safe
/// unless documented otherwise.
class Objective {
 public:
  virtual ~Objective() = default;

  virtual int dim() const = 0;
  /// Throws DomainError (or a subclass) outside the objective's domain.
  virtual double Value(const Vector& x) const = 0;
  virtual Vector Gradient(const Vector& x) const = 0;
  virtual std::pair<double, Vector> ValueAndGradient(const Vector& x) const {
    return {Value(x), Gradient(x)};
  }
};

/// f(x) = -log det(sum_i x_i v_i v_i^T), vectors stored as the columns of an
/// m x n matrix with n >= m + 1.
class DOptimalDesign final : public Objective {
 public:
  /// Throws InputError if n < m + 1, SingularMatrixError if the information
  /// matrix at the uniform point is not positive definite.
  explicit DOptimalDesign(Matrix vectors);

  int dim() const override { return static_cast<int>(vectors_.cols()); }
  int rows() const { return static_cast<int>(vectors_.rows()); }
  const Matrix& vectors() const { return vectors_; }

  Matrix InformationMatrix(const Vector& x) const;
  double Value(const Vector& x) const override;
  Vector Gradient(const Vector& x) const override;
  std::pair<double, Vector> ValueAndGradient(const Vector& x) const override;

 private:
  Matrix vectors_;
};

/// f(x) = sum_i [ (Ax)_i log((Ax)_i / y_i) - (Ax)_i + y_i ],
/// grad f(x) = A^T log(Ax ./ y).
class PoissonInverse final : public Objective {
 public:
  /// A must be nonnegative with a positive entry in every row; y strictly positive.
  PoissonInverse(Matrix measurement, Vector counts);

  int dim() const override { return static_cast<int>(measurement_.cols()); }
  const Matrix& measurement() const { return measurement_; }
  const Vector& counts() const { return counts_; }

  double Value(const Vector& x) const override;
  Vector Gradient(const Vector& x) const override;
  std::pair<double, Vector> ValueAndGradient(const Vector& x) const override;

 private:
  Vector Forward(const Vector& x) const;

  Matrix measurement_;
  Vector counts_;
};

/// f(x) = 1/2 x^T A x - b^T x with A symmetric.
class QuadraticObjective final : public Objective {
 public:
  QuadraticObjective(Matrix hessian, Vector linear);

  int dim() const override { return static_cast<int>(linear_.size()); }
  const Matrix& hessian() const { return hessian_; }
  const Vector& linear() const { return linear_; }
  /// (lambda_min, lambda_max) of the Hessian, computed once at construction.
  double mu_euk() const { return mu_euk_; }
  double l_euk() const { return l_euk_; }

  double Value(const Vector& x) const override;
  Vector Gradient(const Vector& x) const override;

 private:
  Matrix hessian_;
  Vector linear_;
  double mu_euk_ = 0.0;
  double l_euk_ = 0.0;
};

/// Relative smoothness constants with respect to Burg entropy.
double SmoothnessConstant(const DOptimalDesign& problem);
double SmoothnessConstant(const PoissonInverse& problem);

using PairSampler = std::function<std::pair<Vector, Vector>()>;

struct RelativeSmoothnessCheck {
  bool passed = true;
  int samples = 0;
  /// max over samples of f(x) - [f(y) + <grad f(y), x - y> + L V(x, y)], scaled
  /// by 1 + |f(x)|.
  double worst_violation = -std::numeric_limits<double>::infinity();
  Vector witness_x;
  Vector witness_y;
};

/// Checks f(x) <= f(y) + <grad f(y), x - y> + L V(x, y) on sampled pairs with
/// a 1e-9 relative slack. A failed check is reported, not thrown.
RelativeSmoothnessCheck VerifyRelativeSmoothness(const Objective& objective,
                                                 const BregmanDivergence& geometry, double L,
                                                 const PairSampler& sampler, int num_samples);

// Instance generators.

/// v_i i.i.d. standard Gaussian in R^m.
DOptimalDesign RandomDOptimalDesign(int m, int n, std::mt19937_64& rng);
/// A and y uniform on [0, 1]; entries of y below 1e-3 are redrawn.
PoissonInverse RandomPoissonInverse(int m, int n, std::mt19937_64& rng);

}  // namespace fwadapt
