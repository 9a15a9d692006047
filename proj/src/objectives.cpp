#include "fwadapt/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "fwadapt/errors.hpp"

namespace fwadapt {
namespace {

void RequireDim(const Objective& f, const Vector& x) {
  if (x.size() != f.dim()) throw InputError("objective: point has the wrong dimension");
}

}  // namespace

DOptimalDesign::DOptimalDesign(Matrix vectors) : vectors_(std::move(vectors)) {
  const auto m = vectors_.rows();
  const auto n = vectors_.cols();
  if (m < 1 || n < m + 1) {
    std::ostringstream msg;
    msg << "D-optimal design needs n >= m + 1 vectors (got m=" << m << ", n=" << n << ")";
    throw InputError(msg.str());
  }
  if (!vectors_.allFinite()) throw InputError("D-optimal design: non-finite vector entries");
  Eigen::LLT<Matrix> llt(InformationMatrix(Vector::Constant(n, 1.0 / n)));
  if (llt.info() != Eigen::Success) {
    throw SingularMatrixError("D-optimal design: information matrix is singular at the centre");
  }
}

Matrix DOptimalDesign::InformationMatrix(const Vector& x) const {
  RequireDim(*this, x);
  return vectors_ * x.asDiagonal() * vectors_.transpose();
}

double DOptimalDesign::Value(const Vector& x) const { return ValueAndGradient(x).first; }

Vector DOptimalDesign::Gradient(const Vector& x) const { return ValueAndGradient(x).second; }

std::pair<double, Vector> DOptimalDesign::ValueAndGradient(const Vector& x) const {
  if (!x.allFinite()) throw DomainError("D-optimal design: non-finite point");
  const Eigen::LLT<Matrix> llt(InformationMatrix(x));
  if (llt.info() != Eigen::Success) {
    throw SingularMatrixError("D-optimal design: information matrix is not positive definite");
  }
  const Matrix& factor = llt.matrixLLT();
  double value = 0.0;
  for (Eigen::Index i = 0; i < factor.rows(); ++i) {
    const double d = factor(i, i);
    if (!(d > 0.0)) throw SingularMatrixError("D-optimal design: degenerate Cholesky factor");
    value -= 2.0 * std::log(d);
  }
  // grad_i = -v_i^T H^{-1} v_i = -||L^{-1} v_i||^2
  const Matrix whitened = llt.matrixL().solve(vectors_);
  Vector gradient = -whitened.colwise().squaredNorm().transpose();
  return {value, std::move(gradient)};
}

PoissonInverse::PoissonInverse(Matrix measurement, Vector counts)
    : measurement_(std::move(measurement)), counts_(std::move(counts)) {
  if (measurement_.rows() != counts_.size() || measurement_.rows() < 1 || measurement_.cols() < 1) {
    throw InputError("Poisson inverse: A must be m x n with y of length m");
  }
  if (!measurement_.allFinite() || (measurement_.array() < 0.0).any()) {
    throw InputError("Poisson inverse: A must be finite and nonnegative");
  }
  if (!counts_.allFinite() || !(counts_.array() > 0.0).all()) {
    throw InputError("Poisson inverse: y must be strictly positive");
  }
  for (Eigen::Index i = 0; i < measurement_.rows(); ++i) {
    if (!(measurement_.row(i).maxCoeff() > 0.0)) {
      std::ostringstream msg;
      msg << "Poisson inverse: row " << i << " of A has no positive entry";
      throw InputError(msg.str());
    }
  }
}

Vector PoissonInverse::Forward(const Vector& x) const {
  RequireDim(*this, x);
  Vector ax = measurement_ * x;
  for (Eigen::Index i = 0; i < ax.size(); ++i) {
    if (!(ax[i] > 0.0)) {
      std::ostringstream msg;
      msg << "Poisson inverse: (Ax)_" << i << " = " << ax[i] << " is not positive";
      throw DomainError(msg.str());
    }
  }
  return ax;
}

double PoissonInverse::Value(const Vector& x) const { return ValueAndGradient(x).first; }

Vector PoissonInverse::Gradient(const Vector& x) const {
  const Vector ax = Forward(x);
  return measurement_.transpose() * (ax.array() / counts_.array()).log().matrix();
}

std::pair<double, Vector> PoissonInverse::ValueAndGradient(const Vector& x) const {
  const Vector ax = Forward(x);
  const Eigen::ArrayXd log_ratio = (ax.array() / counts_.array()).log();
  const double value = (ax.array() * log_ratio - ax.array() + counts_.array()).sum();
  return {value, measurement_.transpose() * log_ratio.matrix()};
}

QuadraticObjective::QuadraticObjective(Matrix hessian, Vector linear)
    : hessian_(std::move(hessian)), linear_(std::move(linear)) {
  if (hessian_.rows() != hessian_.cols() || hessian_.rows() != linear_.size()) {
    throw InputError("quadratic objective: A must be n x n and b of length n");
  }
  if (!hessian_.allFinite() || !linear_.allFinite()) {
    throw InputError("quadratic objective: non-finite entries");
  }
  const double scale = std::max(1.0, hessian_.cwiseAbs().maxCoeff());
  if ((hessian_ - hessian_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw InputError("quadratic objective: A is not symmetric");
  }
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(hessian_, Eigen::EigenvaluesOnly);
  mu_euk_ = eig.eigenvalues().minCoeff();
  l_euk_ = eig.eigenvalues().maxCoeff();
}

double QuadraticObjective::Value(const Vector& x) const {
  RequireDim(*this, x);
  return 0.5 * x.dot(hessian_ * x) - linear_.dot(x);
}

Vector QuadraticObjective::Gradient(const Vector& x) const {
  RequireDim(*this, x);
  return hessian_ * x - linear_;
}

double SmoothnessConstant(const DOptimalDesign&) { return 1.0; }

double SmoothnessConstant(const PoissonInverse& problem) { return problem.counts().lpNorm<1>(); }

RelativeSmoothnessCheck VerifyRelativeSmoothness(const Objective& objective,
                                                 const BregmanDivergence& geometry, double L,
                                                 const PairSampler& sampler, int num_samples) {
  RelativeSmoothnessCheck check;
  for (int i = 0; i < num_samples; ++i) {
    auto [x, y] = sampler();
    const double fx = objective.Value(x);
    const auto [fy, gy] = objective.ValueAndGradient(y);
    const double bound = fy + gy.dot(x - y) + L * geometry(x, y);
    const double violation = (fx - bound) / (1.0 + std::abs(fx));
    ++check.samples;
    if (violation > check.worst_violation) {
      check.worst_violation = violation;
      check.witness_x = std::move(x);
      check.witness_y = std::move(y);
    }
  }
  check.passed = check.worst_violation <= 1e-9;
  return check;
}

DOptimalDesign RandomDOptimalDesign(int m, int n, std::mt19937_64& rng) {
  if (m < 1 || n < 1) throw InputError("RandomDOptimalDesign: dimensions must be positive");
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix vectors(m, n);
  // Column-major fill: vector i is drawn in full before vector i + 1.
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < m; ++i) vectors(i, j) = gauss(rng);
  }
  return DOptimalDesign(std::move(vectors));
}

PoissonInverse RandomPoissonInverse(int m, int n, std::mt19937_64& rng) {
  if (m < 1 || n < 1) throw InputError("RandomPoissonInverse: dimensions must be positive");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Matrix a(m, n);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) a(i, j) = unit(rng);
  }
  Vector y(m);
  for (int i = 0; i < m; ++i) {
    do {
      y[i] = unit(rng);
    } while (y[i] < 1e-3);
  }
  return PoissonInverse(std::move(a), std::move(y));
}

}  // namespace fwadapt
