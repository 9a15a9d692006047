#include "fwadapt/bregman.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fwadapt/errors.hpp"

namespace fwadapt {
namespace {

constexpr double kMinGammaHat = 1e-12;
constexpr double kMaxGammaHat = 2.0;

void RequirePositive(const Vector& x, const char* what) {
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0)) {
      std::ostringstream msg;
      msg << what << ": coordinate " << i << " = " << x[i]
          << " is outside the strictly positive orthant";
      throw DomainError(msg.str());
    }
  }
}

void RequireSameSize(const Vector& x, const Vector& y) {
  if (x.size() != y.size()) {
    throw InputError("divergence arguments have different dimensions");
  }
}

// u - log(1 + u) without cancellation for small |u|.
double ShiftedLogGap(double u) {
  if (std::abs(u) < 1e-3) {
    // u^2/2 - u^3/3 + u^4/4 - u^5/5 + u^6/6; truncation error < 1e-18 * u^2.
    const double u2 = u * u;
    return u2 * (0.5 + u * (-1.0 / 3.0 + u * (0.25 + u * (-0.2 + u / 6.0))));
  }
  return u - std::log1p(u);
}

}  // namespace

double ReferenceFunction::Divergence(const Vector& x, const Vector& y) const {
  RequireSameSize(x, y);
  return Value(x) - Value(y) - Gradient(y).dot(x - y);
}

double ReferenceFunction::StepDivergence(const Vector& x, const Vector& step) const {
  RequireSameSize(x, step);
  return Divergence(x + step, x);
}

bool ReferenceFunction::InDomain(const Vector& x) const {
  if (!x.allFinite()) return false;
  if (domain() == DomainKind::kPositiveOrthant) return (x.array() > 0.0).all();
  return true;
}

double SquaredEuclidean::Value(const Vector& x) const { return 0.5 * x.squaredNorm(); }

Vector SquaredEuclidean::Gradient(const Vector& x) const { return x; }

double SquaredEuclidean::Divergence(const Vector& x, const Vector& y) const {
  RequireSameSize(x, y);
  return 0.5 * (x - y).squaredNorm();
}

double SquaredEuclidean::StepDivergence(const Vector& x, const Vector& step) const {
  RequireSameSize(x, step);
  return 0.5 * step.squaredNorm();
}

double BurgEntropy::Value(const Vector& x) const {
  RequirePositive(x, "Burg entropy");
  return -x.array().log().sum();
}

Vector BurgEntropy::Gradient(const Vector& x) const {
  RequirePositive(x, "Burg entropy gradient");
  return -x.array().inverse();
}

double BurgEntropy::Divergence(const Vector& x, const Vector& y) const {
  RequireSameSize(x, y);
  RequirePositive(x, "Burg divergence (first argument)");
  RequirePositive(y, "Burg divergence (second argument)");
  double total = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    total += ShiftedLogGap((x[i] - y[i]) / y[i]);
  }
  return total;
}

double BurgEntropy::StepDivergence(const Vector& x, const Vector& step) const {
  RequireSameSize(x, step);
  RequirePositive(x, "Burg divergence (base point)");
  RequirePositive(x + step, "Burg divergence (stepped point)");
  double total = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    total += ShiftedLogGap(step[i] / x[i]);
  }
  return total;
}

QuadraticReference::QuadraticReference(Matrix hessian, Vector linear)
    : hessian_(std::move(hessian)), linear_(std::move(linear)) {
  if (hessian_.rows() != hessian_.cols() || hessian_.rows() != linear_.size()) {
    throw InputError("quadratic reference: Hessian must be square and match the linear term");
  }
}

double QuadraticReference::Value(const Vector& x) const {
  return 0.5 * x.dot(hessian_ * x) + linear_.dot(x);
}

Vector QuadraticReference::Gradient(const Vector& x) const { return hessian_ * x + linear_; }

double QuadraticReference::Divergence(const Vector& x, const Vector& y) const {
  RequireSameSize(x, y);
  const Vector diff = x - y;
  return 0.5 * diff.dot(hessian_ * diff);
}

double QuadraticReference::StepDivergence(const Vector& x, const Vector& step) const {
  RequireSameSize(x, step);
  return 0.5 * step.dot(hessian_ * step);
}

BregmanDivergence::BregmanDivergence(std::shared_ptr<const ReferenceFunction> reference)
    : reference_(std::move(reference)) {
  if (!reference_) throw InputError("BregmanDivergence requires a reference function");
}

BregmanDivergence BregmanDivergence::Euclidean() {
  return BregmanDivergence(std::make_shared<SquaredEuclidean>());
}

BregmanDivergence BregmanDivergence::Burg() {
  return BregmanDivergence(std::make_shared<BurgEntropy>());
}

double Divergence(const BregmanDivergence& geometry, const Vector& x, const Vector& y) {
  return geometry(x, y);
}

std::string ToString(ReferenceKind kind) {
  switch (kind) {
    case ReferenceKind::kSquaredEuclidean:
      return "squared-euclidean";
    case ReferenceKind::kBurgEntropy:
      return "burg-entropy";
    case ReferenceKind::kSimilarity:
      return "similarity";
  }
  return "unknown";
}

TseEstimate EstimateTse(const BregmanDivergence& geometry, const TseSampler& sampler,
                        int num_samples) {
  if (num_samples < 1) throw InputError("EstimateTse: num_samples must be >= 1");

  TseEstimate estimate;
  for (int i = 0; i < num_samples; ++i) {
    TseSample sample = sampler();
    ++estimate.sample_count;
    if (!(sample.theta > 0.0 && sample.theta <= 1.0)) {
      throw InputError("EstimateTse: theta must lie in (0, 1]");
    }
    const double base = geometry(sample.z, sample.z_tilde);
    if (!(base > 0.0)) continue;
    ++estimate.informative_count;
    // theta == 1 makes both sides equal and constrains nothing.
    if (sample.theta == 1.0) continue;

    const double keep = 1.0 - sample.theta;
    const Vector a = keep * sample.x + sample.theta * sample.z;
    const Vector b = keep * sample.x + sample.theta * sample.z_tilde;
    const double mixed = geometry(a, b);
    double exponent;
    if (mixed <= 0.0) {
      exponent = kMaxGammaHat;
    } else {
      exponent = std::log(mixed / base) / std::log(sample.theta);
    }
    exponent = std::clamp(exponent, kMinGammaHat, kMaxGammaHat);
    if (exponent < estimate.gamma_hat) {
      estimate.gamma_hat = exponent;
      estimate.worst_ratio_witness = std::move(sample);
    }
  }
  if (estimate.informative_count == 0) {
    throw EstimationError("EstimateTse: every sample had V(z, z~) == 0");
  }
  return estimate;
}

}  // namespace fwadapt
