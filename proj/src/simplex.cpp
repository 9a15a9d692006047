#include "fwadapt/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fwadapt/errors.hpp"

namespace fwadapt {

ClippedSimplex::ClippedSimplex(int dim, double floor) : dim_(dim), floor_(floor) {
  if (dim < 2) throw InputError("ClippedSimplex: dimension must be at least 2");
  if (!(floor >= 0.0) || !(floor * dim < 1.0)) {
    std::ostringstream msg;
    msg << "ClippedSimplex: floor " << floor << " must lie in [0, 1/" << dim << ")";
    throw InputError(msg.str());
  }
  peak_ = floor_ + (1.0 - dim_ * floor_);
}

ClippedSimplex ClippedSimplex::WithDefaultFloor(int dim) {
  return ClippedSimplex(dim, 1e-6 / dim);
}

Vector ClippedSimplex::Vertex(int index) const {
  if (index < 0 || index >= dim_) throw InputError("ClippedSimplex: vertex index out of range");
  Vector v = Vector::Constant(dim_, floor_);
  v[index] = peak_;
  return v;
}

Vector ClippedSimplex::Center() const { return Vector::Constant(dim_, 1.0 / dim_); }

int ClippedSimplex::LmoIndex(const Vector& g) const {
  if (g.size() != dim_) throw InputError("LMO: gradient dimension does not match the set");
  if (!g.allFinite()) throw InputError("LMO: gradient has non-finite entries");
  int best = 0;
  for (int i = 1; i < dim_; ++i) {
    if (g[i] < g[best]) best = i;
  }
  return best;
}

Vector ClippedSimplex::Lmo(const Vector& g) const { return Vertex(LmoIndex(g)); }

bool ClippedSimplex::Contains(const Vector& x, double tol) const {
  if (x.size() != dim_ || !x.allFinite()) return false;
  if (std::abs(x.sum() - 1.0) > tol) return false;
  return (x.array() >= floor_ - tol).all();
}

bool ClippedSimplex::InRelativeInterior(const Vector& x) const {
  return Contains(x) && (x.array() > floor_).all();
}

double ClippedSimplex::BoundaryDistance(const Vector& x) const {
  if (x.size() != dim_) throw InputError("BoundaryDistance: dimension mismatch");
  const double slack = std::max(0.0, x.minCoeff() - floor_);
  return slack / std::sqrt(1.0 - 1.0 / dim_);
}

double ClippedSimplex::EuclideanDiameter() const {
  // All vertex pairs are equidistant: (peak - floor) * sqrt(2).
  return (peak_ - floor_) * std::sqrt(2.0);
}

Vector ClippedSimplex::SampleUniform(std::mt19937_64& rng) const {
  std::exponential_distribution<double> exp1(1.0);
  Vector w(dim_);
  for (int i = 0; i < dim_; ++i) w[i] = exp1(rng);
  w /= w.sum();
  return Vector::Constant(dim_, floor_) + (1.0 - dim_ * floor_) * w;
}

SetConstants ComputeSetConstants(const ClippedSimplex& set, const BregmanDivergence& geometry,
                                 int num_samples, std::uint64_t seed) {
  if (num_samples < 0) throw InputError("ComputeSetConstants: num_samples must be >= 0");
  if (geometry.reference().domain() == DomainKind::kPositiveOrthant && set.floor() <= 0.0) {
    throw DomainError(
        "ComputeSetConstants: floor 0 puts vertices on the boundary of the divergence domain "
        "(D_V would be infinite)");
  }

  SetConstants constants;
  constants.euclidean_diameter = set.EuclideanDiameter();

  double largest = geometry(set.Vertex(0), set.Vertex(1));
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution pick_vertex(0.5);
  std::uniform_int_distribution<int> vertex_index(0, set.dim() - 1);
  auto endpoint = [&]() {
    return pick_vertex(rng) ? set.Vertex(vertex_index(rng)) : set.SampleUniform(rng);
  };
  for (int i = 0; i < num_samples; ++i) {
    const Vector x = endpoint();
    const Vector y = endpoint();
    largest = std::max(largest, geometry(x, y));
  }
  constants.divergence_diameter = 1.1 * largest;
  constants.divergence_radius_sq = 2.0 * constants.divergence_diameter;
  return constants;
}

}  // namespace fwadapt
