#pragma once

#include <cstdint>
#include <random>

#include "fwadapt/bregman.hpp"
#include "fwadapt/types.hpp"

namespace fwadapt {

/// Probability simplex with a per-coordinate floor:
///   { x : sum x_i = 1, x_i >= floor }.
/// A positive floor keeps Burg-entropy divergences to the LMO vertices finite.
class ClippedSimplex {
 public:
  /// Requires dim >= 2 and floor in [0, 1/dim).
  ClippedSimplex(int dim, double floor);

  /// floor = 1e-6 / dim.
  static ClippedSimplex WithDefaultFloor(int dim);

  int dim() const { return dim_; }
  double floor() const { return floor_; }
  /// Value of the heavy coordinate at a vertex: floor + (1 - dim * floor).
  double peak() const { return peak_; }

  Vector Vertex(int index) const;
  Vector Center() const;

  /// argmin over the set of <g, z>: the vertex on argmin_i g_i, smallest index
  /// on ties. Throws InputError on non-finite entries or a size mismatch.
  Vector Lmo(const Vector& g) const;
  int LmoIndex(const Vector& g) const;

  bool Contains(const Vector& x, double tol = 1e-12) const;
  /// Strictly inside: every coordinate above the floor.
  bool InRelativeInterior(const Vector& x) const;

  /// Euclidean distance from x to the relative boundary, measured inside the
  /// affine hull: min_i (x_i - floor) / sqrt(1 - 1/dim).
  double BoundaryDistance(const Vector& x) const;

  /// max ||u - v|| over the set, attained by any two distinct vertices.
  double EuclideanDiameter() const;

  /// Uniform (Dirichlet(1)) point of the set.
  Vector SampleUniform(std::mt19937_64& rng) const;

 private:
  int dim_;
  double floor_;
  double peak_;
};

struct SetConstants {
  double euclidean_diameter = 0.0;    // D
  double divergence_diameter = 0.0;   // D_V, sampled with a 1.1 safety factor
  double divergence_radius_sq = 0.0;  // R^2 = 2 D_V, so V(x, y) <= R^2 / 2
};

/// D exactly; D_V as 1.1 x the largest V over num_samples pairs, each endpoint
/// a random vertex or a uniform interior point with equal odds, plus one
/// vertex-vertex pair. Throws DomainError when the geometry's domain does not
/// contain the set (Burg entropy with floor 0).
SetConstants ComputeSetConstants(const ClippedSimplex& set, const BregmanDivergence& geometry,
                                 int num_samples, std::uint64_t seed = 0);

}  // namespace fwadapt
