#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "eit/mesh.hpp"
#include "eit/phantoms.hpp"

namespace eit {

/// Trigonometric current pattern. On the full circle it is cos(n theta) or
/// sin(n theta); on a partial arc it is rescaled to n whole periods inside
/// the arc and zero outside.
struct NeumannPattern {
  enum class Kind { Cosine, Sine };
  Kind kind = Kind::Cosine;
  int n = 1;
  BoundaryArc arc;

  double operator()(double theta) const;
  std::string name() const;
};

/// Samples of a boundary function at angles theta.
struct BoundarySamples {
  Vector theta;
  Vector values;
};

/// K Neumann patterns with Dirichlet samples f_k on the measurement arc.
struct CauchyDataSet {
  BoundaryArc arc;
  std::vector<NeumannPattern> patterns;
  /// Angles of the sampled boundary nodes inside the arc, ascending.
  Vector theta;
  /// One sample vector per pattern, aligned with `theta`.
  std::vector<Vector> dirichlet;
  double noise_level = 0.0;
  double noise_std = 0.0;
  std::uint64_t seed = 0;
  /// Phantom the data came from, when simulated.
  std::optional<PhantomSpec> phantom;

  std::size_t size() const { return patterns.size(); }
};

/// A data set bound to one mesh: Neumann loads and Dirichlet targets in the
/// mesh's boundary ordering.
struct DiscreteData {
  MeshPtr mesh;
  BoundaryArc arc;
  /// chi of the arc per boundary slot.
  Vector mask;
  /// Trapezoidal weight per boundary slot.
  Vector weights;
  /// Node-indexed Neumann loads, with zero total.
  std::vector<Vector> loads;
  /// Dirichlet data per boundary slot (zero off the arc).
  std::vector<Vector> targets;

  std::size_t size() const { return loads.size(); }
};

/// Trapezoidal Neumann load of a pattern, with its discrete total removed by
/// subtracting a multiple of the arc's boundary weights.
Vector pattern_load(const Mesh& mesh, const NeumannPattern& pattern);

/// Binds `data` to `mesh`. Every sample angle must coincide with a boundary
/// node of the mesh inside the arc; nodes without a sample (added by
/// refinement) are filled by linear interpolation in theta.
DiscreteData discretize(const CauchyDataSet& data, const MeshPtr& mesh);

/// Linear interpolation of samples in theta, periodic when `periodic`.
double interpolate_samples(const Vector& theta, const Vector& values, double t, bool periodic);

}  // namespace eit
