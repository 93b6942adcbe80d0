#pragma once

#include "eit/mesh.hpp"

namespace eit {

/// Piecewise-affine scalar function given by nodal values on a mesh.
struct Field {
  MeshPtr mesh;
  Vector values;

  Field() = default;
  Field(MeshPtr m, Vector v) : mesh(std::move(m)), values(std::move(v)) {
    if (!mesh || values.size() != mesh->num_nodes()) {
      throw ConfigError("field size does not match mesh node count");
    }
  }

  static Field constant(MeshPtr m, double value) {
    const auto n = m->num_nodes();
    return Field(std::move(m), Vector::Constant(n, value));
  }

  bool all_finite() const { return values.allFinite(); }
};

/// P1 evaluation of `field` at the nodes of `target`. Points that fall outside
/// every source triangle (the sliver between a coarse boundary polygon and the
/// circle) take the affine extension of the nearest source triangle.
Field interpolate(const Field& field, const MeshPtr& target);

/// P1 evaluation of `field` at an arbitrary point, with the same fallback.
double evaluate_at(const Field& field, const Eigen::Vector2d& point);

}  // namespace eit
