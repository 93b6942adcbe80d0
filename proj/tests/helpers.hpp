#pragma once

#include <random>

#include "eit/mesh.hpp"

namespace eit::testing {

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

inline double rel_err(const Vector& a, const Vector& b) { return (a - b).norm() / b.norm(); }

/// Random field vanishing on the boundary.
inline Vector random_interior(const Mesh& mesh, std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Vector v(mesh.num_nodes());
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = mesh.is_boundary(static_cast<int>(i)) ? 0.0 : u(rng);
  return v;
}

/// Smooth bump vanishing on the unit circle.
inline Vector smooth_interior(const Mesh& mesh, const Eigen::Vector2d& c, double r, double amp) {
  Vector v(mesh.num_nodes());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double rho = (mesh.nodes().col(i) - c).norm() / r;
    v[i] = rho < 1.0 ? amp * (1 - rho * rho) * (1 - rho * rho) : 0.0;
    if (mesh.is_boundary(static_cast<int>(i))) v[i] = 0.0;
  }
  return v;
}

}  // namespace eit::testing
