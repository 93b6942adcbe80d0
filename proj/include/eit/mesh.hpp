#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <memory>
#include <stdexcept>
#include <utility>
#include <vector>

namespace eit {

using Vector = Eigen::VectorXd;
using Points = Eigen::Matrix2Xd;
using Triangles = Eigen::Matrix3Xi;
using SparseMatrix = Eigen::SparseMatrix<double>;

/// Thrown for violated preconditions and malformed inputs.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Thrown when a linear solve or iteration breaks down.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kBoundaryTol = 1e-10;

/// Angular interval (theta1, theta2) of the unit circle. The full circle is
/// represented by (0, 2*pi) with `full` set.
struct BoundaryArc {
  double theta1 = 0.0;
  double theta2 = kTwoPi;
  bool full = true;

  static BoundaryArc whole() { return {}; }
  /// Throws ConfigError unless 0 <= theta1 < theta2 <= 2*pi.
  static BoundaryArc between(double theta1, double theta2);

  double length() const { return theta2 - theta1; }
  /// Strict interior membership; points within kBoundaryTol of an endpoint
  /// are excluded.
  bool contains(double theta) const;
};

/// Conforming, positively oriented triangulation of (an approximation of)
/// the unit disk. Immutable once built; share it through MeshPtr.
class Mesh {
 public:
  /// Builds the mesh and derives boundary topology. Throws ConfigError if any
  /// of the validity invariants fail.
  Mesh(Points nodes, Triangles triangles);

  const Points& nodes() const { return nodes_; }
  const Triangles& triangles() const { return triangles_; }
  Eigen::Index num_nodes() const { return nodes_.cols(); }
  Eigen::Index num_triangles() const { return triangles_.cols(); }

  /// Boundary node indices sorted by angle.
  const std::vector<int>& boundary_nodes() const { return boundary_; }
  /// Angle in [0, 2*pi) of each entry of boundary_nodes().
  const Vector& boundary_theta() const { return boundary_theta_; }
  /// Pairs (boundary_nodes()[i], boundary_nodes()[i+1 mod n]).
  const std::vector<std::pair<int, int>>& boundary_edges() const { return boundary_edges_; }
  bool is_boundary(int node) const { return on_boundary_[node] != 0; }
  /// Position of `node` in boundary_nodes(), or -1 for interior nodes.
  int boundary_slot(int node) const { return boundary_slot_[node]; }

  const Vector& triangle_areas() const { return areas_; }
  double area() const { return areas_.sum(); }

  /// Constant gradients of the three hat functions on triangle t, as columns.
  Eigen::Matrix<double, 2, 3> hat_gradients(Eigen::Index t) const;

  /// Longest-edge length over all triangles.
  double max_edge_length() const;

 private:
  Points nodes_;
  Triangles triangles_;
  std::vector<int> boundary_;
  Vector boundary_theta_;
  std::vector<std::pair<int, int>> boundary_edges_;
  std::vector<char> on_boundary_;
  std::vector<int> boundary_slot_;
  Vector areas_;
};

using MeshPtr = std::shared_ptr<const Mesh>;

/// Concentric-ring triangulation of the unit disk with target edge length h.
/// Throws ConfigError unless 0 < h < 1.
MeshPtr generate_disk_mesh(double h);

/// Node areas: one third of the area of the support of each hat function.
Vector node_areas(const Mesh& mesh);

/// Result of refine_where: the new mesh and the sparse P1 prolongation
/// (new nodes x old nodes) carrying nodal fields across.
struct Refinement {
  MeshPtr mesh;
  SparseMatrix transfer;
};

/// Marks the top `fraction` of triangles by `indicator` (ties broken by
/// triangle index) and refines them by longest-edge bisection with conforming
/// closure. New boundary nodes are projected onto the unit circle.
Refinement refine_where(const Mesh& mesh, const Vector& indicator, double fraction);

/// Characteristic weights of `arc` on the boundary nodes (ordered as
/// mesh.boundary_nodes()).
Vector arc_mask(const Mesh& mesh, const BoundaryArc& arc);

/// Trapezoidal boundary weights: half the length of the two adjacent boundary
/// edges, indexed by boundary slot.
Vector boundary_lumped_weights(const Mesh& mesh);

/// Angle of a point in [0, 2*pi).
double polar_angle(double x, double y);

}  // namespace eit
