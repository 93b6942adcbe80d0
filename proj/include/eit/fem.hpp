#pragma once

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <optional>

#include "eit/cauchy_data.hpp"
#include "eit/field.hpp"

namespace eit {

/// Element stiffness of triangle t for unit conductivity:
/// |T| * grad(psi_i) . grad(psi_j).
Eigen::Matrix3d unit_element_stiffness(const Mesh& mesh, Eigen::Index t);

/// Assembles sum_T w_T * unit_element_stiffness(T).
SparseMatrix weighted_stiffness(const Mesh& mesh, const Vector& triangle_weights);

/// Consistent P1 mass matrix.
SparseMatrix mass_matrix(const Mesh& mesh);

/// Per-triangle vertex average of a nodal field.
Vector triangle_average(const Mesh& mesh, const Vector& nodal);

/// Per-triangle gradient (2 x T) of a P1 field.
Eigen::Matrix2Xd triangle_gradients(const Mesh& mesh, const Vector& nodal);

/// Node-indexed load of boundary data given per boundary slot, integrated by
/// the trapezoidal rule.
Vector boundary_load(const Mesh& mesh, const Vector& slot_values);

/// Nodal values restricted to the boundary, ordered by boundary slot.
Vector boundary_trace(const Mesh& mesh, const Vector& nodal);

/// Grounded Neumann problem for one conductivity: the P1 stiffness matrix A
/// (conductivity averaged per triangle), the grounding vector m_i equal to the
/// integral of psi_i over the Dirichlet arc, and an LU factorization of the
/// saddle-point system [[A, m], [m^T, 0]].
class StiffnessSystem {
 public:
  StiffnessSystem(const Field& gamma, const BoundaryArc& arc_D);

  const MeshPtr& mesh() const { return mesh_; }
  const BoundaryArc& arc() const { return arc_; }
  const SparseMatrix& matrix() const { return stiffness_; }
  const Vector& grounding() const { return grounding_; }

  /// Solves A u + m lambda = load, m^T u = 0. No compatibility check; for
  /// loads with nonzero total the multiplier absorbs the mismatch.
  Vector solve(const Vector& load) const;

 private:
  MeshPtr mesh_;
  BoundaryArc arc_;
  SparseMatrix stiffness_;
  Vector grounding_;
  std::shared_ptr<Eigen::SparseLU<SparseMatrix>> lu_;
};

/// Builds the system for `gamma`. With `admissibility` = c the nodal values
/// must lie in [c, 1/c]; otherwise only positivity is required.
StiffnessSystem assemble(const Field& gamma, const BoundaryArc& arc_D,
                         std::optional<double> admissibility = std::nullopt);

/// Potential for a node-indexed Neumann load. Throws ConfigError when the load
/// total exceeds 1e-8 of its norm.
Field solve_neumann(const StiffnessSystem& system, const Vector& load);

/// Dirichlet samples on the system's arc for the Neumann load.
BoundarySamples nd_trace(const StiffnessSystem& system, const Vector& load);

/// Forward solutions for every pattern of a discretized data set.
struct ForwardState {
  std::vector<Vector> potentials;
  double discrepancy = 0.0;
};

/// 1/2 sum_k ||trace(u_k) - f_k||^2 over the Dirichlet arc (trapezoidal).
double boundary_misfit(const DiscreteData& data, const std::vector<Vector>& potentials);

ForwardState solve_forward(const StiffnessSystem& system, const DiscreteData& data);

double discrepancy(const StiffnessSystem& system, const DiscreteData& data);

/// Coefficients r_j of a functional on the hat basis.
struct DualVector {
  MeshPtr mesh;
  Vector coeffs;
};

/// Derivative of the discrepancy with respect to nodal perturbations of the
/// conductivity: r_j = integral of G psi_j with
/// G = -sum_k grad F_{g_k} . grad F_{chi (trace - f_k)}.
DualVector assemble_R_prime(const StiffnessSystem& system, const DiscreteData& data,
                            const ForwardState& forward);
DualVector assemble_R_prime(const Field& gamma, const DiscreteData& data);

/// H^1 metric of one mesh: G = K + M with K the unit stiffness matrix and M
/// the mass matrix, plus a Cholesky factorization of its interior block.
class H1Metric {
 public:
  explicit H1Metric(MeshPtr mesh);

  const MeshPtr& mesh() const { return mesh_; }
  const SparseMatrix& gram() const { return gram_; }

  double inner(const Vector& u, const Vector& v) const { return u.dot(gram_ * v); }
  double norm_sq(const Vector& u) const { return inner(u, u); }

  /// Riesz representative in H^1_0: (K + M) v = r on interior nodes, v = 0 on
  /// the boundary.
  Field riesz(const DualVector& functional) const;

 private:
  MeshPtr mesh_;
  SparseMatrix gram_;
  std::vector<int> interior_;
  std::shared_ptr<Eigen::SimplicialLLT<SparseMatrix>> llt_;
};

Field sobolev_gradient(const DualVector& functional);

}  // namespace eit
