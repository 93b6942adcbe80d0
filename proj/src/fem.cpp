#include "eit/fem.hpp"

#include <cmath>
#include <string>

namespace eit {

Eigen::Matrix3d unit_element_stiffness(const Mesh& mesh, Eigen::Index t) {
  const auto G = mesh.hat_gradients(t);
  return mesh.triangle_areas()[t] * (G.transpose() * G);
}

SparseMatrix weighted_stiffness(const Mesh& mesh, const Vector& triangle_weights) {
  const auto& T = mesh.triangles();
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(9 * static_cast<std::size_t>(T.cols()));
  for (Eigen::Index t = 0; t < T.cols(); ++t) {
    const Eigen::Matrix3d Ke = triangle_weights[t] * unit_element_stiffness(mesh, t);
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) trips.emplace_back(T(a, t), T(b, t), Ke(a, b));
  }
  SparseMatrix A(mesh.num_nodes(), mesh.num_nodes());
  A.setFromTriplets(trips.begin(), trips.end());
  return A;
}

SparseMatrix mass_matrix(const Mesh& mesh) {
  const auto& T = mesh.triangles();
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(9 * static_cast<std::size_t>(T.cols()));
  for (Eigen::Index t = 0; t < T.cols(); ++t) {
    const double a = mesh.triangle_areas()[t] / 12.0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) trips.emplace_back(T(i, t), T(j, t), i == j ? 2.0 * a : a);
  }
  SparseMatrix M(mesh.num_nodes(), mesh.num_nodes());
  M.setFromTriplets(trips.begin(), trips.end());
  return M;
}

Vector triangle_average(const Mesh& mesh, const Vector& nodal) {
  const auto& T = mesh.triangles();
  Vector avg(T.cols());
  for (Eigen::Index t = 0; t < T.cols(); ++t) avg[t] = (nodal[T(0, t)] + nodal[T(1, t)] + nodal[T(2, t)]) / 3.0;
  return avg;
}

Eigen::Matrix2Xd triangle_gradients(const Mesh& mesh, const Vector& nodal) {
  const auto& T = mesh.triangles();
  Eigen::Matrix2Xd g(2, T.cols());
  for (Eigen::Index t = 0; t < T.cols(); ++t) {
    const Eigen::Vector3d u(nodal[T(0, t)], nodal[T(1, t)], nodal[T(2, t)]);
    g.col(t) = mesh.hat_gradients(t) * u;
  }
  return g;
}

Vector boundary_load(const Mesh& mesh, const Vector& slot_values) {
  const auto& nodes = mesh.boundary_nodes();
  if (slot_values.size() != static_cast<Eigen::Index>(nodes.size())) {
    throw ConfigError("boundary data needs one value per boundary node");
  }
  const Vector w = boundary_lumped_weights(mesh);
  Vector b = Vector::Zero(mesh.num_nodes());
  for (std::size_t s = 0; s < nodes.size(); ++s) {
    const auto i = static_cast<Eigen::Index>(s);
    b[nodes[s]] = w[i] * slot_values[i];
  }
  return b;
}

Vector boundary_trace(const Mesh& mesh, const Vector& nodal) {
  const auto& nodes = mesh.boundary_nodes();
  Vector tr(static_cast<Eigen::Index>(nodes.size()));
  for (std::size_t s = 0; s < nodes.size(); ++s) tr[static_cast<Eigen::Index>(s)] = nodal[nodes[s]];
  return tr;
}

StiffnessSystem::StiffnessSystem(const Field& gamma, const BoundaryArc& arc_D)
    : mesh_(gamma.mesh), arc_(arc_D) {
  const Mesh& mesh = *mesh_;
  stiffness_ = weighted_stiffness(mesh, triangle_average(mesh, gamma.values));
  grounding_ = boundary_load(mesh, arc_mask(mesh, arc_D));

  const auto n = mesh.num_nodes();
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(stiffness_.nonZeros() + 2 * n));
  for (Eigen::Index k = 0; k < stiffness_.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(stiffness_, k); it; ++it) trips.emplace_back(it.row(), it.col(), it.value());
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (grounding_[i] != 0.0) {
      trips.emplace_back(i, n, grounding_[i]);
      trips.emplace_back(n, i, grounding_[i]);
    }
  }
  SparseMatrix saddle(n + 1, n + 1);
  saddle.setFromTriplets(trips.begin(), trips.end());
  saddle.makeCompressed();

  lu_ = std::make_shared<Eigen::SparseLU<SparseMatrix>>();
  lu_->analyzePattern(saddle);
  lu_->factorize(saddle);
  if (lu_->info() != Eigen::Success) {
    throw NumericalError("singular grounded Neumann system (empty Dirichlet arc?)");
  }
}

Vector StiffnessSystem::solve(const Vector& load) const {
  const auto n = mesh_->num_nodes();
  Vector rhs(n + 1);
  rhs.head(n) = load;
  rhs[n] = 0.0;
  const Vector x = lu_->solve(rhs);
  if (!x.allFinite()) throw NumericalError("non-finite potential");
  return x.head(n);
}

StiffnessSystem assemble(const Field& gamma, const BoundaryArc& arc_D, std::optional<double> admissibility) {
  if (!gamma.all_finite()) throw ConfigError("conductivity has non-finite values");
  const double lo = gamma.values.minCoeff(), hi = gamma.values.maxCoeff();
  if (admissibility) {
    const double c = *admissibility;
    const double slack = 1e-12;
    if (lo < c - slack || hi > 1.0 / c + slack) {
      throw ConfigError("conductivity outside [c, 1/c]: range [" + std::to_string(lo) + ", " +
                        std::to_string(hi) + "]");
    }
  } else if (!(lo > 0.0)) {
    throw ConfigError("conductivity must be positive");
  }
  return StiffnessSystem(gamma, arc_D);
}

Field solve_neumann(const StiffnessSystem& system, const Vector& load) {
  if (std::abs(load.sum()) > 1e-8 * std::max(load.norm(), 1e-300)) {
    throw ConfigError("Neumann data does not have zero mean");
  }
  return Field(system.mesh(), system.solve(load));
}

BoundarySamples nd_trace(const StiffnessSystem& system, const Vector& load) {
  const Field u = solve_neumann(system, load);
  const Mesh& mesh = *system.mesh();
  const Vector mask = arc_mask(mesh, system.arc());
  const auto n = static_cast<Eigen::Index>(mask.sum());
  BoundarySamples out{Vector(n), Vector(n)};
  Eigen::Index j = 0;
  for (Eigen::Index s = 0; s < mask.size(); ++s) {
    if (mask[s] == 0.0) continue;
    out.theta[j] = mesh.boundary_theta()[s];
    out.values[j] = u.values[mesh.boundary_nodes()[static_cast<std::size_t>(s)]];
    ++j;
  }
  return out;
}

double boundary_misfit(const DiscreteData& data, const std::vector<Vector>& potentials) {
  double total = 0.0;
  for (std::size_t k = 0; k < potentials.size(); ++k) {
    const Vector r = boundary_trace(*data.mesh, potentials[k]) - data.targets[k];
    total += 0.5 * (data.weights.array() * data.mask.array() * r.array().square()).sum();
  }
  return total;
}

ForwardState solve_forward(const StiffnessSystem& system, const DiscreteData& data) {
  if (system.mesh() != data.mesh) throw ConfigError("data is bound to a different mesh");
  ForwardState st;
  st.potentials.reserve(data.size());
  for (const auto& load : data.loads) st.potentials.push_back(system.solve(load));
  st.discrepancy = boundary_misfit(data, st.potentials);
  return st;
}

double discrepancy(const StiffnessSystem& system, const DiscreteData& data) {
  return solve_forward(system, data).discrepancy;
}

DualVector assemble_R_prime(const StiffnessSystem& system, const DiscreteData& data, const ForwardState& forward) {
  const Mesh& mesh = *system.mesh();
  if (forward.potentials.size() != data.size()) throw ConfigError("forward state does not match data");
  Vector G = Vector::Zero(mesh.num_triangles());
  for (std::size_t k = 0; k < data.size(); ++k) {
    const Vector residual =
        data.mask.cwiseProduct(boundary_trace(mesh, forward.potentials[k]) - data.targets[k]);
    const Vector adjoint = system.solve(boundary_load(mesh, residual));
    const auto gu = triangle_gradients(mesh, forward.potentials[k]);
    const auto gp = triangle_gradients(mesh, adjoint);
    G -= gu.cwiseProduct(gp).colwise().sum().transpose();
  }
  Vector r = Vector::Zero(mesh.num_nodes());
  const auto& T = mesh.triangles();
  for (Eigen::Index t = 0; t < T.cols(); ++t) {
    const double share = G[t] * mesh.triangle_areas()[t] / 3.0;
    for (int a = 0; a < 3; ++a) r[T(a, t)] += share;
  }
  return {system.mesh(), std::move(r)};
}

DualVector assemble_R_prime(const Field& gamma, const DiscreteData& data) {
  const auto system = assemble(gamma, data.arc);
  return assemble_R_prime(system, data, solve_forward(system, data));
}

H1Metric::H1Metric(MeshPtr mesh) : mesh_(std::move(mesh)) {
  const Mesh& m = *mesh_;
  gram_ = weighted_stiffness(m, Vector::Ones(m.num_triangles())) + mass_matrix(m);

  std::vector<int> slot(static_cast<std::size_t>(m.num_nodes()), -1);
  for (Eigen::Index i = 0; i < m.num_nodes(); ++i) {
    if (!m.is_boundary(static_cast<int>(i))) {
      slot[static_cast<std::size_t>(i)] = static_cast<int>(interior_.size());
      interior_.push_back(static_cast<int>(i));
    }
  }
  std::vector<Eigen::Triplet<double>> trips;
  for (Eigen::Index k = 0; k < gram_.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(gram_, k); it; ++it) {
      const int r = slot[static_cast<std::size_t>(it.row())], c = slot[static_cast<std::size_t>(it.col())];
      if (r >= 0 && c >= 0) trips.emplace_back(r, c, it.value());
    }
  }
  const auto ni = static_cast<Eigen::Index>(interior_.size());
  SparseMatrix Gii(ni, ni);
  Gii.setFromTriplets(trips.begin(), trips.end());
  llt_ = std::make_shared<Eigen::SimplicialLLT<SparseMatrix>>(Gii);
  if (llt_->info() != Eigen::Success) throw NumericalError("H1 Gram matrix is not positive definite");
}

Field H1Metric::riesz(const DualVector& functional) const {
  if (functional.mesh != mesh_) throw ConfigError("functional lives on a different mesh");
  const auto ni = static_cast<Eigen::Index>(interior_.size());
  Vector rhs(ni);
  for (Eigen::Index i = 0; i < ni; ++i) rhs[i] = functional.coeffs[interior_[static_cast<std::size_t>(i)]];
  const Vector vi = llt_->solve(rhs);
  Vector v = Vector::Zero(mesh_->num_nodes());
  for (Eigen::Index i = 0; i < ni; ++i) v[interior_[static_cast<std::size_t>(i)]] = vi[i];
  return Field(mesh_, std::move(v));
}

Field sobolev_gradient(const DualVector& functional) { return H1Metric(functional.mesh).riesz(functional); }

}  // namespace eit
