#include "eit/forward_sim.hpp"

#include <cmath>
#include <iostream>

#include "eit/fem.hpp"

namespace eit {

std::vector<NeumannPattern> default_pattern_set(const BoundaryArc& arc) {
  std::vector<NeumannPattern> ps;
  for (int n = 1; n <= 5; ++n) {
    ps.push_back({NeumannPattern::Kind::Cosine, n, arc});
    ps.push_back({NeumannPattern::Kind::Sine, n, arc});
  }
  return ps;
}

NormalStream::NormalStream(std::uint64_t seed, std::uint32_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu), static_cast<std::uint32_t>(seed >> 32), stream};
  engine_.seed(seq);
}

double NormalStream::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double NormalStream::operator()() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  spare_ = r * std::sin(kTwoPi * u2);
  has_spare_ = true;
  return r * std::cos(kTwoPi * u2);
}

CauchyDataSet simulate(const Field& true_sigma, const BoundaryArc& arc, const MeshPtr& recon_mesh,
                       const SimulationOptions& options, const std::vector<NeumannPattern>& patterns) {
  if (!(options.noise_level >= 0.0)) throw ConfigError("noise level must be non-negative");
  const MeshPtr& fine = true_sigma.mesh;
  const bool same = fine == recon_mesh || (fine->num_nodes() == recon_mesh->num_nodes() &&
                                           fine->nodes() == recon_mesh->nodes());
  if (same && !options.allow_inverse_crime) {
    throw ConfigError("simulation mesh equals reconstruction mesh; pass allow_inverse_crime to override");
  }
  if (!same && 3.0 * fine->max_edge_length() > recon_mesh->max_edge_length() + 1e-12) {
    std::clog << "warning: simulation mesh is less than 3x finer than the reconstruction mesh\n";
  }

  CauchyDataSet data;
  data.arc = arc;
  data.patterns = patterns.empty() ? default_pattern_set(arc) : patterns;
  data.noise_level = options.noise_level;
  data.seed = options.seed;

  const Vector mask = arc_mask(*recon_mesh, arc);
  const Vector weights = boundary_lumped_weights(*recon_mesh);
  const auto& recon_theta = recon_mesh->boundary_theta();
  std::vector<Eigen::Index> slots;
  for (Eigen::Index s = 0; s < mask.size(); ++s) {
    if (mask[s] != 0.0) slots.push_back(s);
  }
  if (slots.empty()) throw ConfigError("measurement arc contains no reconstruction boundary nodes");
  data.theta.resize(static_cast<Eigen::Index>(slots.size()));
  Vector w(data.theta.size());
  for (std::size_t j = 0; j < slots.size(); ++j) {
    data.theta[static_cast<Eigen::Index>(j)] = recon_theta[slots[j]];
    w[static_cast<Eigen::Index>(j)] = weights[slots[j]];
  }

  const auto system = assemble(true_sigma, arc);
  double peak = 0.0;
  for (const auto& p : data.patterns) {
    const Vector u = system.solve(pattern_load(*fine, p));
    const Vector trace = boundary_trace(*fine, u);
    Vector f(data.theta.size());
    for (Eigen::Index j = 0; j < f.size(); ++j) {
      f[j] = interpolate_samples(fine->boundary_theta(), trace, data.theta[j], true);
    }
    // Ground on the reconstruction mesh's arc quadrature.
    f.array() -= w.dot(f) / w.sum();
    peak = std::max(peak, f.cwiseAbs().maxCoeff());
    data.dirichlet.push_back(std::move(f));
  }

  data.noise_std = options.noise_level * peak;
  if (data.noise_std > 0.0) {
    for (std::size_t k = 0; k < data.dirichlet.size(); ++k) {
      NormalStream noise(options.seed, static_cast<std::uint32_t>(k));
      for (Eigen::Index j = 0; j < data.dirichlet[k].size(); ++j) data.dirichlet[k][j] += data.noise_std * noise();
    }
  }
  return data;
}

}  // namespace eit
