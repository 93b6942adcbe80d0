#pragma once

#include <random>

#include "eit/cauchy_data.hpp"
#include "eit/field.hpp"

namespace eit {

/// cos(n theta) and sin(n theta) for n = 1..5, adapted to `arc`.
std::vector<NeumannPattern> default_pattern_set(const BoundaryArc& arc);

/// Reproducible standard normal stream: mt19937_64 seeded through
/// std::seed_seq{seed_lo, seed_hi, stream}, 53-bit uniforms, Box-Muller.
class NormalStream {
 public:
  NormalStream(std::uint64_t seed, std::uint32_t stream);
  double operator()();

 private:
  double uniform();

  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

struct SimulationOptions {
  double noise_level = 1e-2;
  std::uint64_t seed = 0;
  /// Allows simulating on the reconstruction mesh itself.
  bool allow_inverse_crime = false;
};

/// Solves every pattern on the mesh of `true_sigma`, samples the trace at the
/// boundary nodes of `recon_mesh` inside `arc` by linear interpolation in
/// theta, grounds the samples on the arc and adds white noise with standard
/// deviation noise_level * max_k max_j |f_k(x_j)|.
CauchyDataSet simulate(const Field& true_sigma, const BoundaryArc& arc, const MeshPtr& recon_mesh,
                       const SimulationOptions& options,
                       const std::vector<NeumannPattern>& patterns = {});

}  // namespace eit
