#pragma once

#include <optional>

#include "eit/field.hpp"

namespace eit {

/// Union of disks and simple polygons.
struct Region {
  struct Disk {
    Eigen::Vector2d center{0.0, 0.0};
    double radius = 0.0;
  };
  std::vector<Disk> disks;
  std::vector<Points> polygons;

  bool empty() const { return disks.empty() && polygons.empty(); }
  bool contains(const Eigen::Vector2d& x) const;
  /// Every part scaled by `factor` about its own centroid.
  Region scaled(double factor) const;
};

/// Centroid of a simple polygon (area weighted).
Eigen::Vector2d polygon_centroid(const Points& polygon);

/// Assumed support of the perturbation: mu_in inside, mu_out elsewhere.
struct PriorMask {
  std::optional<Region> region;
  double mu_in = 1e-2;
  double mu_out = 1.0;
  /// Relative dilation: the region is scaled by (1 + dilation).
  double dilation = 0.0;

  /// Throws ConfigError on weights outside (0, 1] or 1 + dilation <= 0.
  void validate() const;
};

/// Nodal prior weights mu_j.
Field mu_field(const PriorMask& mask, const MeshPtr& mesh);

/// alpha_j = alpha * beta_j * mu_j.
template <class MuDerived, class BetaDerived>
Vector alpha_weights(double alpha, const Eigen::MatrixBase<MuDerived>& mu, const Eigen::MatrixBase<BetaDerived>& beta) {
  if (!(alpha > 0.0)) throw ConfigError("regularization parameter must be positive");
  return alpha * beta.cwiseProduct(mu);
}

}  // namespace eit
