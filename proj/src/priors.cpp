#include "eit/priors.hpp"

#include <cmath>

namespace eit {

namespace {

bool polygon_contains(const Points& poly, const Eigen::Vector2d& x) {
  bool in = false;
  const auto n = poly.cols();
  for (Eigen::Index i = 0, j = n - 1; i < n; j = i++) {
    const double yi = poly(1, i), yj = poly(1, j);
    if ((yi > x.y()) != (yj > x.y())) {
      const double xc = poly(0, j) + (x.y() - yj) / (yi - yj) * (poly(0, i) - poly(0, j));
      if (x.x() < xc) in = !in;
    }
  }
  return in;
}

}  // namespace

Eigen::Vector2d polygon_centroid(const Points& polygon) {
  double a2 = 0.0;
  Eigen::Vector2d c = Eigen::Vector2d::Zero();
  const auto n = polygon.cols();
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Vector2d p = polygon.col(i), q = polygon.col((i + 1) % n);
    const double cross = p.x() * q.y() - q.x() * p.y();
    a2 += cross;
    c += cross * (p + q);
  }
  if (std::abs(a2) < 1e-300) return polygon.rowwise().mean();
  return c / (3.0 * a2);
}

bool Region::contains(const Eigen::Vector2d& x) const {
  for (const auto& d : disks) {
    if ((x - d.center).norm() <= d.radius) return true;
  }
  for (const auto& p : polygons) {
    if (polygon_contains(p, x)) return true;
  }
  return false;
}

Region Region::scaled(double factor) const {
  Region r;
  for (const auto& d : disks) r.disks.push_back({d.center, factor * d.radius});
  for (const auto& p : polygons) {
    const Eigen::Vector2d c = polygon_centroid(p);
    r.polygons.push_back((factor * (p.colwise() - c)).colwise() + c);
  }
  return r;
}

void PriorMask::validate() const {
  if (!(mu_in > 0.0 && mu_in <= 1.0 && mu_out > 0.0 && mu_out <= 1.0)) {
    throw ConfigError("prior weights must lie in (0, 1]");
  }
  if (!(1.0 + dilation > 0.0)) throw ConfigError("prior dilation must satisfy 1 + dr > 0");
  if (region) {
    for (const auto& d : region->disks) {
      if (!(d.radius > 0.0)) throw ConfigError("prior disk needs a positive radius");
    }
    for (const auto& p : region->polygons) {
      if (p.cols() < 3) throw ConfigError("prior polygon needs at least three vertices");
    }
  }
}

Field mu_field(const PriorMask& mask, const MeshPtr& mesh) {
  mask.validate();
  if (!mask.region || mask.region->empty()) return Field::constant(mesh, 1.0);
  const Region region = mask.region->scaled(1.0 + mask.dilation);
  const auto& P = mesh->nodes();
  Vector mu(P.cols());
  for (Eigen::Index i = 0; i < P.cols(); ++i) mu[i] = region.contains(P.col(i)) ? mask.mu_in : mask.mu_out;
  return Field(mesh, std::move(mu));
}

}  // namespace eit
