#include "eit/phantoms.hpp"

#include <cmath>

namespace eit {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

bool winding_inside(const Points& poly, const Eigen::Vector2d& x) {
  int wn = 0;
  const auto n = poly.cols();
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Vector2d a = poly.col(i), b = poly.col((i + 1) % n);
    const double cross = (b.x() - a.x()) * (x.y() - a.y()) - (x.x() - a.x()) * (b.y() - a.y());
    if (a.y() <= x.y()) {
      if (b.y() > x.y() && cross > 0) ++wn;
    } else if (b.y() <= x.y() && cross < 0) {
      --wn;
    }
  }
  return wn != 0;
}

double profile_value(BumpProfile p, double rho) {
  if (rho >= 1.0) return 0.0;
  switch (p) {
    case BumpProfile::Quartic: {
      const double s = 1.0 - rho * rho;
      return s * s;
    }
    case BumpProfile::Quintic:
      return 1.0 - rho * rho * rho * (10.0 - 15.0 * rho + 6.0 * rho * rho);
  }
  return 0.0;
}

// Largest distance from the origin reached by the inclusion support.
double outer_radius(const Inclusion& inc) {
  return std::visit(overloaded{
                        [](const DiskShape& d) { return d.center.norm() + d.radius; },
                        [](const BumpShape& b) { return b.center.norm() + b.radius; },
                        [](const KiteShape& k) { return kite_outline(k).colwise().norm().maxCoeff(); },
                    },
                    inc.shape);
}

}  // namespace

Points kite_outline(const KiteShape& kite, int samples) {
  Points pts(2, samples);
  const Eigen::Rotation2Dd rot(kite.rotation);
  for (int i = 0; i < samples; ++i) {
    const double t = kTwoPi * i / samples;
    const Eigen::Vector2d local(std::cos(t) + 0.65 * std::cos(2.0 * t) - 0.65, 1.5 * std::sin(t));
    pts.col(i) = kite.center + kite.scale * (rot * local);
  }
  return pts;
}

bool inside(const Inclusion& inclusion, const Eigen::Vector2d& x) {
  return std::visit(overloaded{
                        [&](const DiskShape& d) { return (x - d.center).norm() <= d.radius; },
                        [&](const BumpShape& b) { return (x - b.center).norm() < b.radius; },
                        [&](const KiteShape& k) { return winding_inside(kite_outline(k), x); },
                    },
                    inclusion.shape);
}

double inclusion_value(const Inclusion& inclusion, const Eigen::Vector2d& x) {
  if (const auto* b = std::get_if<BumpShape>(&inclusion.shape)) {
    return inclusion.contrast * profile_value(b->profile, (x - b->center).norm() / b->radius);
  }
  return inside(inclusion, x) ? inclusion.contrast : 0.0;
}

void validate(const PhantomSpec& spec, double c) {
  if (!(spec.background >= c && spec.background <= 1.0 / c)) {
    throw ConfigError("phantom background outside admissible bounds");
  }
  double lo = spec.background, hi = spec.background;
  for (const auto& inc : spec.inclusions) {
    if (!(outer_radius(inc) < 1.0)) throw ConfigError("phantom inclusion is not inside the unit disk");
    if (const auto* d = std::get_if<DiskShape>(&inc.shape); d && !(d->radius > 0.0)) {
      throw ConfigError("disk inclusion needs a positive radius");
    }
    if (const auto* b = std::get_if<BumpShape>(&inc.shape); b && !(b->radius > 0.0)) {
      throw ConfigError("bump inclusion needs a positive radius");
    }
    (inc.contrast < 0 ? lo : hi) += inc.contrast;
  }
  // Worst case assumes all inclusions of one sign overlap.
  if (lo < c || hi > 1.0 / c) throw ConfigError("phantom conductivity leaves admissible bounds");
}

Field rasterize(const PhantomSpec& spec, const MeshPtr& mesh) {
  for (const auto& inc : spec.inclusions) {
    if (!(outer_radius(inc) < 1.0)) throw ConfigError("phantom inclusion is not inside the unit disk");
  }
  Field f = delta_sigma(spec, mesh);
  f.values.array() += spec.background;
  return f;
}

Field delta_sigma(const PhantomSpec& spec, const MeshPtr& mesh) {
  const auto& P = mesh->nodes();
  Vector v = Vector::Zero(P.cols());
  for (const auto& inc : spec.inclusions) {
    // Kites are tested against a cached outline.
    if (const auto* k = std::get_if<KiteShape>(&inc.shape)) {
      const Points outline = kite_outline(*k);
      for (Eigen::Index i = 0; i < P.cols(); ++i) {
        if (winding_inside(outline, P.col(i))) v[i] += inc.contrast;
      }
      continue;
    }
    for (Eigen::Index i = 0; i < P.cols(); ++i) v[i] += inclusion_value(inc, P.col(i));
  }
  return Field(mesh, std::move(v));
}

PhantomSpec circular_phantom(double contrast) {
  return {1.0, {Inclusion{DiskShape{{0.4, 0.2}, 0.25}, contrast}}};
}

PhantomSpec kite_phantom(double contrast) {
  return {1.0, {Inclusion{KiteShape{{0.05, 0.1}, 0.35, 0.0}, contrast}}};
}

PhantomSpec multi_bump_phantom(BumpProfile profile) {
  return {1.0,
          {
              Inclusion{BumpShape{{-0.4, 0.4}, 0.3, profile}, 2.0},
              Inclusion{BumpShape{{0.35, 0.45}, 0.3, profile}, 2.0},
              Inclusion{BumpShape{{0.1, -0.6}, 0.15, profile}, 2.0},
          }};
}

}  // namespace eit
