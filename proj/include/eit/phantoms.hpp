#pragma once

#include <variant>

#include "eit/field.hpp"

namespace eit {

struct DiskShape {
  Eigen::Vector2d center{0.0, 0.0};
  double radius = 0.25;
};

/// Kite curve center + scale * R(rotation) (cos t + 0.65 cos 2t - 0.65, 1.5 sin t).
struct KiteShape {
  Eigen::Vector2d center{0.0, 0.0};
  double scale = 0.3;
  double rotation = 0.0;
};

enum class BumpProfile {
  Quartic,  // (1 - rho^2)^2, C^1 at the rim
  Quintic,  // 1 - 10 rho^3 + 15 rho^4 - 6 rho^5, C^2 at the rim
};

/// Radial bump; the inclusion contrast is its peak amplitude.
struct BumpShape {
  Eigen::Vector2d center{0.0, 0.0};
  double radius = 0.3;
  BumpProfile profile = BumpProfile::Quartic;
};

using Shape = std::variant<DiskShape, KiteShape, BumpShape>;

struct Inclusion {
  Shape shape;
  double contrast = 1.0;
};

struct PhantomSpec {
  double background = 1.0;
  std::vector<Inclusion> inclusions;
};

/// Closed kite outline sampled at `samples` points.
Points kite_outline(const KiteShape& kite, int samples = 720);

/// Point membership in the support of an inclusion.
bool inside(const Inclusion& inclusion, const Eigen::Vector2d& x);

/// Contribution of one inclusion to sigma at x.
double inclusion_value(const Inclusion& inclusion, const Eigen::Vector2d& x);

/// Throws ConfigError if an inclusion is not strictly inside the unit disk or
/// sigma could leave [c, 1/c] even if all inclusions overlapped.
void validate(const PhantomSpec& spec, double c);

/// Nodal values of sigma.
Field rasterize(const PhantomSpec& spec, const MeshPtr& mesh);

/// Nodal values of sigma - background.
Field delta_sigma(const PhantomSpec& spec, const MeshPtr& mesh);

/// Circular piecewise-constant inclusion.
PhantomSpec circular_phantom(double contrast = 4.0);
/// Kite-shaped piecewise-constant inclusion.
PhantomSpec kite_phantom(double contrast = 4.0);
/// Two large smooth bumps in the upper half and one small one below.
PhantomSpec multi_bump_phantom(BumpProfile profile = BumpProfile::Quartic);

}  // namespace eit
