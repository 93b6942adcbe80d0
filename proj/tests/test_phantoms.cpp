#include <doctest.h>

#include "eit/phantoms.hpp"
#include "helpers.hpp"

using namespace eit;

TEST_CASE("background-only phantom") {
  const auto mesh = generate_disk_mesh(0.1);
  const PhantomSpec spec{1.7, {}};
  CHECK((rasterize(spec, mesh).values.array() == 1.7).all());
  CHECK(delta_sigma(spec, mesh).values.isZero(0.0));
}

TEST_CASE("disk membership") {
  const auto mesh = generate_disk_mesh(0.05);
  const PhantomSpec spec{1.0, {Inclusion{DiskShape{{0.4, 0.0}, 0.25}, 1.0}}};
  const Field sigma = rasterize(spec, mesh);
  int inside_count = 0;
  for (Eigen::Index j = 0; j < mesh->num_nodes(); ++j) {
    const double d = (mesh->nodes().col(j) - Eigen::Vector2d(0.4, 0.0)).norm();
    if (std::abs(d - 0.25) < 1e-12) continue;
    const bool in = d < 0.25;
    inside_count += in;
    CHECK(sigma.values[j] == (in ? 2.0 : 1.0));
  }
  CHECK(inside_count > 0);
}

TEST_CASE("bump profiles") {
  for (auto profile : {BumpProfile::Quartic, BumpProfile::Quintic}) {
    const Inclusion bump{BumpShape{{0.1, -0.2}, 0.3, profile}, 2.5};
    CHECK(inclusion_value(bump, {0.1, -0.2}) == doctest::Approx(2.5).epsilon(1e-15));
    const Eigen::Vector2d dir(0.6, 0.8);
    const Eigen::Vector2d rim = Eigen::Vector2d(0.1, -0.2) + 0.3 * dir;
    CHECK(std::abs(inclusion_value(bump, rim)) < 1e-12);
    CHECK(inclusion_value(bump, rim + 0.01 * dir) == 0.0);
    // One-sided radial derivative at the rim.
    const double t = 1e-6;
    CHECK(std::abs(inclusion_value(bump, rim - t * dir) / t) < 1e-3);
    // Monotone decay along the radius.
    double prev = 3.0;
    for (int k = 0; k <= 10; ++k) {
      const double v = inclusion_value(bump, Eigen::Vector2d(0.1, -0.2) + 0.03 * k * dir);
      CHECK(v <= prev);
      prev = v;
    }
  }
}

TEST_CASE("kite outline and membership") {
  const KiteShape kite{{0.1, 0.05}, 0.3, 0.4};
  const Points outline = kite_outline(kite, 360);
  CHECK(outline.cols() == 360);
  CHECK(outline.colwise().norm().maxCoeff() < 1.0);
  const Inclusion inc{kite, 1.0};
  // Origin of the kite parameter curve's interior.
  CHECK(inside(inc, kite.center + Eigen::Vector2d(-0.1, 0.0)));
  CHECK_FALSE(inside(inc, {0.9, 0.0}));
  CHECK_FALSE(inside(inc, {-0.9, 0.0}));
}

TEST_CASE("delta_sigma") {
  const auto mesh = generate_disk_mesh(0.05);
  const Inclusion a{DiskShape{{-0.4, 0.1}, 0.2}, 1.5};
  const Inclusion b{BumpShape{{0.4, -0.1}, 0.3, BumpProfile::Quartic}, -0.5};
  const Field both = delta_sigma({1.0, {a, b}}, mesh);
  const Field only_a = delta_sigma({1.0, {a}}, mesh);
  const Field only_b = delta_sigma({1.0, {b}}, mesh);
  CHECK((both.values - only_a.values - only_b.values).cwiseAbs().maxCoeff() < 1e-15);

  for (const auto& spec : {circular_phantom(), kite_phantom(), multi_bump_phantom(), PhantomSpec{1.0, {a, b}}}) {
    const Field ds = delta_sigma(spec, mesh);
    for (int j : mesh->boundary_nodes()) CHECK(ds.values[j] == 0.0);
    CHECK((rasterize(spec, mesh).values - ds.values).cwiseAbs().maxCoeff() == doctest::Approx(spec.background));
  }
}

TEST_CASE("validation") {
  CHECK_THROWS_AS(validate({1.0, {Inclusion{DiskShape{{0.9, 0.0}, 0.2}, 1.0}}}, 0.05), ConfigError);
  CHECK_THROWS_AS(validate({1.0, {Inclusion{DiskShape{{0.0, 0.0}, -0.2}, 1.0}}}, 0.05), ConfigError);
  CHECK_THROWS_AS(validate({1.0, {Inclusion{DiskShape{{0.0, 0.0}, 0.2}, 30.0}}}, 0.05), ConfigError);
  CHECK_THROWS_AS(validate({1.0, {Inclusion{DiskShape{{0.0, 0.0}, 0.2}, -0.99}}}, 0.05), ConfigError);
  CHECK_THROWS_AS(validate({0.01, {}}, 0.05), ConfigError);
  CHECK_THROWS_AS(rasterize({1.0, {Inclusion{DiskShape{{0.9, 0.0}, 0.2}, 1.0}}}, generate_disk_mesh(0.2)),
                  ConfigError);
}

TEST_CASE("shipped phantoms are admissible") {
  const auto mesh = generate_disk_mesh(0.05);
  for (const auto& spec : {circular_phantom(), kite_phantom(), multi_bump_phantom(),
                           multi_bump_phantom(BumpProfile::Quintic)}) {
    CHECK_NOTHROW(validate(spec, 0.05));
    const Field sigma = rasterize(spec, mesh);
    CHECK(sigma.values.minCoeff() >= 0.05);
    CHECK(sigma.values.maxCoeff() <= 20.0);
  }
  CHECK(rasterize(circular_phantom(), mesh).values.maxCoeff() == 5.0);
}
