#include <doctest.h>

#include "eit/forward_sim.hpp"
#include "eit/phantoms.hpp"
#include "eit/sparsity_recon.hpp"
#include "helpers.hpp"

using namespace eit;

namespace {

PriorMask disk_prior(double dilation) {
  Region r;
  r.disks.push_back({{0.3, 0.2}, 0.3});
  PriorMask p;
  p.region = r;
  p.dilation = dilation;
  return p;
}

}  // namespace

TEST_CASE("mu_field") {
  const auto mesh = generate_disk_mesh(0.05);
  CHECK((mu_field(PriorMask{}, mesh).values.array() == 1.0).all());

  const Field mu0 = mu_field(disk_prior(0.0), mesh);
  const Field mu25 = mu_field(disk_prior(0.25), mesh);
  int inside0 = 0, inside25 = 0;
  for (Eigen::Index j = 0; j < mesh->num_nodes(); ++j) {
    const double d = (mesh->nodes().col(j) - Eigen::Vector2d(0.3, 0.2)).norm();
    if (std::abs(d - 0.3) > 1e-12) CHECK(mu0.values[j] == (d < 0.3 ? 1e-2 : 1.0));
    if (mu0.values[j] == 1e-2) {
      ++inside0;
      CHECK(mu25.values[j] == 1e-2);
    }
    inside25 += mu25.values[j] == 1e-2;
  }
  CHECK(inside0 > 0);
  CHECK(inside25 > inside0);

  CHECK_THROWS_AS(mu_field(disk_prior(-1.0), mesh), ConfigError);
  CHECK_THROWS_AS(mu_field(disk_prior(-1.5), mesh), ConfigError);
  PriorMask bad = disk_prior(0.0);
  bad.mu_in = 0.0;
  CHECK_THROWS_AS(mu_field(bad, mesh), ConfigError);
  bad.mu_in = 1.5;
  CHECK_THROWS_AS(mu_field(bad, mesh), ConfigError);
}

TEST_CASE("region geometry") {
  Points square(2, 4);
  square << 0, 0.2, 0.2, 0, 0, 0, 0.2, 0.2;
  CHECK((polygon_centroid(square) - Eigen::Vector2d(0.1, 0.1)).norm() < 1e-15);
  Region r;
  r.polygons.push_back(square);
  r.disks.push_back({{-0.5, 0.0}, 0.1});
  CHECK(r.contains({0.1, 0.1}));
  CHECK(r.contains({-0.5, 0.05}));
  CHECK_FALSE(r.contains({0.3, 0.1}));
  const Region big = r.scaled(2.0);
  CHECK(big.contains({0.25, 0.1}));
  CHECK(big.contains({-0.5, 0.15}));
  CHECK_FALSE(big.contains({0.35, 0.1}));
}

TEST_CASE("alpha weights") {
  const auto mesh = generate_disk_mesh(0.1);
  const Vector beta = node_areas(*mesh);
  const Vector ones = Vector::Ones(mesh->num_nodes());
  CHECK((alpha_weights(1e-3, ones, beta) - 1e-3 * beta).cwiseAbs().maxCoeff() == 0.0);
  const Vector half = alpha_weights(1e-3, ones, Vector(0.5 * beta));
  CHECK((half - 0.5 * alpha_weights(1e-3, ones, beta)).cwiseAbs().maxCoeff() < 1e-18);
  CHECK(alpha_weights(1e-3, mu_field(disk_prior(0.0), mesh).values, beta).minCoeff() > 0.0);
  CHECK_THROWS_AS(alpha_weights(0.0, ones, beta), ConfigError);

  SparsityPenalty penalty(2e-3, PriorMask{});
  penalty.bind(mesh);
  CHECK(penalty.value(Vector::Ones(mesh->num_nodes())) == doctest::Approx(2e-3 * mesh->area()).epsilon(1e-13));
}

TEST_CASE("penalty is nearly mesh independent") {
  const auto spec = circular_phantom();
  double prev = 0.0;
  for (double h : {0.06, 0.03}) {
    const auto mesh = generate_disk_mesh(h);
    SparsityPenalty penalty(1e-3, PriorMask{});
    penalty.bind(mesh);
    const double v = penalty.value(delta_sigma(spec, mesh).values);
    if (prev > 0.0) CHECK(testing::rel_err(v, prev) < 0.05);
    prev = v;
  }
}

TEST_CASE("mu = 1 reduces to the no-prior run") {
  const auto fine = generate_disk_mesh(0.04);
  const auto mesh = generate_disk_mesh(0.1);
  const auto data = simulate(rasterize(circular_phantom(), fine), BoundaryArc::whole(), mesh, {0.01, 3});
  ReconConfig plain;
  plain.descent.max_iters = 15;
  ReconConfig unit = plain;
  unit.prior = disk_prior(0.0);
  unit.prior.mu_in = 1.0;
  const Field sigma0 = Field::constant(mesh, 1.0);
  const auto a = reconstruct(data, mesh, sigma0, plain);
  const auto b = reconstruct(data, mesh, sigma0, unit);
  REQUIRE(a.log.size() == b.log.size());
  CHECK(a.delta_gamma.values == b.delta_gamma.values);
  for (std::size_t i = 0; i < a.log.size(); ++i) CHECK(a.log[i].psi == b.log[i].psi);
}
