#include <doctest.h>

#include "eit/fem.hpp"
#include "eit/forward_sim.hpp"
#include "eit/phantoms.hpp"
#include "eit/tv_recon.hpp"
#include "helpers.hpp"

using namespace eit;

TEST_CASE("tv penalty values") {
  const auto mesh = generate_disk_mesh(0.1);
  const double alpha = 2e-3, b = 1e-5;
  CHECK(tv_penalty(Field::constant(mesh, 0.0), alpha, b) == doctest::Approx(alpha * std::sqrt(b) * mesh->area()).epsilon(1e-13));
  CHECK(tv_penalty(Field::constant(mesh, 3.0), alpha, b) == doctest::Approx(alpha * std::sqrt(b) * mesh->area()).epsilon(1e-13));

  std::mt19937_64 rng(4);
  const Field f(mesh, testing::random_interior(*mesh, rng));
  CHECK(tv_penalty(f, alpha, b) > alpha * std::sqrt(b) * mesh->area());

  // Nearly 1-homogeneous as b vanishes.
  const double tiny = 1e-14;
  for (double t : {1.0, 2.0, 7.5}) {
    const Field ft(mesh, t * f.values);
    CHECK(tv_penalty(ft, alpha, tiny) == doctest::Approx(t * tv_penalty(f, alpha, tiny)).epsilon(1e-9));
  }
}

TEST_CASE("tv penalty on a single triangle") {
  // Triangle (1,0), (0,1), (-1,0) has area 1; the hat of (1,0) is (x - y + 1)/2.
  Points P(2, 3);
  P << 1, 0, -1, 0, 1, 0;
  Triangles T(3, 1);
  T << 0, 1, 2;
  const auto mesh = std::make_shared<const Mesh>(P, T);
  const Field hat(mesh, Eigen::Vector3d(1.0, 0.0, 0.0));
  CHECK(tv_penalty(hat, 0.5, 1e-5) == doctest::Approx(0.5 * std::sqrt(0.5 + 1e-5)).epsilon(1e-14));
  CHECK(tv_penalty(hat, 0.5, 0.0) == doctest::Approx(0.5 * std::sqrt(0.5)).epsilon(1e-14));
}

TEST_CASE("tv gradient") {
  const auto mesh = generate_disk_mesh(0.1);
  const double alpha = 1e-3, b = 1e-5;
  CHECK(tv_gradient(Field::constant(mesh, 0.0), alpha, b).coeffs.isZero(0.0));

  SUBCASE("matches central differences of the penalty") {
    std::mt19937_64 rng(12);
    const Field f(mesh, testing::smooth_interior(*mesh, {0.2, -0.1}, 0.5, 2.0) + testing::random_interior(*mesh, rng, 0.05));
    const double t = 1e-5;
    const Vector g = tv_gradient(f, alpha, b).coeffs;
    for (int k = 0; k < 3; ++k) {
      const Vector eta = testing::random_interior(*mesh, rng);
      const double fd = (tv_penalty(Field(mesh, f.values + t * eta), alpha, b) -
                         tv_penalty(Field(mesh, f.values - t * eta), alpha, b)) /
                        (2.0 * t);
      CHECK(testing::rel_err(g.dot(eta), fd) < 1e-6);
    }
  }
  SUBCASE("constant gradient magnitude gives a scaled stiffness action") {
    const Vector affine = (0.6 * mesh->nodes().row(0) - 0.8 * mesh->nodes().row(1)).transpose();
    const Field f(mesh, affine);
    const SparseMatrix K = weighted_stiffness(*mesh, Vector::Ones(mesh->num_triangles()));
    const Vector expected = alpha / std::sqrt(1.0 + b) * (K * affine);
    CHECK((tv_gradient(f, alpha, b).coeffs - expected).norm() < 1e-13 * expected.norm());
  }
}

TEST_CASE("tv reconstruction") {
  const auto fine = generate_disk_mesh(0.04);
  const auto mesh = generate_disk_mesh(0.1);
  const Field sigma0 = Field::constant(mesh, 1.0);

  SUBCASE("homogeneous noiseless data stay near zero") {
    const auto data = simulate(Field::constant(fine, 1.0), BoundaryArc::whole(), mesh, {0.0, 1});
    const auto r = reconstruct_tv(data, mesh, sigma0, TVConfig{});
    CHECK(r.delta_gamma.values.cwiseAbs().maxCoeff() < 1e-2);
  }
  SUBCASE("iterates stay admissible and respect weak monotonicity") {
    const auto data = simulate(rasterize(circular_phantom(), fine), BoundaryArc::between(0.0, kTwoPi / 2), mesh, {0.01, 2});
    TVConfig config;
    config.descent.max_iters = 30;
    const auto r = reconstruct_tv(data, mesh, sigma0, config);
    const Vector sigma = r.sigma0.values + r.delta_gamma.values;
    CHECK(sigma.minCoeff() >= config.descent.c);
    CHECK(sigma.maxCoeff() <= 1.0 / config.descent.c);
    for (int j : mesh->boundary_nodes()) CHECK(r.delta_gamma.values[j] == 0.0);
    REQUIRE(!r.log.empty());
    for (const auto& rec : r.log) CHECK(rec.psi <= rec.psi_reference - config.descent.tau / (2.0 * rec.step) * rec.step_norm_sq);
    CHECK(r.log.back().psi < r.log.front().psi);
  }
  SUBCASE("config validation") {
    TVConfig c;
    c.b = 0.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = {};
    c.alpha = 0.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
  }
}
