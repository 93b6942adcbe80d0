#include <doctest.h>

#include "eit/fem.hpp"
#include "eit/forward_sim.hpp"
#include "helpers.hpp"

using namespace eit;

namespace {

double trapezoid_total(const Mesh& mesh, const NeumannPattern& p) {
  const Vector w = boundary_lumped_weights(mesh);
  double total = 0.0;
  for (Eigen::Index s = 0; s < w.size(); ++s) total += w[s] * p(mesh.boundary_theta()[s]);
  return total;
}

}  // namespace

TEST_CASE("pattern evaluation") {
  const auto full = BoundaryArc::whole();
  CHECK(NeumannPattern{NeumannPattern::Kind::Cosine, 3, full}(0.0) == 1.0);
  CHECK(NeumannPattern{NeumannPattern::Kind::Sine, 2, full}(0.3) == doctest::Approx(std::sin(0.6)));

  const auto upper = BoundaryArc::between(0.0, kTwoPi / 2);
  const NeumannPattern c1{NeumannPattern::Kind::Cosine, 1, upper};
  CHECK(c1(0.4) == doctest::Approx(std::cos(0.8)));
  CHECK(c1(4.0) == 0.0);

  const NeumannPattern s2{NeumannPattern::Kind::Sine, 2, BoundaryArc::between(1.0, 2.5)};
  CHECK(std::abs(s2(1.0 + 1e-12)) < 1e-10);
  CHECK(std::abs(s2(2.5 - 1e-12)) < 1e-10);

  // Whole periods on the arc: the sampled total is off only by the excluded
  // endpoint samples, and the discrete load removes the remainder exactly.
  const auto mesh = generate_disk_mesh(0.05);
  const double spacing = boundary_lumped_weights(*mesh).maxCoeff();
  for (const auto& p : default_pattern_set(upper)) {
    CAPTURE(p.name());
    CHECK(std::abs(trapezoid_total(*mesh, p)) <= spacing * (1.0 + 1e-9));
    const Vector load = pattern_load(*mesh, p);
    CHECK(std::abs(load.sum()) < 1e-12);
  }
  for (const auto& p : default_pattern_set(full)) CHECK(std::abs(trapezoid_total(*mesh, p)) < 1e-12);
}

TEST_CASE("default pattern set") {
  for (auto arc : {BoundaryArc::whole(), BoundaryArc::between(0.5, 2.0)}) {
    const auto set = default_pattern_set(arc);
    REQUIRE(set.size() == 10);
    int cos_count = 0;
    for (const auto& p : set) {
      cos_count += p.kind == NeumannPattern::Kind::Cosine;
      CHECK(p.n >= 1);
      CHECK(p.n <= 5);
      CHECK(p.arc.theta1 == arc.theta1);
      CHECK(p.arc.theta2 == arc.theta2);
    }
    CHECK(cos_count == 5);
  }
  // Partial-arc patterns vanish outside the arc.
  for (const auto& p : default_pattern_set(BoundaryArc::between(0.5, 2.0))) {
    CHECK(p(3.0) == 0.0);
    CHECK(p(0.2) == 0.0);
  }
}

TEST_CASE("normal stream") {
  NormalStream a(42, 0), b(42, 0), c(42, 1);
  double sum = 0.0, sum2 = 0.0, diff = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double x = a();
    CHECK(x == b());
    diff += std::abs(x - c());
    sum += x;
    sum2 += x * x;
  }
  CHECK(diff > 0.0);
  CHECK(std::abs(sum / n) < 0.03);
  CHECK(std::abs(sum2 / n - 1.0) < 0.03);
}

TEST_CASE("simulate") {
  const auto fine = generate_disk_mesh(0.02);
  const auto coarse = generate_disk_mesh(0.07);
  const Field one = Field::constant(fine, 1.0);

  SUBCASE("noiseless homogeneous data follow the analytic ND map") {
    const auto data = simulate(one, BoundaryArc::whole(), coarse, {0.0, 1});
    REQUIRE(data.size() == 10);
    CHECK(data.noise_std == 0.0);
    CHECK(data.theta.size() == static_cast<Eigen::Index>(coarse->boundary_nodes().size()));
    for (std::size_t k = 0; k < data.size(); ++k) {
      const auto& p = data.patterns[k];
      for (Eigen::Index s = 0; s < data.theta.size(); ++s) {
        CHECK(std::abs(data.dirichlet[k][s] - p(data.theta[s]) / p.n) < 5e-3);
      }
    }
  }
  SUBCASE("noiseless data are grounded on the measurement arc") {
    for (auto arc : {BoundaryArc::whole(), BoundaryArc::between(0.0, kTwoPi / 2)}) {
      const auto data = simulate(one, arc, coarse, {0.0, 1});
      const auto dd = discretize(data, coarse);
      for (const auto& f : dd.targets) CHECK(std::abs(dd.weights.cwiseProduct(dd.mask).dot(f)) < 1e-12);
    }
  }
  SUBCASE("noise std is eps times the largest noiseless sample") {
    const auto clean = simulate(one, BoundaryArc::whole(), coarse, {0.0, 3});
    double peak = 0.0;
    for (const auto& f : clean.dirichlet) peak = std::max(peak, f.cwiseAbs().maxCoeff());
    const auto noisy = simulate(one, BoundaryArc::whole(), coarse, {0.01, 3});
    CHECK(noisy.noise_std == doctest::Approx(0.01 * peak).epsilon(1e-14));
    double sq = 0.0;
    Eigen::Index count = 0;
    for (std::size_t k = 0; k < clean.size(); ++k) {
      sq += (noisy.dirichlet[k] - clean.dirichlet[k]).squaredNorm();
      count += clean.dirichlet[k].size();
    }
    CHECK(std::sqrt(sq / static_cast<double>(count)) == doctest::Approx(noisy.noise_std).epsilon(0.1));
  }
  SUBCASE("same seed gives bit-identical data, other seeds differ") {
    const auto a = simulate(one, BoundaryArc::whole(), coarse, {0.05, 17});
    const auto b = simulate(one, BoundaryArc::whole(), coarse, {0.05, 17});
    const auto c = simulate(one, BoundaryArc::whole(), coarse, {0.05, 18});
    for (std::size_t k = 0; k < a.size(); ++k) {
      CHECK(a.dirichlet[k] == b.dirichlet[k]);
      CHECK(a.dirichlet[k] != c.dirichlet[k]);
    }
  }
  SUBCASE("partial arcs sample only interior arc nodes") {
    const auto arc = BoundaryArc::between(1.0, 3.0);
    const auto data = simulate(one, arc, coarse, {0.01, 5});
    for (Eigen::Index s = 0; s < data.theta.size(); ++s) CHECK(arc.contains(data.theta[s]));
    CHECK(data.theta.size() == static_cast<Eigen::Index>(arc_mask(*coarse, arc).sum()));
  }
  SUBCASE("guards") {
    CHECK_THROWS_AS(simulate(Field::constant(coarse, 1.0), BoundaryArc::whole(), coarse, {0.01, 1}), ConfigError);
    SimulationOptions crime{0.01, 1, true};
    CHECK_NOTHROW(simulate(Field::constant(coarse, 1.0), BoundaryArc::whole(), coarse, crime));
    CHECK_THROWS_AS(simulate(one, BoundaryArc::whole(), coarse, {-0.1, 1}), ConfigError);
  }
}

TEST_CASE("homogeneous data leave only a discretization-level misfit at delta_gamma = 0") {
  const auto fine = generate_disk_mesh(0.02);
  const auto coarse = generate_disk_mesh(0.07);
  const auto data = simulate(Field::constant(fine, 1.0), BoundaryArc::whole(), coarse, {0.0, 1});
  const double floor = discrepancy(assemble(Field::constant(coarse, 1.0), data.arc), discretize(data, coarse));
  MESSAGE("discretization floor " << floor);
  CHECK(floor < 1e-5);
}
