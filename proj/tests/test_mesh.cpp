#include <doctest.h>

#include <map>
#include <numbers>

#include "eit/field.hpp"
#include "helpers.hpp"

using namespace eit;

namespace {

void check_valid(const Mesh& mesh) {
  CHECK(mesh.triangle_areas().minCoeff() > 0.0);

  std::map<std::pair<int, int>, int> edges;
  for (Eigen::Index t = 0; t < mesh.num_triangles(); ++t) {
    for (int k = 0; k < 3; ++k) {
      int a = mesh.triangles()(k, t), b = mesh.triangles()((k + 1) % 3, t);
      if (a > b) std::swap(a, b);
      ++edges[{a, b}];
    }
  }
  std::size_t boundary_edges = 0;
  for (const auto& [e, count] : edges) {
    CHECK(count <= 2);
    if (count == 1) {
      ++boundary_edges;
      CHECK(mesh.is_boundary(e.first));
      CHECK(mesh.is_boundary(e.second));
    }
  }
  CHECK(boundary_edges == mesh.boundary_nodes().size());

  // V - E + F = 1 for a triangulated disk.
  CHECK(mesh.num_nodes() - static_cast<Eigen::Index>(edges.size()) + mesh.num_triangles() == 1);

  const auto& theta = mesh.boundary_theta();
  for (std::size_t s = 0; s < mesh.boundary_nodes().size(); ++s) {
    CHECK(std::abs(mesh.nodes().col(mesh.boundary_nodes()[s]).norm() - 1.0) < 1e-10);
    if (s > 0) CHECK(theta[static_cast<Eigen::Index>(s)] > theta[static_cast<Eigen::Index>(s) - 1]);
  }
}

}  // namespace

TEST_CASE("generated disk meshes are valid and close to the disk") {
  for (double h : {0.5, 0.2, 0.1, 0.05}) {
    CAPTURE(h);
    const auto mesh = generate_disk_mesh(h);
    check_valid(*mesh);
    CHECK(mesh->max_edge_length() <= 1.5 * h);
  }
  const auto coarse = generate_disk_mesh(0.5);
  CHECK(coarse->num_triangles() >= 12);
  CHECK(testing::rel_err(coarse->area(), std::numbers::pi) < 0.05);
  CHECK(testing::rel_err(generate_disk_mesh(0.05)->area(), std::numbers::pi) < 0.002);
}

TEST_CASE("generate_disk_mesh rejects h outside (0, 1)") {
  CHECK_THROWS_AS(generate_disk_mesh(0.0), ConfigError);
  CHECK_THROWS_AS(generate_disk_mesh(1.0), ConfigError);
  CHECK_THROWS_AS(generate_disk_mesh(-0.1), ConfigError);
}

TEST_CASE("mesh constructor rejects broken triangulations") {
  Points P(2, 3);
  P << 1, 0, -0.5, 0, 0.8660254037844386, -0.8660254037844386;
  Triangles cw(3, 1);
  cw << 0, 2, 1;
  CHECK_THROWS_AS(Mesh(P, cw), ConfigError);
  Triangles bad(3, 1);
  bad << 0, 1, 7;
  CHECK_THROWS_AS(Mesh(P, bad), ConfigError);
}

TEST_CASE("node areas") {
  SUBCASE("sum to the mesh area") {
    for (double h : {0.3, 0.07}) {
      const auto mesh = generate_disk_mesh(h);
      CHECK(std::abs(node_areas(*mesh).sum() - mesh->area()) <= 1e-12 * mesh->area());
    }
  }
  SUBCASE("single triangle of area 0.3") {
    // Inscribed triangle (1,0), (cos phi, sin phi), (-1,0) has area sin phi.
    const double phi = std::asin(0.3);
    Points P(2, 3);
    P << 1, std::cos(phi), -1, 0, std::sin(phi), 0;
    Triangles T(3, 1);
    T << 0, 1, 2;
    const Mesh m(P, T);
    CHECK(m.area() == doctest::Approx(0.3).epsilon(1e-14));
    const Vector beta = node_areas(m);
    for (int j = 0; j < 3; ++j) CHECK(beta[j] == doctest::Approx(0.1).epsilon(1e-14));
  }
  SUBCASE("centre node shared by six equal triangles") {
    const auto mesh = generate_disk_mesh(0.2);
    const Vector beta = node_areas(*mesh);
    double a = 0.0;
    int count = 0;
    for (Eigen::Index t = 0; t < mesh->num_triangles(); ++t) {
      const auto tri = mesh->triangles().col(t);
      if (tri[0] == 0 || tri[1] == 0 || tri[2] == 0) {
        a = mesh->triangle_areas()[t];
        ++count;
      }
    }
    REQUIRE(count == 6);
    CHECK(beta[0] == doctest::Approx(2.0 * a).epsilon(1e-12));
  }
}

TEST_CASE("refine_where") {
  const auto mesh = generate_disk_mesh(0.25);
  const auto affine = [](const Mesh& m) {
    return Vector(2.0 + m.nodes().row(0).array() * 1.5 - 0.75 * m.nodes().row(1).array()).eval();
  };

  SUBCASE("uniform indicator, fraction 1 refines everything") {
    const auto ref = refine_where(*mesh, Vector::Ones(mesh->num_triangles()), 1.0);
    check_valid(*ref.mesh);
    CHECK(ref.mesh->num_triangles() >= 2 * mesh->num_triangles());
  }
  SUBCASE("zero indicator refines deterministically") {
    const Vector zero = Vector::Zero(mesh->num_triangles());
    const auto a = refine_where(*mesh, zero, 0.1);
    const auto b = refine_where(*mesh, zero, 0.1);
    check_valid(*a.mesh);
    CHECK(a.mesh->num_triangles() > mesh->num_triangles());
    CHECK(a.mesh->nodes() == b.mesh->nodes());
    CHECK(a.mesh->triangles() == b.mesh->triangles());
  }
  SUBCASE("affine fields transfer exactly, boundary stays on the circle") {
    std::mt19937_64 rng(3);
    Vector indicator = Vector::NullaryExpr(mesh->num_triangles(), [&] { return std::uniform_real_distribution<>(0, 1)(rng); });
    MeshPtr current = mesh;
    Vector values = affine(*current);
    for (int round = 0; round < 3; ++round) {
      const auto ref = refine_where(*current, indicator, 0.3);
      check_valid(*ref.mesh);
      values = ref.transfer * values;
      current = ref.mesh;
      indicator = Vector::NullaryExpr(current->num_triangles(), [&] { return std::uniform_real_distribution<>(0, 1)(rng); });
    }
    CHECK((values - affine(*current)).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("bad arguments") {
    CHECK_THROWS_AS(refine_where(*mesh, Vector::Zero(3), 0.1), ConfigError);
    CHECK_THROWS_AS(refine_where(*mesh, Vector::Zero(mesh->num_triangles()), 0.0), ConfigError);
  }
}

TEST_CASE("interpolate between meshes") {
  const auto fine = generate_disk_mesh(0.02);
  const auto coarse = generate_disk_mesh(0.07);

  SUBCASE("constants and affine fields are reproduced") {
    const Field one = interpolate(Field::constant(fine, 1.0), coarse);
    CHECK((one.values.array() - 1.0).abs().maxCoeff() < 1e-13);
    const Vector lin = (fine->nodes().row(0) + 2.0 * fine->nodes().row(1)).transpose();
    const Field moved = interpolate(Field(fine, lin), coarse);
    const Vector exact = (coarse->nodes().row(0) + 2.0 * coarse->nodes().row(1)).transpose();
    CHECK((moved.values - exact).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("r^2 from the fine mesh is accurate to O(h^2)") {
    const Vector r2 = fine->nodes().colwise().squaredNorm().transpose();
    const Field moved = interpolate(Field(fine, r2), coarse);
    const Vector exact = coarse->nodes().colwise().squaredNorm().transpose();
    CHECK((moved.values - exact).cwiseAbs().maxCoeff() < 0.01);
  }
  SUBCASE("same mesh is the identity") {
    std::mt19937_64 rng(1);
    const Field f(coarse, testing::random_interior(*coarse, rng));
    const Field once = interpolate(f, coarse);
    CHECK(once.values == f.values);
    CHECK(interpolate(once, coarse).values == f.values);
  }
}

TEST_CASE("arc masks and boundary weights") {
  const auto mesh = generate_disk_mesh(0.1);
  const auto n = static_cast<Eigen::Index>(mesh->boundary_nodes().size());
  CHECK(arc_mask(*mesh, BoundaryArc::whole()).sum() == n);

  // The ring mesh is symmetric under theta -> theta + pi and has nodes at 0 and pi.
  const Vector upper = arc_mask(*mesh, BoundaryArc::between(0.0, kTwoPi / 2));
  const Vector lower = arc_mask(*mesh, BoundaryArc::between(kTwoPi / 2, kTwoPi));
  CHECK(upper.sum() == lower.sum());
  CHECK(upper.sum() == n / 2 - 1);
  CHECK((upper + lower).maxCoeff() == 1.0);

  const Vector w = boundary_lumped_weights(*mesh);
  double perimeter = 0.0;
  for (const auto& [a, b] : mesh->boundary_edges()) perimeter += (mesh->nodes().col(a) - mesh->nodes().col(b)).norm();
  CHECK(w.sum() == doctest::Approx(perimeter).epsilon(1e-13));
}

TEST_CASE("boundary arcs") {
  CHECK(BoundaryArc::whole().full);
  CHECK(BoundaryArc::between(0.0, kTwoPi).full);
  CHECK_FALSE(BoundaryArc::between(0.0, 3.0).full);
  CHECK_THROWS_AS(BoundaryArc::between(2.0, 1.0), ConfigError);
  CHECK_THROWS_AS(BoundaryArc::between(-1.0, 1.0), ConfigError);
  const auto arc = BoundaryArc::between(1.0, 2.0);
  CHECK_FALSE(arc.contains(1.0));
  CHECK(arc.contains(1.5));
  CHECK_FALSE(arc.contains(2.0));
}

TEST_CASE("hat gradients sum to zero") {
  const auto mesh = generate_disk_mesh(0.3);
  for (Eigen::Index t = 0; t < mesh->num_triangles(); ++t) {
    CHECK(mesh->hat_gradients(t).rowwise().sum().norm() < 1e-12);
  }
}
