#include "eit/field.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace eit {

namespace {

double segment_distance(const Eigen::Vector2d& x, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  const Eigen::Vector2d d = b - a;
  const double t = std::clamp((x - a).dot(d) / d.squaredNorm(), 0.0, 1.0);
  return (x - (a + t * d)).norm();
}

// Uniform bucket grid over [-1, 1]^2 (slightly padded) for point location.
class TriangleLocator {
 public:
  explicit TriangleLocator(const Mesh& mesh) : mesh_(mesh) {
    const double cell = std::max(1e-3, std::sqrt(mesh.area() / static_cast<double>(mesh.num_triangles())) * 1.5);
    n_ = std::max(1, static_cast<int>(std::ceil(2.0 * kPad / cell)));
    width_ = 2.0 * kPad / n_;
    buckets_.assign(static_cast<std::size_t>(n_) * n_, {});
    const auto& P = mesh.nodes();
    const auto& T = mesh.triangles();
    for (Eigen::Index t = 0; t < T.cols(); ++t) {
      Eigen::Vector2d lo = P.col(T(0, t)), hi = lo;
      for (int k = 1; k < 3; ++k) {
        lo = lo.cwiseMin(P.col(T(k, t)));
        hi = hi.cwiseMax(P.col(T(k, t)));
      }
      const int i0 = cell_index(lo.x()), i1 = cell_index(hi.x());
      const int j0 = cell_index(lo.y()), j1 = cell_index(hi.y());
      for (int i = i0; i <= i1; ++i)
        for (int j = j0; j <= j1; ++j) buckets_[bucket(i, j)].push_back(static_cast<int>(t));
    }
  }

  Eigen::Vector3d barycentric(int t, const Eigen::Vector2d& x) const {
    const auto G = mesh_.hat_gradients(t);
    const Eigen::Vector2d p0 = mesh_.nodes().col(mesh_.triangles()(0, t));
    Eigen::Vector3d lam;
    lam[1] = G.col(1).dot(x - p0);
    lam[2] = G.col(2).dot(x - p0);
    lam[0] = 1.0 - lam[1] - lam[2];
    return lam;
  }

  double distance(int t, const Eigen::Vector2d& x) const {
    if (barycentric(t, x).minCoeff() >= 0.0) return 0.0;
    const auto& P = mesh_.nodes();
    const auto& T = mesh_.triangles();
    double d = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 3; ++k) d = std::min(d, segment_distance(x, P.col(T(k, t)), P.col(T((k + 1) % 3, t))));
    return d;
  }

  // Containing triangle, or the one whose closure is nearest to x.
  int locate(const Eigen::Vector2d& x) const {
    const int ci = cell_index(x.x()), cj = cell_index(x.y());
    for (int t : buckets_[bucket(ci, cj)]) {
      if (barycentric(t, x).minCoeff() >= -1e-12) return t;
    }
    int best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (int ring = 1; ring <= 2; ++ring) {
      for (int i = ci - ring; i <= ci + ring; ++i) {
        for (int j = cj - ring; j <= cj + ring; ++j) {
          if (i < 0 || j < 0 || i >= n_ || j >= n_) continue;
          for (int t : buckets_[bucket(i, j)]) consider(t, x, best, best_d);
        }
      }
      if (best >= 0 && best_d < (ring - 0.5) * width_) return best;
    }
    for (Eigen::Index t = 0; t < mesh_.num_triangles(); ++t) consider(static_cast<int>(t), x, best, best_d);
    return best;
  }

 private:
  static constexpr double kPad = 1.05;

  void consider(int t, const Eigen::Vector2d& x, int& best, double& best_d) const {
    const double d = distance(t, x);
    if (d < best_d || (d == best_d && t < best)) {
      best = t;
      best_d = d;
    }
  }
  int cell_index(double v) const { return std::clamp(static_cast<int>((v + kPad) / width_), 0, n_ - 1); }
  std::size_t bucket(int i, int j) const { return static_cast<std::size_t>(i) * n_ + j; }

  const Mesh& mesh_;
  int n_ = 1;
  double width_ = 1.0;
  std::vector<std::vector<int>> buckets_;
};

double evaluate_with(const TriangleLocator& loc, const Field& field, const Eigen::Vector2d& x) {
  const int t = loc.locate(x);
  const auto lam = loc.barycentric(t, x);
  const auto& T = field.mesh->triangles();
  return lam[0] * field.values[T(0, t)] + lam[1] * field.values[T(1, t)] + lam[2] * field.values[T(2, t)];
}

}  // namespace

Field interpolate(const Field& field, const MeshPtr& target) {
  if (!field.mesh || !target) throw ConfigError("interpolate needs both meshes");
  if (field.mesh == target) return field;
  const auto& Q = target->nodes();
  for (Eigen::Index i = 0; i < Q.cols(); ++i) {
    if (Q.col(i).norm() > 1.0 + 1e-8) throw ConfigError("target mesh leaves the unit disk");
  }
  const TriangleLocator loc(*field.mesh);
  Vector out(Q.cols());
  for (Eigen::Index i = 0; i < Q.cols(); ++i) out[i] = evaluate_with(loc, field, Q.col(i));
  return Field(target, std::move(out));
}

double evaluate_at(const Field& field, const Eigen::Vector2d& point) {
  const TriangleLocator loc(*field.mesh);
  return evaluate_with(loc, field, point);
}

}  // namespace eit
