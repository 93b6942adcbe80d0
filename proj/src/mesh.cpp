#include "eit/mesh.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <string>

namespace eit {

namespace {

struct EdgeRecord {
  int a, b;  // a < b
  int tri;
  int local;  // local index of the opposite vertex
};

std::vector<EdgeRecord> sorted_edge_records(const Triangles& tris) {
  std::vector<EdgeRecord> recs;
  recs.reserve(3 * tris.cols());
  for (Eigen::Index t = 0; t < tris.cols(); ++t) {
    for (int k = 0; k < 3; ++k) {
      int a = tris((k + 1) % 3, t), b = tris((k + 2) % 3, t);
      if (a > b) std::swap(a, b);
      recs.push_back({a, b, static_cast<int>(t), k});
    }
  }
  std::sort(recs.begin(), recs.end(), [](const EdgeRecord& x, const EdgeRecord& y) {
    return std::tie(x.a, x.b, x.tri) < std::tie(y.a, y.b, y.tri);
  });
  return recs;
}

double signed_area(const Points& p, int i, int j, int k) {
  const Eigen::Vector2d u = p.col(j) - p.col(i);
  const Eigen::Vector2d v = p.col(k) - p.col(i);
  return 0.5 * (u.x() * v.y() - u.y() * v.x());
}

}  // namespace

double polar_angle(double x, double y) {
  double t = std::atan2(y, x);
  if (t < 0.0) t += kTwoPi;
  if (t >= kTwoPi) t -= kTwoPi;
  return t;
}

BoundaryArc BoundaryArc::between(double theta1, double theta2) {
  if (!(theta1 >= 0.0 && theta1 < theta2 && theta2 <= kTwoPi + 1e-12)) {
    throw ConfigError("boundary arc requires 0 <= theta1 < theta2 <= 2*pi");
  }
  BoundaryArc arc;
  arc.theta1 = theta1;
  arc.theta2 = std::min(theta2, kTwoPi);
  arc.full = (arc.theta2 - arc.theta1) >= kTwoPi - 1e-12;
  if (arc.full) {
    arc.theta1 = 0.0;
    arc.theta2 = kTwoPi;
  }
  return arc;
}

bool BoundaryArc::contains(double theta) const {
  if (full) return true;
  return theta > theta1 + kBoundaryTol && theta < theta2 - kBoundaryTol;
}

Mesh::Mesh(Points nodes, Triangles triangles)
    : nodes_(std::move(nodes)), triangles_(std::move(triangles)) {
  const auto n = nodes_.cols();
  if (n < 3 || triangles_.cols() < 1) throw ConfigError("empty mesh");
  if (triangles_.minCoeff() < 0 || triangles_.maxCoeff() >= n) {
    throw ConfigError("triangle references a missing node");
  }

  areas_.resize(triangles_.cols());
  for (Eigen::Index t = 0; t < triangles_.cols(); ++t) {
    const double a = signed_area(nodes_, triangles_(0, t), triangles_(1, t), triangles_(2, t));
    if (!(a > 0.0)) {
      throw ConfigError("triangle " + std::to_string(t) + " has non-positive signed area");
    }
    areas_[t] = a;
  }

  // Edge manifoldness; boundary edges are used exactly once.
  const auto recs = sorted_edge_records(triangles_);
  on_boundary_.assign(n, 0);
  std::vector<std::array<int, 2>> bedges;
  for (std::size_t i = 0; i < recs.size();) {
    std::size_t j = i;
    while (j < recs.size() && recs[j].a == recs[i].a && recs[j].b == recs[i].b) ++j;
    const auto count = j - i;
    if (count > 2) throw ConfigError("edge shared by more than two triangles");
    if (count == 1) {
      // Orient along the triangle so the boundary runs counterclockwise.
      const auto& r = recs[i];
      const int u = triangles_((r.local + 1) % 3, r.tri);
      const int v = triangles_((r.local + 2) % 3, r.tri);
      bedges.push_back({u, v});
      on_boundary_[u] = on_boundary_[v] = 1;
    }
    i = j;
  }
  if (bedges.size() < 3) throw ConfigError("mesh has no closed boundary");

  for (Eigen::Index i = 0; i < n; ++i) {
    if (on_boundary_[i] && std::abs(nodes_.col(i).norm() - 1.0) > kBoundaryTol) {
      throw ConfigError("boundary node " + std::to_string(i) + " is off the unit circle");
    }
  }

  for (Eigen::Index i = 0; i < n; ++i) {
    if (on_boundary_[i]) boundary_.push_back(static_cast<int>(i));
  }
  std::vector<double> theta(n, 0.0);
  for (int b : boundary_) theta[b] = polar_angle(nodes_(0, b), nodes_(1, b));
  std::sort(boundary_.begin(), boundary_.end(), [&](int x, int y) {
    return theta[x] < theta[y] || (theta[x] == theta[y] && x < y);
  });

  boundary_slot_.assign(n, -1);
  boundary_theta_.resize(static_cast<Eigen::Index>(boundary_.size()));
  for (std::size_t s = 0; s < boundary_.size(); ++s) {
    boundary_slot_[boundary_[s]] = static_cast<int>(s);
    boundary_theta_[static_cast<Eigen::Index>(s)] = theta[boundary_[s]];
  }

  // The angularly sorted node list must coincide with the boundary cycle.
  if (bedges.size() != boundary_.size()) throw ConfigError("boundary is not a single closed polygon");
  std::vector<int> next(n, -1);
  for (const auto& e : bedges) {
    if (next[e[0]] != -1) throw ConfigError("boundary node with two outgoing edges");
    next[e[0]] = e[1];
  }
  const auto nb = boundary_.size();
  for (std::size_t s = 0; s < nb; ++s) {
    const int u = boundary_[s];
    const int v = boundary_[(s + 1) % nb];
    if (next[u] != v) throw ConfigError("boundary nodes are not angularly ordered");
    boundary_edges_.emplace_back(u, v);
  }
}

Eigen::Matrix<double, 2, 3> Mesh::hat_gradients(Eigen::Index t) const {
  const Eigen::Vector2d p0 = nodes_.col(triangles_(0, t));
  const Eigen::Vector2d p1 = nodes_.col(triangles_(1, t));
  const Eigen::Vector2d p2 = nodes_.col(triangles_(2, t));
  const double two_area = 2.0 * areas_[t];
  Eigen::Matrix<double, 2, 3> g;
  // grad(lambda_k) = rot90(edge opposite k) / (2|T|)
  g.col(0) << p1.y() - p2.y(), p2.x() - p1.x();
  g.col(1) << p2.y() - p0.y(), p0.x() - p2.x();
  g.col(2) << p0.y() - p1.y(), p1.x() - p0.x();
  return g / two_area;
}

double Mesh::max_edge_length() const {
  double m = 0.0;
  for (Eigen::Index t = 0; t < triangles_.cols(); ++t) {
    for (int k = 0; k < 3; ++k) {
      const double len = (nodes_.col(triangles_(k, t)) - nodes_.col(triangles_((k + 1) % 3, t))).norm();
      m = std::max(m, len);
    }
  }
  return m;
}

MeshPtr generate_disk_mesh(double h) {
  if (!(h > 0.0 && h < 1.0)) throw ConfigError("mesh size h must lie in (0, 1)");
  const int rings = static_cast<int>(std::ceil(1.0 / h - 1e-12));

  // Ring k carries 6k equally spaced nodes at radius k/rings.
  std::vector<int> first(rings + 1);
  int count = 1;
  for (int k = 1; k <= rings; ++k) {
    first[k] = count;
    count += 6 * k;
  }
  Points nodes(2, count);
  nodes.col(0).setZero();
  for (int k = 1; k <= rings; ++k) {
    const double r = (k == rings) ? 1.0 : static_cast<double>(k) / rings;
    for (int i = 0; i < 6 * k; ++i) {
      const double t = kTwoPi * i / (6.0 * k);
      nodes.col(first[k] + i) << r * std::cos(t), r * std::sin(t);
    }
  }

  std::vector<std::array<int, 3>> tris;
  for (int i = 0; i < 6; ++i) tris.push_back({0, first[1] + i, first[1] + (i + 1) % 6});

  for (int k = 2; k <= rings; ++k) {
    const int n_in = 6 * (k - 1), n_out = 6 * k;
    auto in = [&](int i) { return first[k - 1] + i % n_in; };
    auto out = [&](int j) { return first[k] + j % n_out; };
    int i = 0, j = 0;
    while (i < n_in || j < n_out) {
      // Close the strip with the shorter of the two candidate diagonals.
      bool advance_out = i == n_in;
      if (i < n_in && j < n_out) {
        advance_out = (nodes.col(in(i)) - nodes.col(out(j + 1))).squaredNorm() <=
                      (nodes.col(in(i + 1)) - nodes.col(out(j))).squaredNorm();
      }
      if (advance_out) {
        tris.push_back({in(i), out(j), out(j + 1)});
        ++j;
      } else {
        tris.push_back({in(i), out(j), in(i + 1)});
        ++i;
      }
    }
  }

  Triangles t(3, static_cast<Eigen::Index>(tris.size()));
  for (std::size_t c = 0; c < tris.size(); ++c) {
    t.col(static_cast<Eigen::Index>(c)) << tris[c][0], tris[c][1], tris[c][2];
  }
  return std::make_shared<const Mesh>(std::move(nodes), std::move(t));
}

Vector node_areas(const Mesh& mesh) {
  Vector beta = Vector::Zero(mesh.num_nodes());
  const auto& tris = mesh.triangles();
  const auto& area = mesh.triangle_areas();
  for (Eigen::Index t = 0; t < tris.cols(); ++t) {
    for (int k = 0; k < 3; ++k) beta[tris(k, t)] += area[t] / 3.0;
  }
  return beta;
}

Vector arc_mask(const Mesh& mesh, const BoundaryArc& arc) {
  const auto& theta = mesh.boundary_theta();
  Vector w(theta.size());
  for (Eigen::Index s = 0; s < theta.size(); ++s) w[s] = arc.contains(theta[s]) ? 1.0 : 0.0;
  return w;
}

Vector boundary_lumped_weights(const Mesh& mesh) {
  const auto& edges = mesh.boundary_edges();
  const auto nb = static_cast<Eigen::Index>(edges.size());
  Vector w = Vector::Zero(nb);
  for (Eigen::Index s = 0; s < nb; ++s) {
    const auto [u, v] = edges[static_cast<std::size_t>(s)];
    const double half = 0.5 * (mesh.nodes().col(u) - mesh.nodes().col(v)).norm();
    w[s] += half;
    w[(s + 1) % nb] += half;
  }
  return w;
}

Refinement refine_where(const Mesh& mesh, const Vector& indicator, double fraction) {
  const auto nt = mesh.num_triangles();
  if (nt == 0) throw ConfigError("cannot refine an empty mesh");
  if (indicator.size() != nt) throw ConfigError("refinement indicator needs one value per triangle");
  if (!(fraction > 0.0 && fraction <= 1.0)) throw ConfigError("refinement fraction must lie in (0, 1]");

  const auto& P = mesh.nodes();
  const auto& T = mesh.triangles();

  // Unique edges and the triangle-to-edge map (edge k is opposite vertex k).
  const auto recs = sorted_edge_records(T);
  std::vector<std::array<int, 2>> edges;
  std::vector<int> edge_uses;
  Eigen::Matrix3Xi tri_edge(3, nt);
  for (std::size_t i = 0; i < recs.size();) {
    std::size_t j = i;
    while (j < recs.size() && recs[j].a == recs[i].a && recs[j].b == recs[i].b) ++j;
    const int e = static_cast<int>(edges.size());
    edges.push_back({recs[i].a, recs[i].b});
    edge_uses.push_back(static_cast<int>(j - i));
    for (std::size_t k = i; k < j; ++k) tri_edge(recs[k].local, recs[k].tri) = e;
    i = j;
  }
  auto edge_length = [&](int e) { return (P.col(edges[e][0]) - P.col(edges[e][1])).norm(); };

  std::vector<int> longest(nt);
  for (Eigen::Index t = 0; t < nt; ++t) {
    int best = 0;
    for (int k = 1; k < 3; ++k) {
      if (edge_length(tri_edge(k, t)) > edge_length(tri_edge(best, t))) best = k;
    }
    longest[t] = best;
  }

  std::vector<int> order(nt);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return indicator[a] > indicator[b]; });
  const auto n_mark = std::clamp<Eigen::Index>(
      static_cast<Eigen::Index>(std::ceil(fraction * static_cast<double>(nt) - 1e-9)), 1, nt);

  std::vector<char> marked(edges.size(), 0);
  for (Eigen::Index m = 0; m < n_mark; ++m) {
    const int t = order[m];
    marked[tri_edge(longest[t], t)] = 1;
  }
  // Closure: any triangle with a marked edge must have its longest edge marked.
  for (bool changed = true; changed;) {
    changed = false;
    for (Eigen::Index t = 0; t < nt; ++t) {
      const int le = tri_edge(longest[t], t);
      if (marked[le]) continue;
      if (marked[tri_edge(0, t)] || marked[tri_edge(1, t)] || marked[tri_edge(2, t)]) {
        marked[le] = 1;
        changed = true;
      }
    }
  }

  // Midpoint nodes; boundary midpoints are pushed out onto the circle.
  const auto n_old = mesh.num_nodes();
  std::vector<int> midpoint(edges.size(), -1);
  std::vector<Eigen::Vector2d> new_points;
  std::vector<Eigen::Triplet<double>> transfer;
  for (Eigen::Index i = 0; i < n_old; ++i) transfer.emplace_back(static_cast<int>(i), static_cast<int>(i), 1.0);

  // For boundary edges we need the owning triangle to extend affinely.
  std::vector<int> owner(edges.size(), -1);
  for (Eigen::Index t = 0; t < nt; ++t) {
    for (int k = 0; k < 3; ++k) owner[tri_edge(k, t)] = static_cast<int>(t);
  }

  int next_id = static_cast<int>(n_old);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    if (!marked[e]) continue;
    const auto [a, b] = edges[e];
    Eigen::Vector2d m = 0.5 * (P.col(a) + P.col(b));
    midpoint[e] = next_id;
    if (edge_uses[e] == 1) {
      m /= m.norm();
      // Barycentric coordinates of the snapped point in the owning triangle.
      const int t = owner[e];
      const auto G = mesh.hat_gradients(t);
      const Eigen::Vector2d p0 = P.col(T(0, t));
      Eigen::Vector3d lam;
      lam[1] = G.col(1).dot(m - p0);
      lam[2] = G.col(2).dot(m - p0);
      lam[0] = 1.0 - lam[1] - lam[2];
      for (int k = 0; k < 3; ++k) transfer.emplace_back(next_id, T(k, t), lam[k]);
    } else {
      transfer.emplace_back(next_id, a, 0.5);
      transfer.emplace_back(next_id, b, 0.5);
    }
    new_points.push_back(m);
    ++next_id;
  }

  std::vector<std::array<int, 3>> out;
  out.reserve(static_cast<std::size_t>(nt) * 2);
  for (Eigen::Index t = 0; t < nt; ++t) {
    const int L = longest[t];
    const int p = (L + 1) % 3, q = (L + 2) % 3;
    const int vL = T(L, t), vp = T(p, t), vq = T(q, t);
    if (!marked[tri_edge(L, t)]) {
      out.push_back({vL, vp, vq});
      continue;
    }
    const int m = midpoint[tri_edge(L, t)];
    // Edge L-p is opposite q; edge q-L is opposite p.
    if (marked[tri_edge(q, t)]) {
      const int mp = midpoint[tri_edge(q, t)];
      out.push_back({vL, mp, m});
      out.push_back({mp, vp, m});
    } else {
      out.push_back({vL, vp, m});
    }
    if (marked[tri_edge(p, t)]) {
      const int mq = midpoint[tri_edge(p, t)];
      out.push_back({vL, m, mq});
      out.push_back({mq, m, vq});
    } else {
      out.push_back({vL, m, vq});
    }
  }

  Points nodes(2, next_id);
  nodes.leftCols(n_old) = P;
  for (std::size_t i = 0; i < new_points.size(); ++i) {
    nodes.col(n_old + static_cast<Eigen::Index>(i)) = new_points[i];
  }
  Triangles tris(3, static_cast<Eigen::Index>(out.size()));
  for (std::size_t c = 0; c < out.size(); ++c) {
    tris.col(static_cast<Eigen::Index>(c)) << out[c][0], out[c][1], out[c][2];
  }

  SparseMatrix prolong(next_id, n_old);
  prolong.setFromTriplets(transfer.begin(), transfer.end());
  return {std::make_shared<const Mesh>(std::move(nodes), std::move(tris)), std::move(prolong)};
}

}  // namespace eit
