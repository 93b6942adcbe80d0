#include "eit/cauchy_data.hpp"

#include <algorithm>
#include <cmath>

#include "eit/fem.hpp"

namespace eit {

double NeumannPattern::operator()(double theta) const {
  double phase;
  if (arc.full) {
    phase = n * theta;
  } else {
    if (!arc.contains(theta)) return 0.0;
    phase = kTwoPi * n * (theta - arc.theta1) / arc.length();
  }
  return kind == Kind::Cosine ? std::cos(phase) : std::sin(phase);
}

std::string NeumannPattern::name() const {
  return std::string(kind == Kind::Cosine ? "cos" : "sin") + std::to_string(n);
}

Vector pattern_load(const Mesh& mesh, const NeumannPattern& pattern) {
  const auto& theta = mesh.boundary_theta();
  const Vector mask = arc_mask(mesh, pattern.arc);
  const Vector w = boundary_lumped_weights(mesh);
  Vector g(theta.size());
  for (Eigen::Index s = 0; s < theta.size(); ++s) g[s] = pattern(theta[s]);
  const double support = w.dot(mask);
  if (!(support > 0.0)) throw ConfigError("pattern arc contains no boundary nodes");
  g -= (w.dot(g) / support) * mask;
  return boundary_load(mesh, g);
}

double interpolate_samples(const Vector& theta, const Vector& values, double t, bool periodic) {
  const auto n = theta.size();
  if (n == 0) throw ConfigError("no samples to interpolate");
  if (n == 1) return values[0];
  const auto* begin = theta.data();
  const auto* it = std::upper_bound(begin, begin + n, t);
  const auto hi = static_cast<Eigen::Index>(it - begin);
  if (hi == 0 || hi == n) {
    if (!periodic) return hi == 0 ? values[0] : values[n - 1];
    const double t0 = theta[n - 1], t1 = theta[0] + kTwoPi;
    const double tt = hi == 0 ? t + kTwoPi : t;
    const double a = (tt - t0) / (t1 - t0);
    return (1.0 - a) * values[n - 1] + a * values[0];
  }
  const double a = (t - theta[hi - 1]) / (theta[hi] - theta[hi - 1]);
  return (1.0 - a) * values[hi - 1] + a * values[hi];
}

DiscreteData discretize(const CauchyDataSet& data, const MeshPtr& mesh) {
  if (data.patterns.empty()) throw ConfigError("data set has no patterns");
  if (data.dirichlet.size() != data.patterns.size()) throw ConfigError("pattern and Dirichlet counts differ");
  for (const auto& f : data.dirichlet) {
    if (f.size() != data.theta.size()) throw ConfigError("Dirichlet sample count differs from theta count");
    if (!f.allFinite()) throw ConfigError("Dirichlet samples must be finite");
  }

  DiscreteData out;
  out.mesh = mesh;
  out.arc = data.arc;
  out.mask = arc_mask(*mesh, data.arc);
  out.weights = boundary_lumped_weights(*mesh);

  const auto& theta = mesh->boundary_theta();
  const auto nb = theta.size();
  std::vector<Eigen::Index> sample_of(static_cast<std::size_t>(nb), -1);
  Eigen::Index matched = 0;
  for (Eigen::Index s = 0; s < nb; ++s) {
    if (out.mask[s] == 0.0) continue;
    const auto* begin = data.theta.data();
    const auto* end = begin + data.theta.size();
    const auto* it = std::lower_bound(begin, end, theta[s] - 1e-9);
    if (it != end && std::abs(*it - theta[s]) <= 1e-9) {
      sample_of[static_cast<std::size_t>(s)] = it - begin;
      ++matched;
    }
  }
  if (matched != data.theta.size()) {
    throw ConfigError("data samples do not match the mesh boundary nodes on the arc");
  }

  for (std::size_t k = 0; k < data.size(); ++k) {
    if (!(data.patterns[k].arc.full == data.arc.full && data.patterns[k].arc.theta1 == data.arc.theta1 &&
          data.patterns[k].arc.theta2 == data.arc.theta2)) {
      throw ConfigError("pattern arc differs from the data arc");
    }
    out.loads.push_back(pattern_load(*mesh, data.patterns[k]));
    Vector f = Vector::Zero(nb);
    for (Eigen::Index s = 0; s < nb; ++s) {
      if (out.mask[s] == 0.0) continue;
      const auto j = sample_of[static_cast<std::size_t>(s)];
      f[s] = j >= 0 ? data.dirichlet[k][j]
                    : interpolate_samples(data.theta, data.dirichlet[k], theta[s], data.arc.full);
    }
    out.targets.push_back(std::move(f));
  }
  return out;
}

}  // namespace eit
