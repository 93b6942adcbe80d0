#include "eit/tv_recon.hpp"

#include <cmath>

namespace eit {

void TVConfig::validate() const {
  if (!(alpha > 0.0)) throw ConfigError("TV alpha must be positive");
  if (!(b > 0.0)) throw ConfigError("TV smoothing constant b must be positive");
  descent.validate();
}

namespace {

Vector smoothed_magnitude(const Mesh& mesh, const Vector& values, double b) {
  return (triangle_gradients(mesh, values).colwise().squaredNorm().array() + b).sqrt().matrix().transpose();
}

}  // namespace

double tv_penalty(const Field& delta_gamma, double alpha, double b) {
  const Mesh& mesh = *delta_gamma.mesh;
  return alpha * mesh.triangle_areas().dot(smoothed_magnitude(mesh, delta_gamma.values, b));
}

DualVector tv_gradient(const Field& delta_gamma, double alpha, double b) {
  const Mesh& mesh = *delta_gamma.mesh;
  const Vector weights = alpha * smoothed_magnitude(mesh, delta_gamma.values, b).cwiseInverse();
  return {delta_gamma.mesh, weighted_stiffness(mesh, weights) * delta_gamma.values};
}

TVPenalty::TVPenalty(double alpha, double b) : alpha_(alpha), b_(b) {
  if (!(alpha_ > 0.0 && b_ > 0.0)) throw ConfigError("TV penalty needs alpha > 0 and b > 0");
}

void TVPenalty::bind(const MeshPtr& mesh) { mesh_ = mesh; }

double TVPenalty::value(const Vector& delta_gamma) const {
  return tv_penalty(Field(mesh_, delta_gamma), alpha_, b_);
}

void TVPenalty::add_derivative(const Vector& delta_gamma, Vector& dual) const {
  dual += tv_gradient(Field(mesh_, delta_gamma), alpha_, b_).coeffs;
}

Vector TVPenalty::proposal(const Vector& delta_gamma, const Vector& gradient, double step) const {
  Vector trial = delta_gamma - step * gradient;
  for (int b : mesh_->boundary_nodes()) trial[b] = 0.0;
  return trial;
}

ReconResult reconstruct_tv(const CauchyDataSet& data, const MeshPtr& mesh, const Field& sigma0,
                           const TVConfig& config) {
  config.validate();
  TVPenalty penalty(config.alpha, config.b);
  return run_descent(data, mesh, sigma0, config.descent, penalty);
}

}  // namespace eit
