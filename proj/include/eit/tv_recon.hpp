#pragma once

#include "eit/sparsity_recon.hpp"

namespace eit {

struct TVConfig {
  double alpha = 1e-3;
  /// Smoothing constant inside the square root.
  double b = 1e-5;
  DescentParams descent;

  void validate() const;
};

/// alpha * sum_T |T| sqrt(|grad delta_gamma|_T^2 + b).
double tv_penalty(const Field& delta_gamma, double alpha, double b);

/// Derivative of tv_penalty on the hat basis:
/// sum_T alpha |T| grad(delta_gamma) . grad(psi_j) / sqrt(|grad delta_gamma|^2 + b).
DualVector tv_gradient(const Field& delta_gamma, double alpha, double b);

class TVPenalty final : public PenaltyModel {
 public:
  TVPenalty(double alpha, double b);
  void bind(const MeshPtr& mesh) override;
  double value(const Vector& delta_gamma) const override;
  void add_derivative(const Vector& delta_gamma, Vector& dual) const override;
  Vector proposal(const Vector& delta_gamma, const Vector& gradient, double step) const override;

 private:
  double alpha_, b_;
  MeshPtr mesh_;
};

/// Projected Sobolev-gradient descent on discrepancy + smoothed TV, with the
/// same step control as the sparsity reconstruction.
ReconResult reconstruct_tv(const CauchyDataSet& data, const MeshPtr& mesh, const Field& sigma0,
                           const TVConfig& config);

}  // namespace eit
