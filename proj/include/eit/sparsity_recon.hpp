#pragma once

#include <concepts>
#include <functional>
#include <span>
#include <string>

#include "eit/cauchy_data.hpp"
#include "eit/fem.hpp"
#include "eit/priors.hpp"

namespace eit {

/// sign(x) max(|x| - beta, 0).
template <std::floating_point Scalar>
Scalar soft_threshold(Scalar x, Scalar beta) {
  const Scalar mag = std::abs(x) - beta;
  if (mag <= Scalar(0)) return Scalar(0);
  return x < Scalar(0) ? -mag : mag;
}

/// Coefficient-wise soft thresholding.
template <class XDerived, class BetaDerived>
Eigen::Array<typename XDerived::Scalar, Eigen::Dynamic, 1> soft_threshold(const Eigen::ArrayBase<XDerived>& x,
                                                                          const Eigen::ArrayBase<BetaDerived>& beta) {
  return x.sign() * (x.abs() - beta).max(typename XDerived::Scalar(0));
}

/// Truncates sigma0 + zeta into [c, 1/c] and subtracts sigma0 again.
template <class ZetaDerived, class SigmaDerived>
Vector project_A0(const Eigen::MatrixBase<ZetaDerived>& zeta, const Eigen::MatrixBase<SigmaDerived>& sigma0, double c) {
  return (sigma0 + zeta).cwiseMax(c).cwiseMin(1.0 / c) - sigma0;
}

/// Exact integrals of the hat functions (row sums of the mass matrix).
Vector hat_l1_norms(const Mesh& mesh);

/// Per-node shrinkage threshold s * alpha_j / ||psi_j||_L1.
template <class AlphaDerived, class NormDerived>
Vector effective_thresholds(double step, const Eigen::MatrixBase<AlphaDerived>& alpha_weights,
                            const Eigen::MatrixBase<NormDerived>& psi_l1) {
  return step * alpha_weights.cwiseQuotient(psi_l1);
}

/// Soft-thresholded gradient step on the hat-basis coefficients. Boundary
/// nodes are held at zero.
Vector fem_update(const Mesh& mesh, const Vector& delta_gamma, const Vector& gradient, double step,
                  const Vector& alpha_weights, const Vector& psi_l1);

struct StepBounds {
  double s_min = 1.0;
  double s_max = 1000.0;
};

/// Barzilai-Borwein step ||dx||^2 / <dx, dg> in the H^1 metric, clamped to
/// [s_min, s_max]; s_max when the denominator is numerically zero.
double bb_step(const H1Metric& metric, const Vector& dx, const Vector& dgrad, const StepBounds& bounds);
double bb_step(double dx_norm_sq, double dx_dot_dgrad, const StepBounds& bounds);

/// psi_new <= max(history) - tau / (2 s) * step_diff_sq.
bool weak_monotonicity_ok(double psi_new, std::span<const double> history, double step, double step_diff_sq,
                          double tau);

struct RefinementSchedule {
  bool enabled = false;
  double fraction = 0.1;
  int every = 10;
  int max_rounds = 3;
};

/// Parameters shared by the sparsity and TV descents.
struct DescentParams {
  double c = 0.05;
  double s_min = 1.0;
  double s_max = 1000.0;
  double s_stop = 1e-3;
  int memory = 5;
  double tau = 1e-5;
  int max_iters = 1000;
  RefinementSchedule refinement;

  void validate() const;
};

struct ReconConfig {
  double alpha = 1e-3;
  PriorMask prior;
  DescentParams descent;

  void validate() const;
};

struct IterationRecord {
  int iteration = 0;
  double psi = 0.0;
  double discrepancy = 0.0;
  double penalty = 0.0;
  double step = 0.0;
  int backtracks = 0;
  Eigen::Index nnz = 0;
  Eigen::Index nodes = 0;
  /// max of the Psi history the step was compared against.
  double psi_reference = 0.0;
  /// ||delta_gamma_{i+1} - delta_gamma_i||^2 in H^1.
  double step_norm_sq = 0.0;
};

enum class Termination { StepBelowStop, MaxIterations, Stationary, NonFinite };

std::string to_string(Termination t);

struct ReconResult {
  Field delta_gamma;
  Field sigma0;
  std::vector<IterationRecord> log;
  Termination termination = Termination::MaxIterations;
  int refinements = 0;
  double final_step = 0.0;
};

/// Penalty-specific parts of the projected descent.
class PenaltyModel {
 public:
  virtual ~PenaltyModel() = default;
  /// Recomputes mesh-dependent weights.
  virtual void bind(const MeshPtr& mesh) = 0;
  virtual double value(const Vector& delta_gamma) const = 0;
  /// Adds the derivative of a smooth penalty to the dual vector.
  virtual void add_derivative(const Vector& delta_gamma, Vector& dual) const;
  /// Trial point before projection.
  virtual Vector proposal(const Vector& delta_gamma, const Vector& gradient, double step) const = 0;
};

/// Shared loop: Sobolev gradient, BB step, weak-monotone backtracking,
/// projection onto the admissible set, optional refinement.
ReconResult run_descent(const CauchyDataSet& data, const MeshPtr& mesh, const Field& sigma0,
                        const DescentParams& params, PenaltyModel& penalty);

/// Weighted l1 penalty sum_j alpha beta_j mu_j |delta_gamma(x_j)|.
class SparsityPenalty final : public PenaltyModel {
 public:
  SparsityPenalty(double alpha, PriorMask prior);
  void bind(const MeshPtr& mesh) override;
  double value(const Vector& delta_gamma) const override;
  Vector proposal(const Vector& delta_gamma, const Vector& gradient, double step) const override;

  const Vector& alpha_weights() const { return alpha_w_; }
  const Vector& psi_l1() const { return psi_l1_; }

 private:
  double alpha_;
  PriorMask prior_;
  MeshPtr mesh_;
  Vector alpha_w_;
  Vector psi_l1_;
};

/// Sparsity-regularized reconstruction starting from delta_gamma = 0.
ReconResult reconstruct(const CauchyDataSet& data, const MeshPtr& mesh, const Field& sigma0,
                        const ReconConfig& config);

struct FieldMetrics {
  double sigma_E = 0.0;
  double sigma_max = 0.0;
};

/// Mean of sigma over the triangles whose centroid lies in E (all of the mesh
/// when E is empty) and the nodal maximum of |sigma|.
FieldMetrics metrics(const Field& sigma, const std::function<bool(const Eigen::Vector2d&)>& region = {});

/// Jaccard index of the nodes with delta_gamma above half its maximum and the
/// nodes inside the phantom's inclusions; 1 when both sets are empty.
double support_overlap(const Field& delta_gamma, const PhantomSpec& phantom);

/// Region covering the supports of the phantom's inclusions.
Region phantom_region(const PhantomSpec& phantom);

struct SweepRow {
  double delta_r = 0.0;
  bool prior = true;
  double sigma_B = 0.0;
  double sigma_max = 0.0;
  Termination termination = Termination::MaxIterations;
  int iterations = 0;
};

/// One reconstruction per dilation with prior region (1 + dr) * support of
/// the phantom; sigma_B is the mean over the true support. With
/// `include_no_prior` a final row uses mu = 1.
std::vector<SweepRow> delta_r_sweep(const PhantomSpec& phantom, const CauchyDataSet& data, const MeshPtr& mesh,
                                    const Field& sigma0, const ReconConfig& config,
                                    const std::vector<double>& delta_rs, bool include_no_prior = false);

std::string sweep_csv(const std::vector<SweepRow>& rows);

}  // namespace eit
