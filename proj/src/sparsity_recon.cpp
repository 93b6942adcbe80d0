#include "eit/sparsity_recon.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <limits>

#include "eit/phantoms.hpp"

namespace eit {

Vector hat_l1_norms(const Mesh& mesh) { return mass_matrix(mesh) * Vector::Ones(mesh.num_nodes()); }

Vector fem_update(const Mesh& mesh, const Vector& delta_gamma, const Vector& gradient, double step,
                  const Vector& alpha_weights, const Vector& psi_l1) {
  const Vector trial = delta_gamma - step * gradient;
  const Vector thresholds = effective_thresholds(step, alpha_weights, psi_l1);
  Vector zeta = soft_threshold(trial.array(), thresholds.array()).matrix();
  for (int b : mesh.boundary_nodes()) zeta[b] = 0.0;
  return zeta;
}

double bb_step(double dx_norm_sq, double dx_dot_dgrad, const StepBounds& bounds) {
  if (std::abs(dx_dot_dgrad) < 1e-14 * dx_norm_sq || dx_norm_sq == 0.0) return bounds.s_max;
  return std::clamp(dx_norm_sq / dx_dot_dgrad, bounds.s_min, bounds.s_max);
}

double bb_step(const H1Metric& metric, const Vector& dx, const Vector& dgrad, const StepBounds& bounds) {
  return bb_step(metric.norm_sq(dx), metric.inner(dx, dgrad), bounds);
}

bool weak_monotonicity_ok(double psi_new, std::span<const double> history, double step, double step_diff_sq,
                          double tau) {
  if (history.empty()) return true;
  const double ref = *std::max_element(history.begin(), history.end());
  return psi_new <= ref - tau / (2.0 * step) * step_diff_sq;
}

void DescentParams::validate() const {
  if (!(c > 0.0 && c < 1.0)) throw ConfigError("admissibility constant c must lie in (0, 1)");
  if (!(s_min > 0.0 && s_min <= s_max)) throw ConfigError("step bounds need 0 < s_min <= s_max");
  if (!(s_stop > 0.0)) throw ConfigError("s_stop must be positive");
  if (memory < 1) throw ConfigError("monotonicity memory M must be at least 1");
  if (!(tau > 0.0 && tau < 1.0)) throw ConfigError("tau must lie in (0, 1)");
  if (max_iters < 1) throw ConfigError("max_iters must be positive");
  if (refinement.enabled) {
    if (!(refinement.fraction > 0.0 && refinement.fraction <= 1.0)) {
      throw ConfigError("refinement fraction must lie in (0, 1]");
    }
    if (refinement.every < 1 || refinement.max_rounds < 0) throw ConfigError("invalid refinement schedule");
  }
}

void ReconConfig::validate() const {
  if (!(alpha > 0.0)) throw ConfigError("alpha must be positive");
  prior.validate();
  descent.validate();
}

std::string to_string(Termination t) {
  switch (t) {
    case Termination::StepBelowStop: return "step_below_stop";
    case Termination::MaxIterations: return "max_iterations";
    case Termination::Stationary: return "stationary";
    case Termination::NonFinite: return "non_finite";
  }
  return "unknown";
}

void PenaltyModel::add_derivative(const Vector&, Vector&) const {}

namespace {

struct Evaluation {
  std::shared_ptr<StiffnessSystem> system;
  ForwardState forward;
  double discrepancy = 0.0;
  double penalty = 0.0;
  double psi = std::numeric_limits<double>::infinity();
};

Vector gradient_indicator(const Mesh& mesh, const Vector& values) {
  return triangle_gradients(mesh, values).colwise().norm().transpose();
}

}  // namespace

ReconResult run_descent(const CauchyDataSet& data, const MeshPtr& initial_mesh, const Field& sigma0_in,
                        const DescentParams& params, PenaltyModel& penalty) {
  params.validate();
  const double c = params.c;
  const StepBounds bounds{params.s_min, params.s_max};

  MeshPtr mesh = initial_mesh;
  Field sigma0 = sigma0_in.mesh == mesh ? sigma0_in : interpolate(sigma0_in, mesh);
  if (sigma0.values.minCoeff() < c || sigma0.values.maxCoeff() > 1.0 / c) {
    throw ConfigError("background conductivity outside [c, 1/c]");
  }

  DiscreteData dd = discretize(data, mesh);
  auto metric = std::make_unique<H1Metric>(mesh);
  penalty.bind(mesh);

  auto evaluate = [&](const Vector& x) {
    Evaluation e;
    try {
      e.system = std::make_shared<StiffnessSystem>(assemble(Field(mesh, sigma0.values + x), dd.arc, c));
      e.forward = solve_forward(*e.system, dd);
    } catch (const NumericalError&) {
      return e;
    }
    e.discrepancy = e.forward.discrepancy;
    e.penalty = penalty.value(x);
    e.psi = e.discrepancy + e.penalty;
    return e;
  };

  ReconResult result;
  Vector x = Vector::Zero(mesh->num_nodes());
  Evaluation current = evaluate(x);
  if (!std::isfinite(current.psi)) {
    result.delta_gamma = Field(mesh, x);
    result.sigma0 = sigma0;
    result.termination = Termination::NonFinite;
    return result;
  }

  std::deque<double> history;
  std::vector<double> window;
  bool have_previous = false;
  Vector prev_x, prev_grad;
  result.termination = Termination::MaxIterations;

  for (int i = 0; i < params.max_iters; ++i) {
    const auto& sched = params.refinement;
    if (sched.enabled && i > 0 && i % sched.every == 0 && result.refinements < sched.max_rounds) {
      const auto ref = refine_where(*mesh, gradient_indicator(*mesh, x), sched.fraction);
      mesh = ref.mesh;
      x = ref.transfer * x;
      for (int b : mesh->boundary_nodes()) x[b] = 0.0;
      sigma0 = interpolate(sigma0_in, mesh);
      x = project_A0(x, sigma0.values, c);
      dd = discretize(data, mesh);
      metric = std::make_unique<H1Metric>(mesh);
      penalty.bind(mesh);
      // Gradients and objective values on the old mesh are not comparable.
      have_previous = false;
      history.clear();
      current = evaluate(x);
      ++result.refinements;
      if (!std::isfinite(current.psi)) {
        result.termination = Termination::NonFinite;
        break;
      }
    }

    history.push_back(current.psi);
    while (static_cast<int>(history.size()) > params.memory) history.pop_front();
    window.assign(history.begin(), history.end());

    DualVector dual = assemble_R_prime(*current.system, dd, current.forward);
    penalty.add_derivative(x, dual.coeffs);
    const Vector grad = metric->riesz(dual).values;
    if (!grad.allFinite()) {
      result.termination = Termination::NonFinite;
      break;
    }

    double s = have_previous ? bb_step(*metric, x - prev_x, grad - prev_grad, bounds) : params.s_min;
    int backtracks = 0;
    bool accepted = false;
    Vector trial_x;
    Evaluation trial;
    double step_sq = 0.0;
    while (true) {
      trial_x = project_A0(penalty.proposal(x, grad, s), sigma0.values, c);
      trial = evaluate(trial_x);
      step_sq = metric->norm_sq(trial_x - x);
      if (std::isfinite(trial.psi) && weak_monotonicity_ok(trial.psi, window, s, step_sq, params.tau)) {
        accepted = true;
        break;
      }
      s *= 0.5;
      ++backtracks;
      if (s < params.s_stop) break;
    }
    result.final_step = s;
    if (!accepted) {
      result.termination = Termination::StepBelowStop;
      break;
    }

    IterationRecord rec;
    rec.iteration = i;
    rec.psi = trial.psi;
    rec.discrepancy = trial.discrepancy;
    rec.penalty = trial.penalty;
    rec.step = s;
    rec.backtracks = backtracks;
    rec.nnz = (trial_x.array() != 0.0).count();
    rec.nodes = mesh->num_nodes();
    rec.psi_reference = *std::max_element(window.begin(), window.end());
    rec.step_norm_sq = step_sq;
    result.log.push_back(rec);

    prev_x = std::move(x);
    prev_grad = grad;
    have_previous = true;
    x = std::move(trial_x);
    current = std::move(trial);
    if (step_sq == 0.0) {
      result.termination = Termination::Stationary;
      break;
    }
  }

  result.delta_gamma = Field(mesh, std::move(x));
  result.sigma0 = std::move(sigma0);
  return result;
}

SparsityPenalty::SparsityPenalty(double alpha, PriorMask prior) : alpha_(alpha), prior_(std::move(prior)) {
  if (!(alpha_ > 0.0)) throw ConfigError("alpha must be positive");
  prior_.validate();
}

void SparsityPenalty::bind(const MeshPtr& mesh) {
  mesh_ = mesh;
  alpha_w_ = eit::alpha_weights(alpha_, mu_field(prior_, mesh).values, node_areas(*mesh));
  psi_l1_ = hat_l1_norms(*mesh);
}

double SparsityPenalty::value(const Vector& delta_gamma) const { return alpha_w_.dot(delta_gamma.cwiseAbs()); }

Vector SparsityPenalty::proposal(const Vector& delta_gamma, const Vector& gradient, double step) const {
  return fem_update(*mesh_, delta_gamma, gradient, step, alpha_w_, psi_l1_);
}

ReconResult reconstruct(const CauchyDataSet& data, const MeshPtr& mesh, const Field& sigma0,
                        const ReconConfig& config) {
  config.validate();
  SparsityPenalty penalty(config.alpha, config.prior);
  return run_descent(data, mesh, sigma0, config.descent, penalty);
}

FieldMetrics metrics(const Field& sigma, const std::function<bool(const Eigen::Vector2d&)>& region) {
  const Mesh& mesh = *sigma.mesh;
  const Vector avg = triangle_average(mesh, sigma.values);
  const auto& T = mesh.triangles();
  double integral = 0.0, area = 0.0;
  for (Eigen::Index t = 0; t < T.cols(); ++t) {
    if (region) {
      const Eigen::Vector2d centroid =
          (mesh.nodes().col(T(0, t)) + mesh.nodes().col(T(1, t)) + mesh.nodes().col(T(2, t))) / 3.0;
      if (!region(centroid)) continue;
    }
    integral += mesh.triangle_areas()[t] * avg[t];
    area += mesh.triangle_areas()[t];
  }
  FieldMetrics m;
  m.sigma_E = area > 0.0 ? integral / area : std::numeric_limits<double>::quiet_NaN();
  m.sigma_max = sigma.values.cwiseAbs().maxCoeff();
  return m;
}

double support_overlap(const Field& delta_gamma, const PhantomSpec& phantom) {
  const Mesh& mesh = *delta_gamma.mesh;
  const double peak = delta_gamma.values.maxCoeff();
  Eigen::Index both = 0, either = 0;
  for (Eigen::Index i = 0; i < mesh.num_nodes(); ++i) {
    const bool a = peak > 0.0 && delta_gamma.values[i] > 0.5 * peak;
    bool b = false;
    for (const auto& inc : phantom.inclusions) b = b || inside(inc, mesh.nodes().col(i));
    both += a && b;
    either += a || b;
  }
  return either == 0 ? 1.0 : static_cast<double>(both) / static_cast<double>(either);
}

Region phantom_region(const PhantomSpec& phantom) {
  Region r;
  for (const auto& inc : phantom.inclusions) {
    if (const auto* d = std::get_if<DiskShape>(&inc.shape)) {
      r.disks.push_back({d->center, d->radius});
    } else if (const auto* b = std::get_if<BumpShape>(&inc.shape)) {
      r.disks.push_back({b->center, b->radius});
    } else if (const auto* k = std::get_if<KiteShape>(&inc.shape)) {
      r.polygons.push_back(kite_outline(*k));
    }
  }
  return r;
}

std::vector<SweepRow> delta_r_sweep(const PhantomSpec& phantom, const CauchyDataSet& data, const MeshPtr& mesh,
                                    const Field& sigma0, const ReconConfig& config,
                                    const std::vector<double>& delta_rs, bool include_no_prior) {
  const Region support = phantom_region(phantom);
  auto in_support = [&](const Eigen::Vector2d& x) { return support.contains(x); };

  auto run = [&](const ReconConfig& cfg, double dr, bool prior) {
    const auto res = reconstruct(data, mesh, sigma0, cfg);
    const Field sigma(res.delta_gamma.mesh, res.sigma0.values + res.delta_gamma.values);
    const auto m = metrics(sigma, in_support);
    return SweepRow{dr, prior, m.sigma_E, m.sigma_max, res.termination, static_cast<int>(res.log.size())};
  };

  std::vector<SweepRow> rows;
  for (double dr : delta_rs) {
    ReconConfig cfg = config;
    cfg.prior.region = support;
    cfg.prior.dilation = dr;
    rows.push_back(run(cfg, dr, true));
  }
  if (include_no_prior) {
    ReconConfig cfg = config;
    cfg.prior.region.reset();
    cfg.prior.dilation = 0.0;
    rows.push_back(run(cfg, 0.0, false));
  }
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out = "delta_r,prior,sigma_B,sigma_max,termination,iterations\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%d,%.17g,%.17g,%s,%d\n", r.delta_r, r.prior ? 1 : 0, r.sigma_B,
                  r.sigma_max, to_string(r.termination).c_str(), r.iterations);
    out += buf;
  }
  return out;
}

}  // namespace eit
