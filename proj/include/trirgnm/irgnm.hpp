#pragma once

#include <chrono>
#include <deque>
#include <functional>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "trirgnm/objective.hpp"

namespace trirgnm {

struct IrgnmConfig {
  double theta = 0.4;
  double Theta = 1.95;
  double tau = 1.1;
  double alpha_init = 1e-5;
  double alpha_factor = 3.0;
  int alpha_max_trials = 30;
  int inner_max_iterations = 250;
  double inner_relative_change = 1e-4;
  /// Inner stop when the projected-gradient measure falls below this fraction of its initial value.
  double inner_first_order = 1e-6;
  int max_outer_iterations = 100;
  double max_seconds = std::numeric_limits<double>::infinity();
  /// Assemble the Gauss-Newton matrix explicitly when the parameter dimension is at most this.
  int explicit_hessian_max_dim = 64;

  void validate() const;
};

/// The linearized misfit m(d) = J~(d; q, 0) around a fixed q, as seen by the inner solver.
class LinearizedMisfit {
 public:
  virtual ~LinearizedMisfit() = default;
  virtual double value(const Vector& d) = 0;
  /// Gradient at the argument of the most recent value() call.
  virtual Vector gradient() = 0;
};

/// m(d) = J + g^T d + d^T H d / 2 with explicitly assembled Gauss-Newton matrix H.
class ExplicitMisfit final : public LinearizedMisfit {
 public:
  ExplicitMisfit(double value0, Vector gradient0, DenseMatrix hessian)
      : j_(value0), g_(std::move(gradient0)), h_(std::move(hessian)) {}
  double value(const Vector& d) override {
    last_ = d;
    hd_ = h_ * d;
    return std::max(0.0, j_ + g_.dot(d) + 0.5 * d.dot(hd_));
  }
  Vector gradient() override { return g_ + hd_; }
  const DenseMatrix& hessian() const { return h_; }

 private:
  double j_;
  Vector g_;
  DenseMatrix h_;
  Vector last_;
  Vector hd_;
};

/// Matrix-free linearized misfit: one linearized primal per value, one linearized adjoint per gradient.
template <class B>
class OperatorMisfit final : public LinearizedMisfit {
 public:
  OperatorMisfit(const DiscreteModel<B>& model, const Evaluation<B>& eval) : model_(&model), eval_(&eval) {}
  double value(const Vector& d) override {
    lin_ = solve_linearized_primal(*eval_->stepper, eval_->state, d);
    return linearized_misfit(*model_, *eval_, lin_.u);
  }
  Vector gradient() override {
    const Trajectory adj = solve_linearized_adjoint(*eval_->stepper, eval_->state, lin_);
    return gradient_from_adjoint(*model_, eval_->state, adj);
  }

 private:
  const DiscreteModel<B>* model_;
  const Evaluation<B>* eval_;
  Trajectory lin_;
};

/// Gauss-Newton matrix dt sum_k S_k^T Q S_k from one linearized solve per parameter direction.
template <class B>
DenseMatrix gauss_newton_matrix(const DiscreteModel<B>& model, const Evaluation<B>& eval) {
  const auto n = model.param_dim();
  std::vector<DenseMatrix> sens(n);
  for (Eigen::Index j = 0; j < n; ++j)
    sens[j] = solve_linearized_primal(*eval.stepper, eval.state, Vector::Unit(n, j)).u;
  DenseMatrix h = DenseMatrix::Zero(n, n);
  DenseMatrix s(model.state_dim(), n);
  for (int k = 1; k <= model.steps(); ++k) {
    for (Eigen::Index j = 0; j < n; ++j) s.col(j) = sens[j].col(k);
    const DenseMatrix qs = model.misfit * s;
    h.noalias() += model.dt() * s.transpose() * qs;
  }
  return 0.5 * (h + h.transpose());
}

template <class B>
std::unique_ptr<LinearizedMisfit> make_linearized_misfit(const DiscreteModel<B>& model, const Evaluation<B>& eval,
                                                         const Vector& gradient, const IrgnmConfig& config) {
  if (model.param_dim() <= config.explicit_hessian_max_dim)
    return std::make_unique<ExplicitMisfit>(eval.value, gradient, gauss_newton_matrix(model, eval));
  return std::make_unique<OperatorMisfit<B>>(model, eval);
}

struct SubproblemResult {
  Vector d;
  double objective = 0.0;  // J~(d; q, alpha)
  double misfit = 0.0;     // J~(d; q, 0)
  int iterations = 0;
  double first_order = 0.0;
};

/// Projected gradient with alternating Barzilai-Borwein steps and a nonmonotone Armijo safeguard
/// for  min_d m(d) + alpha/2 |q + d - q_o|^2  subject to  q + d admissible.
SubproblemResult solve_subproblem(LinearizedMisfit& misfit, const Vector& q, const Vector& reg_center, double alpha,
                                  const std::function<Vector(const Vector&)>& project, const IrgnmConfig& config);

struct AlphaSelection {
  double alpha = 0.0;
  SubproblemResult sub;
  int trials = 0;
  int inner_iterations = 0;
  /// 2 J~(d; q, 0) / J(q); the sandwich requires theta <= ratio <= Theta.
  double ratio = 0.0;
};

/// Searches alpha, starting at alpha_prev, until theta J <= 2 J~(d; q, 0) <= Theta J.
/// Throws SolverError if no admissible alpha is found within the trial budget.
AlphaSelection select_alpha(LinearizedMisfit& misfit, const Vector& q, double value, const Vector& reg_center,
                            double alpha_prev, const std::function<Vector(const Vector&)>& project,
                            const IrgnmConfig& config);

struct IrgnmRecord {
  int iteration = 0;
  double value = 0.0;  // J at the iterate the step starts from
  double alpha = 0.0;
  int alpha_trials = 0;
  int inner_iterations = 0;
  double step_norm = 0.0;
  double ratio = 0.0;
  double seconds = 0.0;
};

struct IrgnmResult {
  Vector q;
  double value = 0.0;
  double alpha = 0.0;
  std::vector<IrgnmRecord> ledger;
  std::vector<double> accepted_values;  // J at every iterate, including the start
  bool converged = false;
  bool stagnated = false;
  bool failed = false;
  std::string message;
  int total_inner_iterations = 0;
};

void write_irgnm_ledger_csv(std::ostream& out, const std::vector<IrgnmRecord>& ledger);

/// Outer IRGNM loop with discrepancy-principle stopping J(q) <= (tau delta)^2 / 2.
template <class B>
IrgnmResult irgnm_run(const DiscreteModel<B>& model, const Vector& q0, double delta, const IrgnmConfig& config,
                      double alpha0 = -1.0) {
  config.validate();
  require(model.admissible(q0), "irgnm_run: start is not admissible");
  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(); };
  const double target = 0.5 * (config.tau * delta) * (config.tau * delta);

  IrgnmResult res;
  res.alpha = alpha0 > 0.0 ? alpha0 : config.alpha_init;
  res.q = q0;
  auto eval = eval_objective(model, q0);
  res.value = eval.value;
  res.accepted_values.push_back(eval.value);
  int flat = 0;
  for (int it = 0;; ++it) {
    if (res.value <= target) {
      res.converged = true;
      break;
    }
    if (it >= config.max_outer_iterations || elapsed() > config.max_seconds) {
      res.message = "iteration or time budget exhausted";
      break;
    }
    const Vector g = eval_gradient(model, eval);
    auto misfit = make_linearized_misfit(model, eval, g, config);
    AlphaSelection sel;
    try {
      sel = select_alpha(*misfit, res.q, res.value, model.reg_center, res.alpha, model.project, config);
    } catch (const SolverError& e) {
      res.failed = true;
      res.message = e.what();
      break;
    }
    IrgnmRecord rec{it, res.value, sel.alpha, sel.trials, sel.inner_iterations, sel.sub.d.norm(), sel.ratio, 0.0};
    res.total_inner_iterations += sel.inner_iterations;
    res.alpha = sel.alpha;
    res.q = model.project(res.q + sel.sub.d);
    require(model.admissible(res.q), "irgnm_run: iterate left the admissible set");
    eval = eval_objective(model, res.q);
    const double previous = res.value;
    res.value = eval.value;
    res.accepted_values.push_back(res.value);
    rec.seconds = elapsed();
    res.ledger.push_back(rec);
    flat = (previous - res.value) < 1e-12 * previous ? flat + 1 : 0;
    if (flat >= 3) {
      res.stagnated = true;
      res.message = "stagnation before reaching the discrepancy level";
      break;
    }
  }
  return res;
}

}  // namespace trirgnm
