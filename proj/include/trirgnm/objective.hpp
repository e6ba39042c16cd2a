#pragma once

#include <algorithm>
#include <memory>

#include "trirgnm/timestep.hpp"

namespace trirgnm {

/// State solve at one parameter, kept together with the factorization that produced it.
template <class B>
struct Evaluation {
  std::shared_ptr<const Stepper<B>> stepper;
  Trajectory state;
  DenseMatrix residual;  // misfit_residual(model, state.u)
  double value = 0.0;    // J(q)

  const Vector& parameter() const { return stepper->parameter(); }
};

/// J from the quadratic/linear/constant split: c1 + dt sum_k (u^T Q u / 2 - u^T C^T M_C y^k).
template <class B>
double misfit_value(const DiscreteModel<B>& model, const DenseMatrix& u) {
  double s = 0.0;
  for (int k = 1; k <= model.steps(); ++k) {
    const Vector qu = model.misfit * u.col(k);
    s += 0.5 * u.col(k).dot(qu) - u.col(k).dot(model.misfit_data.col(k));
  }
  return std::max(0.0, model.data_energy + model.dt() * s);
}

template <class B>
Evaluation<B> eval_objective(const DiscreteModel<B>& model, const Vector& q) {
  require(q.size() == model.param_dim(), "eval_objective: parameter length mismatch");
  require(!model.admissible || model.admissible(q), "eval_objective: parameter is not admissible");
  Evaluation<B> e;
  e.stepper = std::make_shared<const Stepper<B>>(model, q);
  e.state = solve_primal(*e.stepper);
  e.residual = misfit_residual(model, e.state.u);
  e.value = misfit_value(model, e.state.u);
  return e;
}

/// dt sum_k B(u^{k-1+zeta})^T lambda^k with lambda^k stored in adjoint column k-1.
template <class B>
Vector gradient_from_adjoint(const DiscreteModel<B>& model, const Trajectory& state, const Trajectory& adjoint) {
  typename B::Family::BilinearAccumulator acc(model.family);
  const double z = model.time.zeta;
  for (int k = 1; k <= model.steps(); ++k) acc.add(adjoint.u.col(k - 1), intermediate(state, k, z), model.dt());
  return acc.contract();
}

template <class B>
Vector eval_gradient(const DiscreteModel<B>& model, const Evaluation<B>& eval, Trajectory* adjoint_out = nullptr) {
  Trajectory adjoint = solve_adjoint(*eval.stepper, eval.state);
  Vector g = gradient_from_adjoint(model, eval.state, adjoint);
  if (adjoint_out) *adjoint_out = std::move(adjoint);
  return g;
}

/// Misfit part of the linearization, J~(d; q, 0), given u_lin = S'(q) d.
template <class B>
double linearized_misfit(const DiscreteModel<B>& model, const Evaluation<B>& eval, const DenseMatrix& u_lin) {
  double s = 0.0;
  for (int k = 1; k <= model.steps(); ++k) {
    const Vector qu = model.misfit * u_lin.col(k);
    s += 0.5 * u_lin.col(k).dot(qu) - u_lin.col(k).dot(eval.residual.col(k));
  }
  return std::max(0.0, eval.value + model.dt() * s);
}

template <class B>
double tikhonov(const DiscreteModel<B>& model, const Vector& q, const Vector& d, double alpha) {
  return 0.5 * alpha * (q + d - model.reg_center).squaredNorm();
}

template <class B>
double eval_linearized_objective(const DiscreteModel<B>& model, const Evaluation<B>& eval, const Vector& d,
                                 double alpha, const Trajectory& lin_state) {
  require(alpha >= 0.0, "eval_linearized_objective: alpha must be nonnegative");
  return linearized_misfit(model, eval, lin_state.u) + tikhonov(model, eval.parameter(), d, alpha);
}

template <class B>
Vector eval_linearized_gradient(const DiscreteModel<B>& model, const Evaluation<B>& eval, const Vector& d,
                                double alpha, const Trajectory& lin_state) {
  const Trajectory lin_adjoint = solve_linearized_adjoint(*eval.stepper, eval.state, lin_state);
  return gradient_from_adjoint(model, eval.state, lin_adjoint) + alpha * (eval.parameter() + d - model.reg_center);
}

}  // namespace trirgnm
