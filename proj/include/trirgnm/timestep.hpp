#pragma once

#include "trirgnm/discrete_model.hpp"
#include "trirgnm/errors.hpp"

namespace trirgnm {

/// Displacement and velocity columns for t^0..t^K.
///
/// Adjoint trajectories are stored shifted: column c holds the multiplier of step c+1, so
/// column K is the zero terminal condition.
struct Trajectory {
  DenseMatrix u;
  DenseMatrix v;
};

/// Factorization of S(q) = rho M_H + zeta^2 dt^2 A(q), shared by all four systems at one q.
template <class B>
class Stepper {
 public:
  using Matrix = typename B::Matrix;

  Stepper(const DiscreteModel<B>& model, const Vector& q)
      : model_(&model), q_(q), stiffness_(model.family.evaluate(q)) {
    const double z = model.time.zeta;
    const double dt = model.dt();
    require(z >= 0.5 && z <= 1.0, "stepper: zeta must lie in [1/2, 1]");
    const Matrix s = model.mass + (z * z * dt * dt) * stiffness_;
    factor_.compute(s);
    if (factor_.info() != Eigen::Success) throw SolverError("stepper: S(q) is not positive definite");
    ++model.counter->factorizations;
  }

  const DiscreteModel<B>& model() const { return *model_; }
  const Vector& parameter() const { return q_; }
  const Matrix& stiffness() const { return stiffness_; }

  /// One step of the zeta-scheme from (u_prev, v_prev) with combined source r.
  /// Solves for the intermediate displacement w = u^{k-1+zeta} and recovers u^k, v^k from it.
  void step(const Vector& u_prev, const Vector& v_prev, const Vector& r, Eigen::Ref<Vector> u,
            Eigen::Ref<Vector> v) const {
    const double z = model_->time.zeta;
    const double dt = model_->dt();
    Vector rhs = model_->mass * (u_prev + (z * dt) * v_prev);
    rhs.noalias() += (z * z * dt * dt) * r;
    const Vector w = factor_.solve(rhs);
    u = (w - (1.0 - z) * u_prev) / z;
    v = ((u - u_prev) / dt - (1.0 - z) * v_prev) / z;
  }

 private:
  const DiscreteModel<B>* model_;
  Vector q_;
  Matrix stiffness_;
  typename B::Factor factor_;
};

/// u^{k-1+zeta} = zeta u^k + (1 - zeta) u^{k-1}.
inline Vector intermediate(const Trajectory& t, int k, double zeta) {
  return zeta * t.u.col(k) + (1.0 - zeta) * t.u.col(k - 1);
}

namespace detail {

template <class B, class Source>
Trajectory march_forward(const Stepper<B>& stepper, const Vector& u0, const Vector& v0, Source&& source) {
  const auto& m = stepper.model();
  const int K = m.steps();
  Trajectory t{DenseMatrix(m.state_dim(), K + 1), DenseMatrix(m.state_dim(), K + 1)};
  t.u.col(0) = u0;
  t.v.col(0) = v0;
  for (int k = 1; k <= K; ++k) {
    const Vector r = source(k);
    stepper.step(t.u.col(k - 1), t.v.col(k - 1), r, t.u.col(k), t.v.col(k));
  }
  return t;
}

// Exact discrete adjoint of march_forward: the same step run backwards in time, with the
// unweighted source g^{c+1} feeding column c.
template <class B>
Trajectory march_backward(const Stepper<B>& stepper, const DenseMatrix& residual) {
  const auto& m = stepper.model();
  const int K = m.steps();
  Trajectory t{DenseMatrix(m.state_dim(), K + 1), DenseMatrix(m.state_dim(), K + 1)};
  t.u.col(K).setZero();
  t.v.col(K).setZero();
  for (int c = K - 1; c >= 0; --c) {
    const Vector r = residual.col(c + 1);
    stepper.step(t.u.col(c + 1), t.v.col(c + 1), r, t.u.col(c), t.v.col(c));
  }
  return t;
}

}  // namespace detail

/// Column k: C^T M_C y^k - C^T M_C C u^k (column 0 is zero).
template <class B>
DenseMatrix misfit_residual(const DiscreteModel<B>& model, const DenseMatrix& u) {
  DenseMatrix g = model.misfit_data - model.misfit * u;
  g.col(0).setZero();
  return g;
}

template <class B>
Trajectory solve_primal(const Stepper<B>& stepper) {
  const auto& m = stepper.model();
  ++m.counter->primal;
  return detail::march_forward(stepper, m.u0, m.v0, [&](int k) -> Vector { return m.source.col(k); });
}

/// Backward solve driven by C^T M_C (y^k - C u^k).
template <class B>
Trajectory solve_adjoint(const Stepper<B>& stepper, const Trajectory& state) {
  const auto& m = stepper.model();
  ++m.counter->adjoint;
  return detail::march_backward(stepper, misfit_residual(m, state.u));
}

/// Forward solve with zero initial data and source -A_lin(d) u^{k-1+zeta}.
template <class B>
Trajectory solve_linearized_primal(const Stepper<B>& stepper, const Trajectory& state, const Vector& d) {
  const auto& m = stepper.model();
  require(d.size() == m.param_dim(), "solve_linearized_primal: direction length mismatch");
  ++m.counter->linearized_primal;
  const typename B::Matrix a_lin = m.family.linear_part(d);
  const double z = m.time.zeta;
  const Vector zero = Vector::Zero(m.state_dim());
  return detail::march_forward(stepper, zero, zero,
                               [&](int k) -> Vector { return -(a_lin * intermediate(state, k, z)); });
}

/// Backward solve driven by C^T M_C (y^k - C u^k - C u_lin^k).
template <class B>
Trajectory solve_linearized_adjoint(const Stepper<B>& stepper, const Trajectory& state, const Trajectory& lin_state) {
  const auto& m = stepper.model();
  ++m.counter->linearized_adjoint;
  return detail::march_backward(stepper, misfit_residual(m, state.u + lin_state.u));
}

}  // namespace trirgnm
