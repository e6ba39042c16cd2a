#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "trirgnm/timestep.hpp"

namespace trirgnm {

/// r^k = R^k - A(q) u^{k-1+zeta} - (rho/dt) M_H (v^k - v^{k-1}), column k-1 for k = 1..K.
DenseMatrix primal_residual(const FomModel& fom, const Vector& q, const Trajectory& trajectory);

/// Delta^u = 2 (sum_k (dt sum_{k'<=k} |r^{k'}|_{H'})^2)^{1/2} with |r|_{H'}^2 = r^T (rho M_H)^{-1} r.
double state_error_estimator(const DenseMatrix& residuals, const SparseMatrix& mass, double dt, double zeta);

/// 0.99 times the smallest eigenvalue of A(q) v = lambda M_V v (block inverse iteration).
double coercivity_lower_bound(const SparseAffineFamily& family, const SparseMatrix& gram_v, const Vector& q,
                              double relative_tolerance = 1e-10, int max_iterations = 2000);

/// Delta^J = |C|^2/(2a) s^2 + |C| sqrt(2 J_r / a) s, with s the stiffness-seminorm error bound.
double objective_error_estimator(double reduced_value, double seminorm_bound, double coercivity, double c_norm);

/// True energy error (sum_k |e^k|_E^2)^{1/2}, |e|_E^2 = e_v^T rho M_H e_v + e^T A(q) e.
double energy_error(const SparseMatrix& mass, const SparseMatrix& stiffness, const Trajectory& a, const Trajectory& b);

struct EstimatorReport {
  double state_bound = 0.0;      // Delta^u
  double seminorm_bound = 0.0;   // sqrt(dt) Delta^u, bounds (dt sum_k e^T A e)^{1/2}
  double objective_bound = 0.0;  // Delta^J
  double coercivity = 0.0;
  double c_norm = 0.0;
  double true_state_error = -1.0;     // negative when not computed
  double true_objective_gap = -1.0;
};

/// Certifies a lifted reduced trajectory at full-order parameter q.
EstimatorReport estimate(const FomModel& fom, const SparseMatrix& gram_v, double c_norm, const Vector& q,
                         const Trajectory& lifted, double reduced_value);

struct EffectivityRow {
  std::string tag;
  double state_bound;
  double true_state_error;
  double objective_bound;
  double true_objective_gap;
};
void write_effectivity_csv(std::ostream& out, const std::vector<EffectivityRow>& rows);

}  // namespace trirgnm
