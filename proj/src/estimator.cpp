#include "trirgnm/estimator.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>
#include <limits>

namespace trirgnm {

DenseMatrix primal_residual(const FomModel& fom, const Vector& q, const Trajectory& trajectory) {
  const int K = fom.steps();
  require(trajectory.u.cols() == K + 1 && trajectory.v.cols() == K + 1, "primal_residual: need K+1 columns");
  const SparseMatrix a = fom.family.evaluate(q);
  const double z = fom.time.zeta;
  DenseMatrix r(fom.state_dim(), K);
  for (int k = 1; k <= K; ++k) {
    r.col(k - 1) = fom.source.col(k) - a * intermediate(trajectory, k, z) -
                   fom.mass * (trajectory.v.col(k) - trajectory.v.col(k - 1)) / fom.dt();
  }
  return r;
}

double state_error_estimator(const DenseMatrix& residuals, const SparseMatrix& mass, double dt, double zeta) {
  require(zeta >= 0.5, "state_error_estimator: the bound needs zeta >= 1/2");
  const Vector inv = mass.diagonal().cwiseInverse();
  double partial = 0.0;
  double total = 0.0;
  for (Eigen::Index k = 0; k < residuals.cols(); ++k) {
    partial += dt * std::sqrt(residuals.col(k).cwiseAbs2().dot(inv));
    total += partial * partial;
  }
  return 2.0 * std::sqrt(total);
}

double coercivity_lower_bound(const SparseAffineFamily& family, const SparseMatrix& gram_v, const Vector& q,
                              double relative_tolerance, int max_iterations) {
  const SparseMatrix a = family.evaluate(q);
  Eigen::SimplicialLLT<SparseMatrix> chol(a);
  if (chol.info() != Eigen::Success) throw SolverError("coercivity_lower_bound: A(q) is not positive definite");
  // Block inverse iteration with Rayleigh-Ritz; a single vector stalls when the lowest modes cluster.
  const Eigen::Index n = a.rows();
  const Eigen::Index block = std::min<Eigen::Index>(n, 8);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  DenseMatrix x = DenseMatrix::NullaryExpr(n, block, [&] { return uniform(rng); });
  double previous = std::numeric_limits<double>::infinity();
  for (int it = 0; it < max_iterations; ++it) {
    const DenseMatrix y = chol.solve(DenseMatrix(gram_v * x));
    const DenseMatrix ay = a * y;
    const DenseMatrix my = gram_v * y;
    DenseMatrix ka = y.transpose() * ay;
    DenseMatrix km = y.transpose() * my;
    ka = 0.5 * (ka + ka.transpose()).eval();
    km = 0.5 * (km + km.transpose()).eval();
    Eigen::GeneralizedSelfAdjointEigenSolver<DenseMatrix> ritz(ka, km);
    if (ritz.info() != Eigen::Success) throw SolverError("coercivity_lower_bound: Rayleigh-Ritz step failed");
    x = y * ritz.eigenvectors();
    const double lowest = ritz.eigenvalues()[0];
    if (std::abs(lowest - previous) <= relative_tolerance * lowest) return 0.99 * lowest;
    previous = lowest;
  }
  throw SolverError("coercivity_lower_bound: block inverse iteration did not converge in " +
                    std::to_string(max_iterations) + " iterations (last Ritz value " + std::to_string(previous) + ")");
}

double objective_error_estimator(double reduced_value, double seminorm_bound, double coercivity, double c_norm) {
  require(reduced_value >= 0.0 && seminorm_bound >= 0.0 && coercivity > 0.0 && c_norm >= 0.0,
          "objective_error_estimator: inputs must be nonnegative");
  return c_norm * c_norm / (2.0 * coercivity) * seminorm_bound * seminorm_bound +
         c_norm * std::sqrt(2.0 * reduced_value / coercivity) * seminorm_bound;
}

double energy_error(const SparseMatrix& mass, const SparseMatrix& stiffness, const Trajectory& a, const Trajectory& b) {
  double total = 0.0;
  for (Eigen::Index k = 1; k < a.u.cols(); ++k) {
    const Vector e = a.u.col(k) - b.u.col(k);
    const Vector ev = a.v.col(k) - b.v.col(k);
    total += ev.dot(mass * ev) + e.dot(stiffness * e);
  }
  return std::sqrt(total);
}

EstimatorReport estimate(const FomModel& fom, const SparseMatrix& gram_v, double c_norm, const Vector& q,
                         const Trajectory& lifted, double reduced_value) {
  EstimatorReport rep;
  rep.state_bound = state_error_estimator(primal_residual(fom, q, lifted), fom.mass, fom.dt(), fom.time.zeta);
  rep.seminorm_bound = std::sqrt(fom.dt()) * rep.state_bound;
  rep.coercivity = coercivity_lower_bound(fom.family, gram_v, q);
  rep.c_norm = c_norm;
  rep.objective_bound = objective_error_estimator(reduced_value, rep.seminorm_bound, rep.coercivity, c_norm);
  return rep;
}

void write_effectivity_csv(std::ostream& out, const std::vector<EffectivityRow>& rows) {
  out << "q_hash,delta_u,true_error,effectivity,delta_J,true_J_gap\n";
  out.precision(12);
  for (const auto& r : rows) {
    const double eff = r.true_state_error > 0.0 ? r.state_bound / r.true_state_error : 0.0;
    out << r.tag << ',' << r.state_bound << ',' << r.true_state_error << ',' << eff << ',' << r.objective_bound
        << ',' << r.true_objective_gap << '\n';
  }
}

}  // namespace trirgnm
