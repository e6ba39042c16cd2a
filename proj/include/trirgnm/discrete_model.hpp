#pragma once

#include <Eigen/Cholesky>
#include <Eigen/SparseCholesky>
#include <functional>
#include <memory>

#include "trirgnm/affine_family.hpp"
#include "trirgnm/model.hpp"

namespace trirgnm {

struct SparseBackend {
  using Matrix = SparseMatrix;
  using Family = SparseAffineFamily;
  using Factor = Eigen::SimplicialLLT<SparseMatrix>;
};

struct DenseBackend {
  using Matrix = DenseMatrix;
  using Family = DenseAffineFamily;
  using Factor = Eigen::LLT<DenseMatrix>;
};

/// Instrumentation shared by everything that solves with one model.
struct SolveCounter {
  long factorizations = 0;
  long primal = 0;
  long adjoint = 0;
  long linearized_primal = 0;
  long linearized_adjoint = 0;

  long trajectory_solves() const { return primal + adjoint + linearized_primal + linearized_adjoint; }
};

/// Everything the objective, IRGNM and trust-region code need from a backend. The full-order
/// model uses sparse matrices on N_V x N_Q, the reduced model dense ones on n_V x n_Q.
template <class B>
struct DiscreteModel {
  using Backend = B;
  using Matrix = typename B::Matrix;

  typename B::Family family;
  Matrix mass;              // rho * M_H
  Matrix misfit;            // C^T M_C C
  DenseMatrix misfit_data;  // column k: C^T M_C y^k (column 0 unused)
  double data_energy = 0.0; // (dt/2) sum_k |y^k|_C^2
  DenseMatrix source;       // column k: zeta L^k + (1 - zeta) L^{k-1} (column 0 unused)
  Vector u0;
  Vector v0;
  TimeGrid time;
  Vector reg_center;  // q_o in this model's coordinates
  std::function<bool(const Vector&)> admissible;
  std::function<Vector(const Vector&)> project;
  std::shared_ptr<SolveCounter> counter = std::make_shared<SolveCounter>();

  Eigen::Index state_dim() const { return family.state_dim(); }
  Eigen::Index param_dim() const { return family.param_dim(); }
  int steps() const { return time.steps; }
  double dt() const { return time.dt(); }
};

using FomModel = DiscreteModel<SparseBackend>;
using RomModel = DiscreteModel<DenseBackend>;

/// Combined step sources from a load trajectory with columns k = 0..K.
DenseMatrix step_sources(const DenseMatrix& load, const TimeGrid& time);

/// Full-order model without data; call set_data before evaluating objectives.
FomModel build_fom_model(const OperatorFamily& ops, const Observation& obs, const DenseMatrix& load,
                         const TimeGrid& time, const Vector& reg_center, const AdmissibleSet& box);

/// Installs measurement data y (N_C x (K+1)) into a model built for observation `obs`.
void set_data(FomModel& model, const Observation& obs, const DenseMatrix& y);

/// Discrete trajectory norm sqrt(dt sum_{k>=1} y^k^T M_C y^k).
double trajectory_norm(const Observation& obs, const DenseMatrix& y, double dt);

}  // namespace trirgnm
