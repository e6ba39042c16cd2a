#pragma once

#include <vector>

#include "trirgnm/objective.hpp"

namespace trirgnm {

/// Psi_V is M_V-orthonormal, Psi_Q Euclidean-orthonormal.
struct ReducedBasisPair {
  DenseMatrix state;  // N_V x n_V
  DenseMatrix param;  // N_Q x n_Q
  int generation = 0;

  Eigen::Index state_dim() const { return state.cols(); }
  Eigen::Index param_dim() const { return param.cols(); }
};

/// Gram-orthonormal POD modes of the columns of `snapshots`, keeping the leading modes that carry a
/// fraction of at least 1 - tolerance^2 of the total snapshot energy. `tolerance` 0 keeps every mode
/// above round-off.
DenseMatrix pod_compress(const DenseMatrix& snapshots, const SparseMatrix& gram, double tolerance);

/// Appends the Gram-orthonormalized part of `candidates` that is not already in span(basis).
/// Columns whose remainder falls below `dependence` times their norm are skipped.
DenseMatrix extend_orthonormal(const DenseMatrix& basis, const DenseMatrix& candidates, const SparseMatrix* gram,
                               double dependence = 1e-10);

/// Galerkin projection of the full-order model onto the bases, with its own solve counter.
/// `box` is the full-order admissible set; reduced admissibility is decided on the lift.
/// `previous`, if given, must be the projection onto the leading columns of both bases; its blocks are reused.
RomModel project_model(const FomModel& fom, const SparseMatrix& gram_v, const AdmissibleSet& box,
                       const ReducedBasisPair& basis, const RomModel* previous = nullptr);

inline Vector lift(const DenseMatrix& basis, const Vector& x) { return basis * x; }
inline DenseMatrix lift(const DenseMatrix& basis, const DenseMatrix& x) { return basis * x; }

/// Nearest reduced parameter whose lift lies in the box (Dykstra on box and span, then pulled
/// toward `anchor`, a reduced point with admissible lift, until the lift is feasible).
Vector project_reduced(const DenseMatrix& param_basis, const AdmissibleSet& box, const Vector& q_r,
                       const Vector& anchor);

struct EnrichmentReport {
  double tolerance_used = 0.0;
  double value_gap = 0.0;     // |J_h - J_r| / J_h at the enrichment parameter
  double gradient_gap = 0.0;  // |Psi_Q^T grad J_h - grad J_r| / |Psi_Q^T grad J_h|
  Eigen::Index added_state = 0;
  Eigen::Index added_param = 0;
};

struct EnrichmentInput {
  Vector q;                 // full-order parameter of the snapshots
  Vector gradient;          // grad J_h(q)
  double value = 0.0;       // J_h(q)
  const Trajectory* primal = nullptr;
  const Trajectory* adjoint = nullptr;
};

/// Extends the bases at a full-order snapshot parameter and rebuilds the reduced model.
/// Verifies first-order consistency to `consistency_tol`; if POD truncation breaks it, the basis is
/// extended again from the remaining defects with a 100x tighter POD tolerance until it holds. Throws SolverError if even an untruncated
/// enrichment is inconsistent.
struct Enriched {
  ReducedBasisPair basis;
  RomModel model;
  EnrichmentReport report;
};
Enriched enrich(const ReducedBasisPair& basis, const FomModel& fom, const SparseMatrix& gram_v,
                const AdmissibleSet& box, const EnrichmentInput& input, double pod_tolerance,
                double consistency_tol = 1e-8, const RomModel* previous = nullptr);

}  // namespace trirgnm
