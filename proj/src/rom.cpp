#include "trirgnm/rom.hpp"

#include <Eigen/SVD>
#include <cmath>

namespace trirgnm {

namespace {

// Inner product matrix-vector: gram ? gram * x : x.
Vector weighted(const SparseMatrix* gram, const Vector& x) { return gram ? Vector(*gram * x) : x; }

}  // namespace

DenseMatrix extend_orthonormal(const DenseMatrix& basis, const DenseMatrix& candidates, const SparseMatrix* gram,
                               double dependence) {
  DenseMatrix out(basis.rows(), basis.cols() + candidates.cols());
  out.leftCols(basis.cols()) = basis;
  Eigen::Index n = basis.cols();
  for (Eigen::Index c = 0; c < candidates.cols(); ++c) {
    Vector x = candidates.col(c);
    const double norm0 = std::sqrt(std::max(0.0, x.dot(weighted(gram, x))));
    if (!(norm0 > 0.0)) continue;
    // Two Gram-Schmidt passes keep orthogonality at round-off level.
    for (int pass = 0; pass < 2; ++pass) {
      const Vector coeff = out.leftCols(n).transpose() * weighted(gram, x);
      x.noalias() -= out.leftCols(n) * coeff;
    }
    const double norm = std::sqrt(std::max(0.0, x.dot(weighted(gram, x))));
    if (norm < dependence * norm0) continue;
    out.col(n++) = x / norm;
  }
  return out.leftCols(n);
}

DenseMatrix pod_compress(const DenseMatrix& snapshots, const SparseMatrix& gram, double tolerance) {
  require(tolerance >= 0.0, "pod_compress: tolerance must be nonnegative");
  const Eigen::Index n = snapshots.rows();
  const Eigen::Index m = snapshots.cols();
  // Gram-weighted QR: snapshots = Q R with Q^T M Q = I.
  DenseMatrix q(n, m);
  DenseMatrix r = DenseMatrix::Zero(m, m);
  Eigen::Index rank = 0;
  double largest = 0.0;
  for (Eigen::Index c = 0; c < m; ++c) largest = std::max(largest, std::sqrt(snapshots.col(c).dot(gram * snapshots.col(c))));
  if (!(largest > 0.0)) return DenseMatrix(n, 0);
  for (Eigen::Index c = 0; c < m; ++c) {
    Vector x = snapshots.col(c);
    for (int pass = 0; pass < 2; ++pass) {
      const Vector coeff = q.leftCols(rank).transpose() * (gram * x);
      x.noalias() -= q.leftCols(rank) * coeff;
      r.col(c).head(rank) += coeff;
    }
    const double norm = std::sqrt(std::max(0.0, x.dot(gram * x)));
    if (norm > 1e-13 * largest) {
      q.col(rank) = x / norm;
      r(rank, c) = norm;
      ++rank;
    }
  }
  if (rank == 0) return DenseMatrix(n, 0);
  Eigen::BDCSVD<DenseMatrix> svd(r.topRows(rank), Eigen::ComputeThinU);
  const Vector sigma = svd.singularValues();
  const double total = sigma.squaredNorm();
  Eigen::Index keep = 0;
  double kept = 0.0;
  while (keep < sigma.size() && sigma[keep] > 1e-12 * sigma[0]) {
    if (tolerance > 0.0 && kept >= (1.0 - tolerance * tolerance) * total) break;
    kept += sigma[keep] * sigma[keep];
    ++keep;
  }
  return q.leftCols(rank) * svd.matrixU().leftCols(keep);
}

RomModel project_model(const FomModel& fom, const SparseMatrix& gram_v, const AdmissibleSet& box,
                       const ReducedBasisPair& basis, const RomModel* previous) {
  const DenseMatrix& psi = basis.state;
  const DenseMatrix& pq = basis.param;
  require(psi.rows() == fom.state_dim() && pq.rows() == fom.param_dim(), "project_model: basis shape mismatch");
  const Eigen::Index n0 = previous ? previous->state_dim() : 0;
  const Eigen::Index p0 = previous ? previous->param_dim() : 0;
  require(n0 <= psi.cols() && p0 <= pq.cols(), "project_model: previous model is larger than the basis");

  // Leading basis columns are unchanged across enrichments, so only the new rows/columns are computed.
  auto galerkin = [&](const SparseMatrix& a, const DenseMatrix* old) -> DenseMatrix {
    const Eigen::Index k = old ? old->rows() : 0;
    const Eigen::Index fresh = psi.cols() - k;
    DenseMatrix r(psi.cols(), psi.cols());
    if (k > 0) r.topLeftCorner(k, k) = *old;
    if (fresh == 0) return r;
    const DenseMatrix ap = a * psi.rightCols(fresh);
    const DenseMatrix cross = psi.transpose() * ap;
    r.rightCols(fresh) = cross;
    r.bottomLeftCorner(fresh, k) = cross.topRows(k).transpose();
    const DenseMatrix corner = r.bottomRightCorner(fresh, fresh);
    r.bottomRightCorner(fresh, fresh) = 0.5 * (corner + corner.transpose());
    return r;
  };
  std::vector<DenseMatrix> components;
  components.reserve(pq.cols());
  for (Eigen::Index j = 0; j < pq.cols(); ++j)
    components.push_back(
        galerkin(fom.family.linear_part(pq.col(j)), j < p0 ? &previous->family.component(j) : nullptr));

  RomModel rom;
  rom.family = DenseAffineFamily(
      galerkin(fom.family.constant_part(), previous ? &previous->family.constant_part() : nullptr),
      std::move(components));
  rom.mass = galerkin(fom.mass, previous ? &previous->mass : nullptr);
  rom.misfit = galerkin(fom.misfit, previous ? &previous->misfit : nullptr);
  rom.misfit_data = psi.transpose() * fom.misfit_data;
  rom.data_energy = fom.data_energy;
  rom.source = psi.transpose() * fom.source;
  rom.u0 = psi.transpose() * (gram_v * fom.u0);
  rom.v0 = psi.transpose() * (gram_v * fom.v0);
  rom.time = fom.time;
  rom.reg_center = pq.transpose() * fom.reg_center;
  const Vector anchor = rom.reg_center;
  rom.admissible = [pq, box](const Vector& q_r) { return box.contains(pq * q_r); };
  rom.project = [pq, box, anchor](const Vector& q_r) { return project_reduced(pq, box, q_r, anchor); };
  return rom;
}

Vector project_reduced(const DenseMatrix& param_basis, const AdmissibleSet& box, const Vector& q_r,
                       const Vector& anchor) {
  const Vector x0 = param_basis * q_r;
  if (box.contains(x0)) return q_r;
  // Dykstra alternating projections between the box and span(Psi_Q).
  Vector y = x0;
  Vector p = Vector::Zero(x0.size());
  Vector corr = Vector::Zero(x0.size());
  for (int it = 0; it < 500; ++it) {
    const Vector z = box.project(y + p);
    p = y + p - z;
    const Vector w = z + corr;
    const Vector y_new = param_basis * (param_basis.transpose() * w);
    corr = w - y_new;
    const double moved = (y_new - y).norm();
    y = y_new;
    if (moved <= 1e-14 * std::max(1.0, y.norm()) && (z - y).norm() <= 1e-12 * std::max(1.0, y.norm())) break;
  }
  Vector result = param_basis.transpose() * y;
  const Vector a = param_basis * anchor;
  const Vector b = param_basis * result;
  if (box.contains(b)) return result;
  // Pull back along the segment toward the anchor until every component is inside the box.
  double t = 1.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double diff = b[i] - a[i];
    if (b[i] < box.lower[i] && diff < 0.0) t = std::min(t, (box.lower[i] - a[i]) / diff);
    if (b[i] > box.upper[i] && diff > 0.0) t = std::min(t, (box.upper[i] - a[i]) / diff);
  }
  t = std::max(0.0, t * (1.0 - 1e-12));
  return anchor + t * (result - anchor);
}

Enriched enrich(const ReducedBasisPair& basis, const FomModel& fom, const SparseMatrix& gram_v,
                const AdmissibleSet& box, const EnrichmentInput& input, double pod_tolerance,
                double consistency_tol, const RomModel* previous) {
  require(input.primal && input.adjoint, "enrich: primal and adjoint snapshots are required");
  DenseMatrix candidates(fom.param_dim(), 3);
  candidates << input.q, fom.reg_center, input.gradient;
  DenseMatrix param = extend_orthonormal(basis.param, candidates, nullptr);

  auto with_defects = [&](const DenseMatrix& psi, const DenseMatrix& snaps, double tol) {
    DenseMatrix defect = snaps - psi * (psi.transpose() * (gram_v * snaps));
    // Round-off remainders of snapshots already in the span would otherwise become modes.
    for (Eigen::Index c = 0; c < defect.cols(); ++c) {
      const double full = snaps.col(c).dot(gram_v * snaps.col(c));
      if (defect.col(c).dot(gram_v * defect.col(c)) <= 1e-20 * full) defect.col(c).setZero();
    }
    return extend_orthonormal(psi, pod_compress(defect, gram_v, tol), &gram_v);
  };

  std::vector<double> tolerances;
  for (double t = pod_tolerance; t > 1e-14 && tolerances.size() < 4; t *= 1e-2) tolerances.push_back(t);
  tolerances.push_back(0.0);

  // A retry extends the previous attempt, so its projection is reused.
  Enriched out;
  bool attempted = false;
  for (double tol : tolerances) {
    const DenseMatrix& start = attempted ? out.basis.state : basis.state;
    DenseMatrix state = with_defects(start, input.primal->u, tol);
    state = with_defects(state, input.adjoint->u, tol);
    if (attempted && state.cols() == start.cols()) continue;
    ReducedBasisPair next{state, param, basis.generation + 1};
    RomModel rom = project_model(fom, gram_v, box, next, attempted ? &out.model : previous);
    attempted = true;

    const Vector q_r = param.transpose() * input.q;
    const auto eval = eval_objective(rom, q_r);
    const Vector grad_r = eval_gradient(rom, eval);
    const Vector grad_ref = param.transpose() * input.gradient;
    EnrichmentReport rep;
    rep.tolerance_used = tol;
    rep.value_gap = std::abs(input.value - eval.value) / std::max(std::abs(input.value), 1e-300);
    rep.gradient_gap = (grad_ref - grad_r).norm() / std::max(grad_ref.norm(), 1e-300);
    rep.added_state = state.cols() - basis.state.cols();
    rep.added_param = param.cols() - basis.param.cols();
    out = Enriched{std::move(next), std::move(rom), rep};
    if (rep.value_gap <= consistency_tol && rep.gradient_gap <= consistency_tol) return out;
  }
  throw SolverError("enrich: first-order consistency check failed (value gap " +
                    std::to_string(out.report.value_gap) + ", gradient gap " +
                    std::to_string(out.report.gradient_gap) + ")");
}

}  // namespace trirgnm
