#include "trirgnm/discrete_model.hpp"

#include <cmath>

#include "trirgnm/errors.hpp"

namespace trirgnm {

DenseMatrix step_sources(const DenseMatrix& load, const TimeGrid& time) {
  require(load.cols() == time.steps + 1, "step_sources: load needs K+1 columns");
  DenseMatrix r = DenseMatrix::Zero(load.rows(), load.cols());
  for (int k = 1; k <= time.steps; ++k) r.col(k) = time.zeta * load.col(k) + (1.0 - time.zeta) * load.col(k - 1);
  return r;
}

FomModel build_fom_model(const OperatorFamily& ops, const Observation& obs, const DenseMatrix& load,
                         const TimeGrid& time, const Vector& reg_center, const AdmissibleSet& box) {
  time.validate();
  require(reg_center.size() == ops.param_dim(), "build_fom_model: regularization center length");
  FomModel m;
  m.family = ops.stiffness;
  m.mass = ops.density * ops.mass_h;
  m.misfit = obs.misfit;
  m.misfit_data = DenseMatrix::Zero(ops.state_dim(), time.steps + 1);
  m.source = step_sources(load, time);
  m.u0 = Vector::Zero(ops.state_dim());
  m.v0 = Vector::Zero(ops.state_dim());
  m.time = time;
  m.reg_center = reg_center;
  m.admissible = [box](const Vector& q) { return box.contains(q); };
  m.project = [box](const Vector& q) { return box.project(q); };
  return m;
}

void set_data(FomModel& model, const Observation& obs, const DenseMatrix& y) {
  require(y.rows() == obs.rows() && y.cols() == model.steps() + 1, "set_data: data shape mismatch");
  model.misfit_data = obs.data_map * y;
  const double n = trajectory_norm(obs, y, model.dt());
  model.data_energy = 0.5 * n * n;
}

double trajectory_norm(const Observation& obs, const DenseMatrix& y, double dt) {
  double s = 0.0;
  for (Eigen::Index k = 1; k < y.cols(); ++k) s += y.col(k).dot(obs.gram * y.col(k));
  return std::sqrt(dt * s);
}

}  // namespace trirgnm
