#include "trirgnm/tr.hpp"

#include <chrono>
#include <cmath>

namespace trirgnm {

void TrustRegionConfig::validate() const {
  if (!(eta0 > 0.0 && eta0 <= eta_max)) throw ConfigError("trust region needs 0 < eta0 <= eta_max");
  if (!(beta2 >= 0.75 && beta2 < 1.0)) throw ConfigError("trust region needs beta2 in [3/4, 1)");
  if (!(beta3 > 0.0 && beta3 < 1.0)) throw ConfigError("trust region needs beta3 in (0, 1)");
  if (!(boundary_fraction > 0.0 && boundary_fraction <= 1.0)) throw ConfigError("boundary fraction must be in (0, 1]");
  if (!(pod_tolerance >= 0.0)) throw ConfigError("POD tolerance must be nonnegative");
}

SubproblemTrace tr_subproblem(const RomModel& rom, const Vector& q_start, double eta, double delta, double alpha,
                              const IrgnmConfig& irgnm, const TrustRegionConfig& tr) {
  const double tau = tr.tau_tilde > 0.0 ? tr.tau_tilde : irgnm.tau;
  const double target = 0.5 * (tau * delta) * (tau * delta);
  SubproblemTrace trace;
  trace.q = q_start;
  trace.alpha = alpha;
  auto eval = eval_objective(rom, q_start);
  trace.start_value = eval.value;
  trace.value = eval.value;
  for (int l = 0; l < tr.max_subproblem_iterations; ++l) {
    if (eval.value < target) {
      trace.reached_discrepancy = true;
      break;
    }
    const Vector g = eval_gradient(rom, eval);
    auto misfit = make_linearized_misfit(rom, eval, g, irgnm);
    AlphaSelection sel;
    try {
      sel = select_alpha(*misfit, trace.q, eval.value, rom.reg_center, trace.alpha, rom.project, irgnm);
    } catch (const SolverError&) {
      break;
    }
    trace.alpha = sel.alpha;
    Vector d = sel.sub.d;
    Vector candidate = rom.project(trace.q + d);
    int halvings = 0;
    while ((candidate - q_start).norm() > eta && halvings < tr.max_halvings) {
      d *= 0.5;
      candidate = rom.project(trace.q + d);
      ++halvings;
    }
    if ((candidate - q_start).norm() > eta) {
      trace.on_boundary = true;
      break;
    }
    auto next = eval_objective(rom, candidate);
    if (!(next.value < eval.value)) break;  // reduced IRGNM has converged
    trace.q = candidate;
    eval = std::move(next);
    trace.value = eval.value;
    trace.iterations = l + 1;
    trace.ratios.push_back(sel.ratio);
    if ((trace.q - q_start).norm() >= tr.boundary_fraction * eta) {
      trace.on_boundary = true;
      break;
    }
  }
  return trace;
}

AcceptDecision tr_accept(double value, double trial_value, double reduced_drop, double eta,
                         const TrustRegionConfig& tr) {
  AcceptDecision out;
  const double drop = value - trial_value;
  out.rho = reduced_drop > 0.0 ? drop / reduced_drop : std::numeric_limits<double>::infinity();
  out.accepted = trial_value < value;
  if (!out.accepted) {
    out.eta = eta * tr.beta3;
  } else if (out.rho > tr.beta2) {
    out.eta = std::min(tr.eta_max, eta / tr.beta3);
  } else {
    out.eta = eta;
  }
  return out;
}

TrResult tr_irgnm(const FomModel& fom, const SparseMatrix& gram_v, const AdmissibleSet& box, double c_norm,
                  const Vector& q0, double delta, const IrgnmConfig& irgnm, const TrustRegionConfig& tr) {
  irgnm.validate();
  tr.validate();
  require(box.contains(q0), "tr_irgnm: start is not admissible");
  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(); };
  const double target = 0.5 * (irgnm.tau * delta) * (irgnm.tau * delta);

  TrResult res;
  res.q = q0;
  auto current = eval_objective(fom, q0);
  res.value = current.value;
  res.accepted_values.push_back(current.value);
  if (current.value <= target) {
    res.converged = true;
    return res;
  }

  Trajectory adjoint;
  Vector gradient = eval_gradient(fom, current, &adjoint);
  ReducedBasisPair empty{DenseMatrix(fom.state_dim(), 0), DenseMatrix(fom.param_dim(), 0), 0};
  Enriched rb;
  try {
    rb = enrich(empty, fom, gram_v, box, {q0, gradient, current.value, &current.state, &adjoint}, tr.pod_tolerance,
                tr.consistency_tolerance);
  } catch (const SolverError& e) {
    res.failed = true;
    res.message = e.what();
    return res;
  }
  res.initial_enrichment = rb.report;
  Vector q_r = rb.basis.param.transpose() * q0;
  double eta = tr.eta0;
  double alpha = irgnm.alpha_init;
  int rejections = 0;

  for (int i = 0; res.value > target; ++i) {
    if (i >= tr.max_outer_iterations) {
      res.message = "outer iteration budget exhausted";
      break;
    }
    const SubproblemTrace sub = tr_subproblem(rb.model, q_r, eta, delta, alpha, irgnm, tr);
    alpha = sub.alpha;
    res.total_iterations += sub.iterations;
    const Vector q_trial = box.project(rb.basis.param * sub.q);
    auto trial = eval_objective(fom, q_trial);

    TrRecord rec;
    rec.iteration = i;
    rec.value_h = trial.value;
    rec.value_r = sub.value;
    rec.eta = eta;
    rec.sub_iterations = sub.iterations;
    rec.ratios = sub.ratios;
    if (tr.report_estimators) {
      auto red = eval_objective(rb.model, sub.q);
      const Trajectory lifted{rb.basis.state * red.state.u, rb.basis.state * red.state.v};
      const auto est = estimate(fom, gram_v, c_norm, q_trial, lifted, red.value);
      rec.delta_u = est.state_bound;
      rec.delta_j = est.objective_bound;
      rec.true_state_error = energy_error(fom.mass, trial.stepper->stiffness(), trial.state, lifted);
      rec.true_gap = std::abs(trial.value - red.value);
    }

    const AcceptDecision decision = tr_accept(res.value, trial.value, sub.start_value - sub.value, eta, tr);
    rec.rho = decision.rho;
    eta = decision.eta;
    if (decision.accepted) {
      rec.accepted = true;
      Trajectory trial_adjoint;
      const Vector trial_gradient = eval_gradient(fom, trial, &trial_adjoint);
      try {
        rb = enrich(rb.basis, fom, gram_v, box, {q_trial, trial_gradient, trial.value, &trial.state, &trial_adjoint},
                    tr.pod_tolerance, tr.consistency_tolerance, &rb.model);
      } catch (const SolverError& e) {
        res.failed = true;
        res.message = e.what();
        break;
      }
      rec.enrichment = rb.report;
      q_r = rb.basis.param.transpose() * q_trial;
      res.q = q_trial;
      res.value = trial.value;
      res.accepted_values.push_back(trial.value);
      current = std::move(trial);
      ++res.accepted_iterations;
      rejections = 0;
    } else {
      ++rejections;
    }
    rec.n_q = rb.basis.param_dim();
    rec.n_v = rb.basis.state_dim();
    rec.fom_solves = fom.counter->trajectory_solves();
    rec.seconds = elapsed();
    res.ledger.push_back(std::move(rec));
    if (rejections >= tr.max_consecutive_rejections) {
      res.failed = true;
      res.message = "trust-region radius collapsed after repeated rejections";
      break;
    }
  }
  res.converged = !res.failed && res.value <= target;
  res.n_q = rb.basis.param_dim();
  res.n_v = rb.basis.state_dim();
  return res;
}

}  // namespace trirgnm
