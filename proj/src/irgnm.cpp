#include "trirgnm/irgnm.hpp"

#include <algorithm>
#include <cmath>

namespace trirgnm {

void IrgnmConfig::validate() const {
  if (!(theta > 0.0 && theta < Theta && Theta < 2.0)) throw ConfigError("IRGNM needs 0 < theta < Theta < 2");
  if (!(tau > 1.0)) throw ConfigError("IRGNM needs tau > 1");
  if (!(alpha_init > 0.0)) throw ConfigError("IRGNM needs alpha_init > 0");
  if (!(alpha_factor > 1.0)) throw ConfigError("IRGNM needs alpha_factor > 1");
  if (alpha_max_trials < 1 || inner_max_iterations < 1) throw ConfigError("IRGNM iteration caps must be positive");
}

SubproblemResult solve_subproblem(LinearizedMisfit& misfit, const Vector& q, const Vector& reg_center, double alpha,
                                  const std::function<Vector(const Vector&)>& project, const IrgnmConfig& config) {
  require(alpha > 0.0, "solve_subproblem: alpha must be positive");
  auto proj_step = [&](const Vector& d) -> Vector { return project(q + d) - q; };
  auto objective = [&](const Vector& d, double m) { return m + 0.5 * alpha * (q + d - reg_center).squaredNorm(); };

  SubproblemResult r;
  r.d = Vector::Zero(q.size());
  double m = misfit.value(r.d);
  double phi = objective(r.d, m);
  Vector g = misfit.gradient() + alpha * (q + r.d - reg_center);
  const auto measure = [&](const Vector& d, const Vector& grad) { return (d - proj_step(d - grad)).norm(); };
  const double measure0 = measure(r.d, g);
  r.misfit = m;
  r.objective = phi;
  r.first_order = measure0;
  if (measure0 == 0.0) return r;

  constexpr double kArmijo = 1e-4;
  constexpr int kMemory = 5;
  constexpr double kStepMin = 1e-20;
  constexpr double kStepMax = 1e20;
  std::deque<double> history{phi};
  // First step moves a unit distance along the negative gradient.
  double step = 1.0 / g.norm();
  bool use_bb1 = true;

  for (int it = 1; it <= config.inner_max_iterations; ++it) {
    const double reference = *std::max_element(history.begin(), history.end());
    Vector trial;
    double m_trial = 0.0;
    double phi_trial = 0.0;
    bool accepted = false;
    for (int halving = 0; halving <= 30; ++halving) {
      trial = proj_step(r.d - step * g);
      const double descent = g.dot(trial - r.d);
      m_trial = misfit.value(trial);
      phi_trial = objective(trial, m_trial);
      if (phi_trial <= reference + kArmijo * descent) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      // A stationary point gives no descent at any step; anything else is a broken gradient.
      if (measure(r.d, g) <= 1e-12 * measure0) break;
      throw SolverError("solve_subproblem: no decrease after line-search safeguard (gradient inconsistent?)");
    }
    const Vector g_trial = misfit.gradient() + alpha * (q + trial - reg_center);
    const Vector s = trial - r.d;
    const Vector y = g_trial - g;
    const double change = std::abs(phi_trial - phi) / std::max(std::abs(phi), 1e-300);
    r.d = trial;
    phi = phi_trial;
    m = m_trial;
    g = g_trial;
    r.iterations = it;
    history.push_back(phi);
    if (static_cast<int>(history.size()) > kMemory) history.pop_front();

    r.first_order = measure(r.d, g);
    if (r.first_order <= config.inner_first_order * measure0) break;
    if (change < config.inner_relative_change) break;

    const double sy = s.dot(y);
    if (sy > 0.0) {
      step = use_bb1 ? s.squaredNorm() / sy : sy / y.squaredNorm();
      use_bb1 = !use_bb1;
    }
    step = std::clamp(step, kStepMin, kStepMax);
  }
  r.misfit = m;
  r.objective = phi;
  return r;
}

AlphaSelection select_alpha(LinearizedMisfit& misfit, const Vector& q, double value, const Vector& reg_center,
                            double alpha_prev, const std::function<Vector(const Vector&)>& project,
                            const IrgnmConfig& config) {
  require(value > 0.0, "select_alpha: J(q) must be positive");
  AlphaSelection sel;
  double alpha = alpha_prev;
  double lo = 0.0;  // largest alpha known to leave too little residual
  double hi = 0.0;  // smallest alpha known to leave too much
  for (int trial = 1; trial <= config.alpha_max_trials; ++trial) {
    SubproblemResult sub = solve_subproblem(misfit, q, reg_center, alpha, project, config);
    sel.trials = trial;
    sel.inner_iterations += sub.iterations;
    const double ratio = 2.0 * sub.misfit / value;
    if (ratio >= config.theta && ratio <= config.Theta) {
      sel.alpha = alpha;
      sel.sub = std::move(sub);
      sel.ratio = ratio;
      return sel;
    }
    if (ratio < config.theta) {
      lo = alpha;
    } else {
      hi = alpha;
    }
    if (lo > 0.0 && hi > 0.0) {
      alpha = std::sqrt(lo * hi);
    } else {
      alpha = ratio < config.theta ? alpha * config.alpha_factor : alpha / config.alpha_factor;
    }
  }
  throw SolverError("select_alpha: no regularization parameter satisfied the sandwich condition");
}

void write_irgnm_ledger_csv(std::ostream& out, const std::vector<IrgnmRecord>& ledger) {
  out << "iteration,J,alpha,inner_iters,step_norm,seconds\n";
  out.precision(17);
  for (const auto& r : ledger)
    out << r.iteration << ',' << r.value << ',' << r.alpha << ',' << r.inner_iterations << ',' << r.step_norm << ','
        << r.seconds << '\n';
}

}  // namespace trirgnm
