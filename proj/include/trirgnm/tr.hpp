#pragma once

#include <limits>
#include <string>
#include <vector>

#include "trirgnm/estimator.hpp"
#include "trirgnm/irgnm.hpp"
#include "trirgnm/rom.hpp"

namespace trirgnm {

struct TrustRegionConfig {
  double eta0 = 0.5;
  double eta_max = 2.0;
  double beta2 = 0.75;
  double beta3 = 0.5;
  /// Reduced discrepancy factor; nonpositive means "same as the full-order tau".
  double tau_tilde = -1.0;
  double boundary_fraction = 0.95;
  int max_halvings = 20;
  int max_outer_iterations = 50;
  int max_subproblem_iterations = 50;
  int max_consecutive_rejections = 15;
  double pod_tolerance = 1e-3;
  double consistency_tolerance = 1e-8;
  bool report_estimators = false;

  void validate() const;
};

struct SubproblemTrace {
  Vector q;                  // reduced trial point
  double start_value = 0.0;  // J_r at the centre
  double value = 0.0;        // J_r at the trial point
  int iterations = 0;
  bool on_boundary = false;
  bool reached_discrepancy = false;
  double alpha = 0.0;
  std::vector<double> ratios;  // alpha-sandwich ratio of every reduced IRGNM step
};

/// Reduced IRGNM from the trust-region centre with step halving into the ball of radius eta.
SubproblemTrace tr_subproblem(const RomModel& rom, const Vector& q_start, double eta, double delta, double alpha,
                              const IrgnmConfig& irgnm, const TrustRegionConfig& tr);

struct AcceptDecision {
  bool accepted = false;
  double rho = 0.0;  // full-order drop over reduced drop; +inf when the reduced drop is not positive
  double eta = 0.0;  // radius for the next subproblem
};

/// Accept iff J_h strictly decreases; enlarge the radius when rho > beta2, shrink by beta3 on rejection.
AcceptDecision tr_accept(double value, double trial_value, double reduced_drop, double eta,
                         const TrustRegionConfig& tr);

struct TrRecord {
  int iteration = 0;
  double value_h = 0.0;  // J_h at the trial point
  double value_r = 0.0;  // J_r at the trial point (surrogate of this iteration)
  double eta = 0.0;      // radius used for the subproblem
  double rho = 0.0;
  bool accepted = false;
  Eigen::Index n_q = 0;
  Eigen::Index n_v = 0;
  long fom_solves = 0;
  double seconds = 0.0;
  int sub_iterations = 0;
  std::vector<double> ratios;
  EnrichmentReport enrichment;  // valid when accepted
  // Estimators at the trial point (when requested); negative otherwise.
  double delta_u = -1.0;
  double delta_j = -1.0;
  double true_state_error = -1.0;
  double true_gap = -1.0;
};

struct TrResult {
  Vector q;
  double value = 0.0;
  std::vector<TrRecord> ledger;
  std::vector<double> accepted_values;  // J_h at the start and every accepted iterate
  EnrichmentReport initial_enrichment;
  bool converged = false;
  bool failed = false;
  std::string message;
  int accepted_iterations = 0;
  int total_iterations = 0;
  Eigen::Index n_q = 0;
  Eigen::Index n_v = 0;
};

/// Adaptive trust-region reduced-basis IRGNM.
TrResult tr_irgnm(const FomModel& fom, const SparseMatrix& gram_v, const AdmissibleSet& box, double c_norm,
                  const Vector& q0, double delta, const IrgnmConfig& irgnm, const TrustRegionConfig& tr);

}  // namespace trirgnm
