#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"
#include "trirgnm/tr.hpp"

using namespace trirgnm;

namespace {

struct Surrogate {
  support::Toy toy;
  Enriched rb;
  Vector q0;
  Vector q_r0;
};

Surrogate initial_surrogate(double noise) {
  Surrogate s{support::make_toy(support::small2d_config(), noise), {}, {}, {}};
  const auto& p = s.toy.problem;
  s.q0 = Vector::Ones(p.ops.param_dim());
  const auto e = eval_objective(p.model, s.q0);
  Trajectory adj;
  const Vector g = eval_gradient(p.model, e, &adj);
  ReducedBasisPair empty{DenseMatrix(p.ops.state_dim(), 0), DenseMatrix(p.ops.param_dim(), 0), 0};
  s.rb = enrich(empty, p.model, p.ops.gram_v, p.box, {s.q0, g, e.value, &e.state, &adj}, 1e-3);
  s.q_r0 = s.rb.basis.param.transpose() * s.q0;
  return s;
}

}  // namespace

TEST(Subproblem, HugeRadiusIsPlainReducedIrgnm) {
  auto s = initial_surrogate(0.01);
  IrgnmConfig irgnm;
  TrustRegionConfig tr;
  tr.boundary_fraction = 1.0;
  tr.max_subproblem_iterations = 6;
  const auto trace = tr_subproblem(s.rb.model, s.q_r0, 1e12, s.toy.data.delta, irgnm.alpha_init, irgnm, tr);
  ASSERT_GE(trace.iterations, 1);
  EXPECT_FALSE(trace.on_boundary);
  IrgnmConfig capped = irgnm;
  capped.max_outer_iterations = trace.iterations;
  const auto plain = irgnm_run(s.rb.model, s.q_r0, s.toy.data.delta, capped);
  EXPECT_LT((plain.q - trace.q).norm(), 1e-12 * (1.0 + trace.q.norm()));
  EXPECT_DOUBLE_EQ(plain.value, trace.value);
  ASSERT_EQ(plain.ledger.size(), trace.ratios.size());
  for (std::size_t i = 0; i < trace.ratios.size(); ++i) EXPECT_DOUBLE_EQ(plain.ledger[i].ratio, trace.ratios[i]);
}

TEST(Subproblem, TinyRadiusStopsOnBoundary) {
  auto s = initial_surrogate(0.01);
  IrgnmConfig irgnm;
  TrustRegionConfig tr;
  const double eta = 1e-3;
  const auto trace = tr_subproblem(s.rb.model, s.q_r0, eta, s.toy.data.delta, irgnm.alpha_init, irgnm, tr);
  EXPECT_TRUE(trace.on_boundary);
  EXPECT_LE((trace.q - s.q_r0).norm(), eta);
  EXPECT_LE(trace.value, trace.start_value);
}

TEST(Subproblem, StopsAtReducedDiscrepancy) {
  auto s = initial_surrogate(0.01);
  IrgnmConfig irgnm;
  TrustRegionConfig tr;
  const double start = eval_objective(s.rb.model, s.q_r0).value;
  const double delta = 2.0 * std::sqrt(2.0 * start) / irgnm.tau;
  const auto trace = tr_subproblem(s.rb.model, s.q_r0, 1.0, delta, irgnm.alpha_init, irgnm, tr);
  EXPECT_TRUE(trace.reached_discrepancy);
  EXPECT_EQ(trace.iterations, 0);
  EXPECT_EQ(trace.q, s.q_r0);
  // A separate reduced factor takes precedence over tau.
  tr.tau_tilde = 0.5 * irgnm.tau;
  EXPECT_FALSE(tr_subproblem(s.rb.model, s.q_r0, 1.0, 0.5 * delta, irgnm.alpha_init, irgnm, tr).reached_discrepancy);
}

TEST(Acceptance, NoDecreaseIsRejected) {
  TrustRegionConfig tr;
  const auto d = tr_accept(2.0, 2.0, 0.5, 1.0, tr);
  EXPECT_FALSE(d.accepted);
  EXPECT_DOUBLE_EQ(d.eta, tr.beta3 * 1.0);
  EXPECT_DOUBLE_EQ(d.rho, 0.0);
}

TEST(Acceptance, ExactSurrogateEnlargesRadius) {
  TrustRegionConfig tr;
  const auto d = tr_accept(2.0, 1.5, 0.5, 0.5, tr);
  EXPECT_TRUE(d.accepted);
  EXPECT_DOUBLE_EQ(d.rho, 1.0);
  EXPECT_DOUBLE_EQ(d.eta, 1.0);
  // Capped at eta_max.
  EXPECT_DOUBLE_EQ(tr_accept(2.0, 1.5, 0.5, 1.8, tr).eta, tr.eta_max);
}

TEST(Acceptance, PoorAgreementKeepsRadius) {
  TrustRegionConfig tr;
  const auto d = tr_accept(2.0, 1.9, 0.5, 0.7, tr);
  EXPECT_TRUE(d.accepted);
  EXPECT_NEAR(d.rho, 0.2, 1e-14);
  EXPECT_DOUBLE_EQ(d.eta, 0.7);
}

TEST(Acceptance, AdversarialSurrogateShrinksRadius) {
  TrustRegionConfig tr;
  const auto d = tr_accept(1.0, 3.0, 0.9, 0.8, tr);
  EXPECT_FALSE(d.accepted);
  EXPECT_LT(d.rho, 0.0);
  EXPECT_DOUBLE_EQ(d.eta, 0.8 * tr.beta3);
  const auto flat = tr_accept(1.0, 0.9, 0.0, 0.8, tr);
  EXPECT_TRUE(std::isinf(flat.rho));
  EXPECT_TRUE(flat.accepted);
}

TEST(Config, RejectsBadParameters) {
  TrustRegionConfig tr;
  EXPECT_NO_THROW(tr.validate());
  tr.beta2 = 0.5;
  EXPECT_THROW(tr.validate(), ConfigError);
  tr = {};
  tr.eta0 = 3.0;
  EXPECT_THROW(tr.validate(), ConfigError);
  tr = {};
  tr.beta3 = 1.0;
  EXPECT_THROW(tr.validate(), ConfigError);
}

TEST(TrustRegion, LargeNoiseLevelReturnsImmediately) {
  auto toy = support::make_toy(support::toy4_config(), 0.0);
  const auto& p = toy.problem;
  const Vector q0 = Vector::Ones(4);
  const double j0 = eval_objective(p.model, q0).value;
  const auto r = tr_irgnm(p.model, p.ops.gram_v, p.box, p.obs.norm, q0, 2.0 * std::sqrt(2.0 * j0), IrgnmConfig{},
                          TrustRegionConfig{});
  EXPECT_TRUE(r.converged);
  EXPECT_TRUE(r.ledger.empty());
  EXPECT_EQ(r.q, q0);
}

TEST(TrustRegion, SmallProblemRunIsMonotoneAndConsistent) {
  auto toy = support::make_toy(support::small2d_config(), 0.01);
  const auto& p = toy.problem;
  IrgnmConfig irgnm;
  TrustRegionConfig tr;
  tr.report_estimators = true;
  const auto r = tr_irgnm(p.model, p.ops.gram_v, p.box, p.obs.norm, Vector::Ones(p.ops.param_dim()), toy.data.delta,
                          irgnm, tr);
  ASSERT_FALSE(r.failed) << r.message;
  EXPECT_TRUE(r.converged) << r.message;
  EXPECT_LE(r.value, 0.5 * std::pow(irgnm.tau * toy.data.delta, 2));
  for (std::size_t i = 1; i < r.accepted_values.size(); ++i) EXPECT_LT(r.accepted_values[i], r.accepted_values[i - 1]);
  EXPECT_LE(r.initial_enrichment.value_gap, 1e-8);
  EXPECT_LE(r.initial_enrichment.gradient_gap, 1e-8);
  double eta = tr.eta0;
  for (const auto& rec : r.ledger) {
    EXPECT_DOUBLE_EQ(rec.eta, eta) << "iteration " << rec.iteration;
    EXPECT_LE(rec.eta, tr.eta_max);
    if (rec.accepted) {
      EXPECT_LE(rec.enrichment.value_gap, 1e-8);
      EXPECT_LE(rec.enrichment.gradient_gap, 1e-8);
      eta = rec.rho > tr.beta2 ? std::min(tr.eta_max, rec.eta / tr.beta3) : rec.eta;
    } else {
      eta = rec.eta * tr.beta3;
    }
    // Estimators certify each trial point.
    EXPECT_LE(rec.true_state_error, rec.delta_u);
    EXPECT_LE(rec.true_gap, rec.delta_j);
  }
}
