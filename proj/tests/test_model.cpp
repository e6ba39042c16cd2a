#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <cmath>

#include "support.hpp"
#include "trirgnm/model.hpp"

using namespace trirgnm;

namespace {

// Independent Q1 assembly of the homogeneous elastic form with the two-point Gauss rule.
DenseMatrix gauss_homogeneous_stiffness(const Grid& grid, double lambda, double mu) {
  const int dim = grid.dimension();
  const int corners = 1 << dim;
  const double gp[2] = {0.5 - 0.5 / std::sqrt(3.0), 0.5 + 0.5 / std::sqrt(3.0)};
  DenseMatrix k = DenseMatrix::Zero(grid.dof_count(), grid.dof_count());
  const int points = 1 << dim;
  for (int e = 0; e < grid.element_count(); ++e) {
    const auto nodes = grid.element_nodes(e);
    for (int p = 0; p < points; ++p) {
      double xi[3];
      for (int a = 0; a < dim; ++a) xi[a] = gp[(p >> a) & 1];
      double w = grid.element_measure() / points;
      std::vector<std::array<double, 3>> grad(corners);
      for (int c = 0; c < corners; ++c) {
        for (int a = 0; a < dim; ++a) {
          double v = ((c >> a) & 1) ? 1.0 : -1.0;
          for (int b = 0; b < dim; ++b)
            if (b != a) v *= ((c >> b) & 1) ? xi[b] : 1.0 - xi[b];
          grad[c][a] = v / grid.spacing(a);
        }
      }
      for (int a = 0; a < corners; ++a)
        for (int b = 0; b < corners; ++b)
          for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) {
              const int r = grid.dof(nodes[a], i);
              const int s = grid.dof(nodes[b], j);
              if (r < 0 || s < 0) continue;
              // sigma(phi_b e_j) : grad(phi_a e_i)
              double v = lambda * grad[a][i] * grad[b][j] + mu * grad[a][j] * grad[b][i];
              if (i == j)
                for (int c = 0; c < dim; ++c) v += mu * grad[a][c] * grad[b][c];
              k(r, s) += w * v;
            }
    }
  }
  return k;
}

MaterialSpec unit_material(double lambda, double mu, ParameterLayer layer = ParameterLayer::all_nodes) {
  MaterialSpec m;
  m.lame_lambda = lambda;
  m.lame_mu = mu;
  m.density = 1.0;
  m.layer = layer;
  return m;
}

}  // namespace

TEST(Assembly, UnitCubeLumpedMassIsOneEighthPerNode) {
  Grid grid(3, {0, 0, 0}, {1, 1, 1}, {1, 1, 1}, {});
  const auto ops = assemble_operators(grid, unit_material(1.0, 1.0));
  ASSERT_EQ(ops.state_dim(), 24);
  // Oracle: row sums of the consistent trilinear mass, i.e. the integral of each shape function,
  // computed with the two-point Gauss rule (exact for trilinear integrands).
  const double gp[2] = {0.5 - 0.5 / std::sqrt(3.0), 0.5 + 0.5 / std::sqrt(3.0)};
  for (int node = 0; node < 8; ++node) {
    const auto m = grid.node_multi_index(node);
    double integral = 0.0;
    for (int p = 0; p < 8; ++p) {
      double v = 1.0 / 8.0;
      for (int a = 0; a < 3; ++a) {
        const double x = gp[(p >> a) & 1];
        v *= m[a] ? x : 1.0 - x;
      }
      integral += v;
    }
    for (int c = 0; c < 3; ++c) {
      const int d = grid.dof(node, c);
      EXPECT_NEAR(ops.mass_h.coeff(d, d), integral, 1e-15);
      EXPECT_NEAR(ops.mass_h.coeff(d, d), 0.125, 1e-15);
    }
  }
  EXPECT_EQ(ops.mass_h.nonZeros(), 24);
}

TEST(Assembly, UnitParameterReproducesHomogeneousStiffness2D) {
  Grid grid(2, {0, 0, 0}, {3, 1, 0}, {3, 2, 0}, {Face{0, 0}});
  const auto ops = assemble_operators(grid, unit_material(1.7, 0.6));
  const DenseMatrix a = DenseMatrix(evaluate_operator(ops, Vector::Ones(ops.param_dim())));
  const DenseMatrix oracle = gauss_homogeneous_stiffness(grid, 1.7, 0.6);
  EXPECT_LT((a - oracle).cwiseAbs().maxCoeff(), 1e-12 * oracle.cwiseAbs().maxCoeff());
}

TEST(Assembly, UnitParameterReproducesHomogeneousStiffness3DWithFrozenNodes) {
  Grid grid(3, {0, 0, 0}, {1, 2, 1}, {2, 2, 1}, {Face{0, 1}});
  const auto ops = assemble_operators(grid, unit_material(2.0, 0.9, ParameterLayer::lower_face));
  EXPECT_EQ(ops.param_dim(), 6);
  const DenseMatrix a = DenseMatrix(evaluate_operator(ops, Vector::Ones(ops.param_dim())));
  const DenseMatrix oracle = gauss_homogeneous_stiffness(grid, 2.0, 0.9);
  EXPECT_LT((a - oracle).cwiseAbs().maxCoeff(), 1e-12 * oracle.cwiseAbs().maxCoeff());
}

TEST(Assembly, CoercivityAgainstSymmetricGradientGram) {
  Grid grid(3, {0, 0, 0}, {1, 1, 1}, {2, 2, 2}, {Face{0, 0}});
  const double mu = 0.7;
  const auto ops = assemble_operators(grid, unit_material(1.3, mu));
  const SparseMatrix d = assemble_symmetric_gradient_gram(grid);
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const Vector q = support::random_vector(ops.param_dim(), rng, 0.2, 3.0);
    const SparseMatrix a = evaluate_operator(ops, q);
    for (int s = 0; s < 5; ++s) {
      const Vector v = support::random_vector(ops.state_dim(), rng);
      EXPECT_GE(v.dot(a * v), 2.0 * mu * q.minCoeff() * v.dot(d * v) * (1.0 - 1e-12));
    }
  }
}

TEST(Assembly, StiffnessIsPositiveDefiniteForAdmissibleParameters) {
  Grid grid(2, {0, 0, 0}, {2, 2, 0}, {4, 4, 0}, {Face{1, 0}});
  const auto ops = assemble_operators(grid, unit_material(1.0, 1.0));
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const Vector q = support::random_vector(ops.param_dim(), rng, 1e-3, 5.0);
    Eigen::SelfAdjointEigenSolver<DenseMatrix> eig(DenseMatrix(evaluate_operator(ops, q)));
    EXPECT_GT(eig.eigenvalues().minCoeff(), 0.0);
  }
}

TEST(Operator, AffineEvaluation) {
  auto cfg = support::toy4_config();
  Problem p = build_problem(cfg);
  const auto n = p.ops.param_dim();
  ASSERT_EQ(n, 4);
  const DenseMatrix a0 = DenseMatrix(evaluate_operator(p.ops, Vector::Zero(n)));
  EXPECT_LT((a0 - DenseMatrix(p.ops.stiffness.constant_part())).norm(), 1e-14);
  std::vector<DenseMatrix> comps;
  for (Eigen::Index k = 0; k < n; ++k) {
    const DenseMatrix ak = DenseMatrix(evaluate_operator(p.ops, Vector::Unit(n, k)));
    comps.push_back(ak - a0);
    EXPECT_GT(comps.back().norm(), 0.0);
  }
  // Dense summation oracle at a random parameter.
  std::mt19937_64 rng(5);
  const Vector q = support::random_vector(n, rng, 0.1, 4.0);
  DenseMatrix oracle = a0;
  for (Eigen::Index k = 0; k < n; ++k) oracle += q[k] * comps[k];
  EXPECT_LT((DenseMatrix(evaluate_operator(p.ops, q)) - oracle).norm(), 1e-12 * oracle.norm());
}

TEST(Operator, ParameterJacobian) {
  Problem p = build_problem(support::toy4_config());
  const auto n = p.ops.param_dim();
  const auto N = p.ops.state_dim();
  EXPECT_EQ(assemble_parameter_jacobian(p.ops, Vector::Zero(N)).norm(), 0.0);
  std::mt19937_64 rng(9);
  const Vector u = support::random_vector(N, rng);
  const Vector w = support::random_vector(N, rng);
  const Vector q = support::random_vector(n, rng, 0.5, 2.0);
  const Vector d = support::random_vector(n, rng);
  const DenseMatrix b = assemble_parameter_jacobian(p.ops, u);
  for (Eigen::Index j = 0; j < n; ++j) {
    EXPECT_LT((b.col(j) - p.ops.stiffness.apply_component(j, u)).norm(), 1e-14 * (1.0 + b.col(j).norm()));
  }
  const double h = 1e-4;
  auto form = [&](const Vector& x) { return w.dot(evaluate_operator(p.ops, x) * u); };
  const double fd = (form(q + h * d) - form(q - h * d)) / (2 * h);
  const double exact = w.dot(b * d);
  EXPECT_NEAR(fd, exact, 1e-7 * std::abs(exact));
}

TEST(Observation, FullFieldIsIdentity) {
  Problem p = build_problem(support::toy4_config());
  EXPECT_EQ(p.obs.kind, ObservationKind::full_field);
  EXPECT_EQ(p.obs.norm, 1.0);
  EXPECT_EQ((DenseMatrix(p.obs.c) - DenseMatrix::Identity(p.ops.state_dim(), p.ops.state_dim())).norm(), 0.0);
}

TEST(Observation, CornerSensorsIntegrateConstantOverFace) {
  Grid grid(3, {0, 0, 0}, {0.5, 2.0, 3.0}, {1, 1, 1}, {Face{0, 1}});
  const auto ops = assemble_operators(grid, unit_material(1.0, 1.0, ParameterLayer::lower_face));
  ObservationSpec spec;
  spec.kind = ObservationKind::sensors;
  spec.component = 1;
  spec.surface = Face{0, 0};
  spec.positions = {{0, 0, 0}, {0, 2, 0}, {0, 0, 3}, {0, 2, 3}};
  const auto obs = assemble_observation(grid, ops, spec);
  Vector v = Vector::Zero(ops.state_dim());
  for (int n = 0; n < grid.node_count(); ++n)
    if (grid.dof(n, 1) >= 0) v[grid.dof(n, 1)] = 0.75;
  EXPECT_NEAR((obs.c * v).sum(), 2.0 * 3.0 * 0.75, 1e-14);
}

TEST(Observation, SensorNormMatchesDenseEigenOracle) {
  Grid grid(3, {-0.1, -3, -3}, {0.1, 3, 3}, {1, 6, 6}, {Face{1, 0}, Face{1, 1}, Face{2, 0}, Face{2, 1}});
  const auto ops = assemble_operators(grid, unit_material(1.0, 1.0, ParameterLayer::lower_face));
  ObservationSpec spec;
  spec.kind = ObservationKind::sensors;
  spec.positions = grid_layout(grid, {-2, 0, 2}, -0.1);
  const auto obs = assemble_observation(grid, ops, spec);
  // max_v |Cv|^2 / v^T M_V v as a dense generalized eigenproblem.
  const DenseMatrix c = DenseMatrix(obs.c);
  Eigen::GeneralizedSelfAdjointEigenSolver<DenseMatrix> ges(c.transpose() * c, DenseMatrix(ops.gram_v));
  EXPECT_NEAR(obs.norm, std::sqrt(ges.eigenvalues().maxCoeff()), 1e-10 * obs.norm);
}

TEST(Observation, GridLayoutOnDeskPlateHas64Sensors) {
  Grid grid(3, {-0.1, -15, -15}, {0.1, 15, 15}, {1, 30, 30}, {Face{1, 0}, Face{1, 1}, Face{2, 0}, Face{2, 1}});
  const auto ops = assemble_operators(grid, unit_material(1.0, 1.0, ParameterLayer::lower_face));
  ObservationSpec spec;
  spec.kind = ObservationKind::sensors;
  spec.positions = grid_layout(grid, {-14, -10, -6, -2, 2, 6, 10, 14}, -0.1);
  const auto obs = assemble_observation(grid, ops, spec);
  EXPECT_EQ(obs.rows(), 64);
  spec.positions = edge_layout(grid, 14, 1, -0.1);
  EXPECT_EQ(assemble_observation(grid, ops, spec).rows(), 112);
}

TEST(Observation, InvalidSensorsAreConfigErrors) {
  Grid grid(3, {-0.1, -3, -3}, {0.1, 3, 3}, {1, 6, 6}, {Face{1, 0}, Face{1, 1}, Face{2, 0}, Face{2, 1}});
  const auto ops = assemble_operators(grid, unit_material(1.0, 1.0, ParameterLayer::lower_face));
  ObservationSpec spec;
  spec.kind = ObservationKind::sensors;
  spec.positions = {{-0.1, 0.5, 0.0}};
  EXPECT_THROW(assemble_observation(grid, ops, spec), ConfigError);  // between nodes
  spec.positions = {{0.1, 0.0, 0.0}};
  EXPECT_THROW(assemble_observation(grid, ops, spec), ConfigError);  // wrong face
  spec.positions = {{-0.1, 3.0, 0.0}};
  EXPECT_THROW(assemble_observation(grid, ops, spec), ConfigError);  // clamped
}

TEST(Load, ZeroTemporalSignalGivesZeroTrajectory) {
  auto cfg = support::small2d_config();
  cfg.load.frequency = 0.0;
  Problem p = build_problem(cfg);
  EXPECT_EQ(p.load.norm(), 0.0);
}

TEST(Load, ConstantUnitLoadIntegratesToVolume) {
  Grid grid(3, {0, 0, 0}, {1.5, 2, 0.5}, {3, 4, 2}, {});
  MaterialSpec m = unit_material(1.0, 1.0);
  const auto ops = assemble_operators(grid, m);
  std::vector<std::array<double, 3>> ones(grid.node_count(), {1.0, 1.0, 1.0});
  const Vector f = lumped_nodal_load(grid, ops, ones);
  for (int c = 0; c < 3; ++c) {
    double s = 0.0;
    for (int n = 0; n < grid.node_count(); ++n) s += f[grid.dof(n, c)];
    EXPECT_NEAR(s, 1.5 * 2.0 * 0.5, 1e-13);
  }
}

TEST(Load, SeparableBurstIsLocalized) {
  auto cfg = support::small2d_config(12);
  cfg.load.half_width = 1.0;
  cfg.load.center = {0.5, -1.0};
  Problem p = build_problem(cfg);
  bool any = false;
  for (int n = 0; n < p.grid.node_count(); ++n) {
    const auto x = p.grid.node_coordinate(n);
    const bool inside = std::abs(x[0] - 0.5) < 1.0 && std::abs(x[1] + 1.0) < 1.0;
    for (int c = 0; c < 2; ++c) {
      const int d = p.grid.dof(n, c);
      if (d < 0) continue;
      const double mag = p.load.row(d).cwiseAbs().maxCoeff();
      if (!inside) EXPECT_EQ(mag, 0.0);
      any = any || mag > 0.0;
    }
  }
  EXPECT_TRUE(any);
}

TEST(Admissible, Projection) {
  const auto box = AdmissibleSet::box(5, 1e-20, 1e20);
  Vector q(5);
  q << 1, 2, 3, 0.5, 7;
  EXPECT_EQ(box.project(q), q);
  q[2] = -1.0;
  EXPECT_EQ(box.project(q)[2], 1e-20);
  const auto tight = AdmissibleSet::box(5, 0.5, 2.0);
  std::mt19937_64 rng(1);
  for (int i = 0; i < 100; ++i) {
    const Vector x = support::random_vector(5, rng, -5, 5);
    const Vector px = tight.project(x);
    EXPECT_EQ(tight.project(px), px);
    EXPECT_TRUE(tight.contains(px));
    const Vector y = support::random_vector(5, rng, -5, 5);
    EXPECT_LE((px - tight.project(y)).norm(), (x - y).norm() + 1e-15);
  }
  EXPECT_THROW(AdmissibleSet::box(3, 2.0, 1.0), ConfigError);
}

TEST(Material, InvalidConstantsRejected) {
  MaterialSpec m;
  m.lame_mu = -1.0;
  EXPECT_THROW(m.validate(), ConfigError);
  MaterialSpec s;
  s.time_scale = 2.0;
  s.length_scale = 4.0;
  EXPECT_DOUBLE_EQ(s.effective_lambda(), s.lame_lambda / 4.0);
}
