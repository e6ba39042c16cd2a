#pragma once

#include <array>
#include <vector>

#include "trirgnm/affine_family.hpp"
#include "trirgnm/grid.hpp"

namespace trirgnm {

/// Which B-spline coefficients are optimization parameters; the rest are frozen at 1.
enum class ParameterLayer {
  all_nodes,   // every grid node carries a free coefficient (2D analog)
  lower_face,  // only nodes on the lower end of axis 0 (the plate's upper surface in 3D)
};

struct MaterialSpec {
  double lame_lambda = 2.18e10;
  double lame_mu = 1.12e10;
  double density = 2.70e3;
  /// Stiffness is multiplied by (time_scale / length_scale)^2 to map SI constants onto
  /// nondimensional grid and time units.
  double time_scale = 1.0;
  double length_scale = 1.0;
  ParameterLayer layer = ParameterLayer::all_nodes;

  double effective_lambda() const;
  double effective_mu() const;
  void validate() const;
};

/// Box constraint lower <= q <= upper, componentwise.
struct AdmissibleSet {
  Vector lower;
  Vector upper;

  static AdmissibleSet box(Eigen::Index n, double lower = 1e-20, double upper = 1e20);
  bool contains(const Vector& q, double slack = 0.0) const;
  Vector project(const Vector& q) const;
};

/// The full-order operator family plus the Gram matrices that define all norms.
struct OperatorFamily {
  SparseAffineFamily stiffness;  // A(q) = A_0 + sum_p q_p A_p
  SparseMatrix mass_h;           // density-free lumped L2 Gram, diagonal
  SparseMatrix gram_v;           // M_H + vector Laplacian Gram
  /// Node index of each parameter; param_of_node is -1 for frozen nodes.
  std::vector<int> node_of_param;
  std::vector<int> param_of_node;
  double density = 1.0;

  Eigen::Index state_dim() const { return stiffness.state_dim(); }
  Eigen::Index param_dim() const { return stiffness.param_dim(); }
  /// M_Q is the identity on coefficient space.
  Vector gram_q_apply(const Vector& q) const { return q; }
};

/// Element stiffness of the weighted linear-elastic form on one cell, one matrix per corner
/// weight function. Entry [(a*dim+i), (b*dim+j)] couples corner a comp i with corner b comp j.
std::vector<DenseMatrix> corner_weighted_stiffness(const Grid& grid, double lambda, double mu);

OperatorFamily assemble_operators(const Grid& grid, const MaterialSpec& material);

/// Symmetric-gradient Gram  int eps(u):eps(v)  on the free DoFs (homogeneous weight).
SparseMatrix assemble_symmetric_gradient_gram(const Grid& grid);

SparseMatrix evaluate_operator(const OperatorFamily& family, const Vector& q);

/// B_h(u): column j is A_j u.
DenseMatrix assemble_parameter_jacobian(const OperatorFamily& family, const Vector& u);

enum class ObservationKind { full_field, sensors };

struct ObservationSpec {
  ObservationKind kind = ObservationKind::full_field;
  /// Sensor positions (grid-node coordinates). Ignored for full-field observation.
  std::vector<std::array<double, 3>> positions;
  /// Displacement component read by each sensor.
  int component = 0;
  /// Measurement surface for 3D grids. 2D grids measure on the whole domain.
  Face surface{0, 0};
};

struct Observation {
  ObservationKind kind = ObservationKind::full_field;
  SparseMatrix c;        // C_h, N_C x N_V
  SparseMatrix gram;     // M_C
  SparseMatrix misfit;   // C_h^T M_C C_h
  SparseMatrix data_map; // C_h^T M_C
  double norm = 1.0;     // ||C|| as a map from (V, M_V) to (C, M_C)

  Eigen::Index rows() const { return c.rows(); }
};

Observation assemble_observation(const Grid& grid, const OperatorFamily& family, const ObservationSpec& spec);

/// E_grid-style layout: every combination of `coordinates` on the two lateral axes.
std::vector<std::array<double, 3>> grid_layout(const Grid& grid, const std::vector<double>& coordinates,
                                               double normal_coordinate);
/// E_edge-style layout: the boundary lines of the square [-e, e]^2 sampled at spacing `step`.
std::vector<std::array<double, 3>> edge_layout(const Grid& grid, double extent, double step,
                                               double normal_coordinate);

struct TimeGrid {
  int steps = 32;
  double horizon = 16.0;
  double zeta = 0.5;

  double dt() const { return horizon / steps; }
  double time(int k) const { return k * dt(); }
  void validate() const;
};

/// Separable excitation l(t,x) = amplitude * l_t(t) * l_y(y) * l_z(z) * direction.
struct LoadSignal {
  /// Gaussian-windowed sine: sin(2 pi f (t - t0)) exp(-(t - t0)^2 / (2 s^2)).
  double frequency = 0.15;
  double onset = 3.0;
  double width = 1.5;
  /// cos^2 bump of the given half-width centred on each lateral axis.
  std::array<double, 2> center{0.0, 0.0};
  double half_width = 3.0;
  std::array<double, 3> direction{1.0, 0.0, 0.0};
  double amplitude = 1.0;

  double temporal(double t) const;
  double lateral(double offset) const;
};

/// Column k is M_H times the nodal interpolant of l(t^k).
DenseMatrix assemble_load(const Grid& grid, const OperatorFamily& family, const LoadSignal& signal,
                          const TimeGrid& times);

/// Same, for an arbitrary nodal field given per (node, component); used by tests and manufactured solutions.
Vector lumped_nodal_load(const Grid& grid, const OperatorFamily& family,
                         const std::vector<std::array<double, 3>>& nodal_values);

}  // namespace trirgnm
