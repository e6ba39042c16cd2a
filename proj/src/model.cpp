#include "trirgnm/model.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>
#include <cmath>
#include <numbers>

#include "trirgnm/errors.hpp"

namespace trirgnm {

namespace {

// Three-point Gauss-Lobatto rule on [0,1]; exact for the cubic integrands of the weighted stiffness.
constexpr std::array<double, 3> kLobattoPoints{0.0, 0.5, 1.0};
constexpr std::array<double, 3> kLobattoWeights{1.0 / 6.0, 4.0 / 6.0, 1.0 / 6.0};

double shape(int corner, const std::array<double, 3>& xi, int dim) {
  double v = 1.0;
  for (int a = 0; a < dim; ++a) v *= ((corner >> a) & 1) ? xi[a] : 1.0 - xi[a];
  return v;
}

std::array<double, 3> shape_gradient(int corner, const std::array<double, 3>& xi, int dim,
                                     const std::array<double, 3>& h) {
  std::array<double, 3> g{0, 0, 0};
  for (int a = 0; a < dim; ++a) {
    double v = ((corner >> a) & 1) ? 1.0 : -1.0;
    for (int b = 0; b < dim; ++b)
      if (b != a) v *= ((corner >> b) & 1) ? xi[b] : 1.0 - xi[b];
    g[a] = v / h[a];
  }
  return g;
}

// Visits every tensor quadrature point with its physical weight.
template <typename F>
void for_each_quadrature_point(const Grid& grid, F&& visit) {
  const int dim = grid.dimension();
  const int n = dim == 2 ? 9 : 27;
  const double measure = grid.element_measure();
  for (int q = 0; q < n; ++q) {
    std::array<double, 3> xi{0, 0, 0};
    double w = measure;
    int rest = q;
    for (int a = 0; a < dim; ++a) {
      xi[a] = kLobattoPoints[rest % 3];
      w *= kLobattoWeights[rest % 3];
      rest /= 3;
    }
    visit(xi, w);
  }
}

std::array<double, 3> spacings(const Grid& grid) {
  std::array<double, 3> h{1, 1, 1};
  for (int a = 0; a < grid.dimension(); ++a) h[a] = grid.spacing(a);
  return h;
}

// Element matrix of int w * grad phi_a . grad phi_b (same component), homogeneous weight.
DenseMatrix element_vector_laplacian(const Grid& grid) {
  const int dim = grid.dimension();
  const int corners = 1 << dim;
  const auto h = spacings(grid);
  DenseMatrix k = DenseMatrix::Zero(corners * dim, corners * dim);
  for_each_quadrature_point(grid, [&](const std::array<double, 3>& xi, double w) {
    for (int a = 0; a < corners; ++a) {
      const auto ga = shape_gradient(a, xi, dim, h);
      for (int b = 0; b < corners; ++b) {
        const auto gb = shape_gradient(b, xi, dim, h);
        double dot = 0.0;
        for (int c = 0; c < dim; ++c) dot += ga[c] * gb[c];
        for (int i = 0; i < dim; ++i) k(a * dim + i, b * dim + i) += w * dot;
      }
    }
  });
  return k;
}

SparseMatrix assemble_element_matrix(const Grid& grid, const DenseMatrix& local) {
  const int dim = grid.dimension();
  const int corners = 1 << dim;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(grid.element_count()) * local.size());
  for (int e = 0; e < grid.element_count(); ++e) {
    const auto nodes = grid.element_nodes(e);
    for (int a = 0; a < corners; ++a)
      for (int i = 0; i < dim; ++i) {
        const int row = grid.dof(nodes[a], i);
        if (row < 0) continue;
        for (int b = 0; b < corners; ++b)
          for (int j = 0; j < dim; ++j) {
            const int col = grid.dof(nodes[b], j);
            if (col < 0) continue;
            const double v = local(a * dim + i, b * dim + j);
            if (v != 0.0) trip.emplace_back(row, col, v);
          }
      }
  }
  SparseMatrix m(grid.dof_count(), grid.dof_count());
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

// Lumped (trapezoidal) measure of a node restricted to the given axes.
double lumped_weight(const Grid& grid, int node, const std::vector<int>& axes) {
  const auto m = grid.node_multi_index(node);
  double w = 1.0;
  for (int a : axes) {
    const bool end = m[a] == 0 || m[a] == grid.cells(a);
    w *= grid.spacing(a) * (end ? 0.5 : 1.0);
  }
  return w;
}

}  // namespace

double MaterialSpec::effective_lambda() const {
  const double s = time_scale / length_scale;
  return lame_lambda * s * s;
}

double MaterialSpec::effective_mu() const {
  const double s = time_scale / length_scale;
  return lame_mu * s * s;
}

void MaterialSpec::validate() const {
  if (!(lame_lambda > 0.0) || !(lame_mu > 0.0) || !(density > 0.0))
    throw ConfigError("material constants must be positive");
  if (!(time_scale > 0.0) || !(length_scale > 0.0)) throw ConfigError("material scales must be positive");
}

AdmissibleSet AdmissibleSet::box(Eigen::Index n, double lower, double upper) {
  if (!(lower <= upper)) throw ConfigError("admissible box has lower > upper");
  return {Vector::Constant(n, lower), Vector::Constant(n, upper)};
}

bool AdmissibleSet::contains(const Vector& q, double slack) const {
  if (q.size() != lower.size()) return false;
  for (Eigen::Index i = 0; i < q.size(); ++i)
    if (!(q[i] >= lower[i] - slack && q[i] <= upper[i] + slack)) return false;
  return true;
}

Vector AdmissibleSet::project(const Vector& q) const {
  require(q.size() == lower.size(), "project_admissible: length mismatch");
  return q.cwiseMax(lower).cwiseMin(upper);
}

std::vector<DenseMatrix> corner_weighted_stiffness(const Grid& grid, double lambda, double mu) {
  const int dim = grid.dimension();
  const int corners = 1 << dim;
  const auto h = spacings(grid);
  std::vector<DenseMatrix> out(corners, DenseMatrix::Zero(corners * dim, corners * dim));
  for_each_quadrature_point(grid, [&](const std::array<double, 3>& xi, double w) {
    std::vector<std::array<double, 3>> g(corners);
    for (int a = 0; a < corners; ++a) g[a] = shape_gradient(a, xi, dim, h);
    DenseMatrix k = DenseMatrix::Zero(corners * dim, corners * dim);
    for (int a = 0; a < corners; ++a)
      for (int b = 0; b < corners; ++b) {
        double dot = 0.0;
        for (int c = 0; c < dim; ++c) dot += g[a][c] * g[b][c];
        for (int i = 0; i < dim; ++i)
          for (int j = 0; j < dim; ++j) {
            double v = lambda * g[a][i] * g[b][j] + mu * g[a][j] * g[b][i];
            if (i == j) v += mu * dot;
            k(a * dim + i, b * dim + j) = v;
          }
      }
    for (int c = 0; c < corners; ++c) out[c] += (w * shape(c, xi, dim)) * k;
  });
  return out;
}

OperatorFamily assemble_operators(const Grid& grid, const MaterialSpec& material) {
  material.validate();
  if (!(grid.element_measure() > 0.0)) throw SolverError("assembly: degenerate cell");
  const int dim = grid.dimension();
  const int corners = 1 << dim;

  OperatorFamily fam;
  fam.density = material.density;
  fam.param_of_node.assign(grid.node_count(), -1);
  for (int n = 0; n < grid.node_count(); ++n) {
    const bool free = material.layer == ParameterLayer::all_nodes || grid.node_multi_index(n)[0] == 0;
    if (free) {
      fam.param_of_node[n] = static_cast<int>(fam.node_of_param.size());
      fam.node_of_param.push_back(n);
    }
  }

  const auto local = corner_weighted_stiffness(grid, material.effective_lambda(), material.effective_mu());
  SparseAffineFamily::Builder builder(grid.dof_count(), static_cast<int>(fam.node_of_param.size()));
  DenseMatrix frozen(corners * dim, corners * dim);
  for (int e = 0; e < grid.element_count(); ++e) {
    const auto nodes = grid.element_nodes(e);
    frozen.setZero();
    bool any_frozen = false;
    auto scatter = [&](int parameter, const DenseMatrix& k) {
      for (int a = 0; a < corners; ++a)
        for (int i = 0; i < dim; ++i) {
          const int row = grid.dof(nodes[a], i);
          if (row < 0) continue;
          for (int b = 0; b < corners; ++b)
            for (int j = 0; j < dim; ++j) {
              const int col = grid.dof(nodes[b], j);
              if (col < 0) continue;
              const double v = k(a * dim + i, b * dim + j);
              if (v != 0.0) builder.add(parameter, row, col, v);
            }
        }
    };
    for (int c = 0; c < corners; ++c) {
      const int p = fam.param_of_node[nodes[c]];
      if (p >= 0) {
        scatter(p, local[c]);
      } else {
        frozen += local[c];
        any_frozen = true;
      }
    }
    if (any_frozen) scatter(-1, frozen);
  }
  fam.stiffness = std::move(builder).build();

  std::vector<int> all_axes;
  for (int a = 0; a < dim; ++a) all_axes.push_back(a);
  fam.mass_h.resize(grid.dof_count(), grid.dof_count());
  std::vector<Eigen::Triplet<double>> diag;
  for (int n = 0; n < grid.node_count(); ++n) {
    const double w = lumped_weight(grid, n, all_axes);
    for (int i = 0; i < dim; ++i) {
      const int d = grid.dof(n, i);
      if (d >= 0) diag.emplace_back(d, d, w);
    }
  }
  fam.mass_h.setFromTriplets(diag.begin(), diag.end());
  fam.gram_v = fam.mass_h + assemble_element_matrix(grid, element_vector_laplacian(grid));
  return fam;
}

SparseMatrix assemble_symmetric_gradient_gram(const Grid& grid) {
  const auto local = corner_weighted_stiffness(grid, 0.0, 0.5);
  DenseMatrix sum = DenseMatrix::Zero(local[0].rows(), local[0].cols());
  for (const auto& k : local) sum += k;
  return assemble_element_matrix(grid, sum);
}

SparseMatrix evaluate_operator(const OperatorFamily& family, const Vector& q) {
  return family.stiffness.evaluate(q);
}

DenseMatrix assemble_parameter_jacobian(const OperatorFamily& family, const Vector& u) {
  require(u.size() == family.state_dim(), "assemble_parameter_jacobian: state length mismatch");
  DenseMatrix b(family.state_dim(), family.param_dim());
  for (Eigen::Index j = 0; j < family.param_dim(); ++j) b.col(j) = family.stiffness.apply_component(j, u);
  return b;
}

Observation assemble_observation(const Grid& grid, const OperatorFamily& family, const ObservationSpec& spec) {
  Observation obs;
  obs.kind = spec.kind;
  const auto n = family.state_dim();
  if (spec.kind == ObservationKind::full_field) {
    obs.c.resize(n, n);
    obs.c.setIdentity();
    obs.gram = family.gram_v;
    obs.misfit = family.gram_v;
    obs.data_map = family.gram_v;
    obs.norm = 1.0;
    return obs;
  }

  const int dim = grid.dimension();
  if (spec.component < 0 || spec.component >= dim) throw ConfigError("sensor component out of range");
  if (spec.positions.empty()) throw ConfigError("sensor layout is empty");
  std::vector<int> surface_axes;
  for (int a = 0; a < dim; ++a)
    if (dim == 2 || a != spec.surface.axis) surface_axes.push_back(a);

  const double tol = 1e-6 * grid.spacing(0);
  std::vector<Eigen::Triplet<double>> trip;
  for (std::size_t s = 0; s < spec.positions.size(); ++s) {
    const int node = grid.find_node(spec.positions[s], tol);
    if (node < 0) throw ConfigError("sensor " + std::to_string(s) + " is not at a grid node");
    if (dim == 3 && !grid.on_face(node, spec.surface))
      throw ConfigError("sensor " + std::to_string(s) + " is off the measurement surface");
    const int d = grid.dof(node, spec.component);
    if (d < 0) throw ConfigError("sensor " + std::to_string(s) + " sits on a clamped boundary");
    trip.emplace_back(static_cast<int>(s), d, lumped_weight(grid, node, surface_axes));
  }
  const auto rows = static_cast<Eigen::Index>(spec.positions.size());
  obs.c.resize(rows, n);
  obs.c.setFromTriplets(trip.begin(), trip.end());
  obs.gram.resize(rows, rows);
  obs.gram.setIdentity();
  obs.data_map = obs.c.transpose();
  obs.misfit = obs.data_map * obs.c;

  // ||C||^2 = largest eigenvalue of C M_V^{-1} C^T (small N_C x N_C problem).
  Eigen::SimplicialLLT<SparseMatrix> mv(family.gram_v);
  if (mv.info() != Eigen::Success) throw SolverError("assemble_observation: M_V factorization failed");
  const DenseMatrix x = mv.solve(DenseMatrix(obs.c.transpose()));
  const DenseMatrix g = obs.c * x;
  Eigen::SelfAdjointEigenSolver<DenseMatrix> eig(g, Eigen::EigenvaluesOnly);
  obs.norm = std::sqrt(std::max(0.0, eig.eigenvalues().maxCoeff()));
  return obs;
}

namespace {
std::array<int, 2> lateral_axes(const Grid& grid) { return {grid.dimension() - 2, grid.dimension() - 1}; }
}  // namespace

std::vector<std::array<double, 3>> grid_layout(const Grid& grid, const std::vector<double>& coordinates,
                                               double normal_coordinate) {
  const auto ax = lateral_axes(grid);
  std::vector<std::array<double, 3>> out;
  for (double a : coordinates)
    for (double b : coordinates) {
      std::array<double, 3> p{normal_coordinate, 0, 0};
      p[ax[0]] = a;
      p[ax[1]] = b;
      out.push_back(p);
    }
  return out;
}

std::vector<std::array<double, 3>> edge_layout(const Grid& grid, double extent, double step,
                                               double normal_coordinate) {
  const auto ax = lateral_axes(grid);
  const int count = static_cast<int>(std::lround(2.0 * extent / step));
  auto point = [&](double a, double b) {
    std::array<double, 3> p{normal_coordinate, 0, 0};
    p[ax[0]] = a;
    p[ax[1]] = b;
    return p;
  };
  std::vector<std::array<double, 3>> out;
  // Each side contributes `count` points, walking the square counter-clockwise without repeats.
  for (int i = 0; i < count; ++i) out.push_back(point(-extent + i * step, -extent));
  for (int i = 0; i < count; ++i) out.push_back(point(extent, -extent + i * step));
  for (int i = 0; i < count; ++i) out.push_back(point(extent - i * step, extent));
  for (int i = 0; i < count; ++i) out.push_back(point(-extent, extent - i * step));
  return out;
}

void TimeGrid::validate() const {
  if (steps < 1) throw ConfigError("time grid needs at least one step");
  if (!(horizon > 0.0)) throw ConfigError("time horizon must be positive");
  if (!(zeta >= 0.5 && zeta <= 1.0)) throw ConfigError("zeta must lie in [1/2, 1]");
}

double LoadSignal::temporal(double t) const {
  const double s = t - onset;
  return std::sin(2.0 * std::numbers::pi * frequency * s) * std::exp(-0.5 * s * s / (width * width));
}

double LoadSignal::lateral(double offset) const {
  if (std::abs(offset) >= half_width) return 0.0;
  const double c = std::cos(0.5 * std::numbers::pi * offset / half_width);
  return c * c;
}

Vector lumped_nodal_load(const Grid& grid, const OperatorFamily& family,
                         const std::vector<std::array<double, 3>>& nodal_values) {
  require(static_cast<int>(nodal_values.size()) == grid.node_count(), "lumped_nodal_load: one value per node");
  Vector f = Vector::Zero(family.state_dim());
  for (int n = 0; n < grid.node_count(); ++n)
    for (int i = 0; i < grid.dimension(); ++i) {
      const int d = grid.dof(n, i);
      if (d >= 0) f[d] = family.mass_h.coeff(d, d) * nodal_values[n][i];
    }
  return f;
}

DenseMatrix assemble_load(const Grid& grid, const OperatorFamily& family, const LoadSignal& signal,
                          const TimeGrid& times) {
  const auto ax = lateral_axes(grid);
  std::vector<std::array<double, 3>> shape_values(grid.node_count());
  for (int n = 0; n < grid.node_count(); ++n) {
    const auto x = grid.node_coordinate(n);
    const double s = signal.amplitude * signal.lateral(x[ax[0]] - signal.center[0]) *
                     signal.lateral(x[ax[1]] - signal.center[1]);
    for (int i = 0; i < 3; ++i) shape_values[n][i] = s * signal.direction[i];
  }
  const Vector spatial = lumped_nodal_load(grid, family, shape_values);
  DenseMatrix load(family.state_dim(), times.steps + 1);
  for (int k = 0; k <= times.steps; ++k) load.col(k) = signal.temporal(times.time(k)) * spatial;
  return load;
}

}  // namespace trirgnm
