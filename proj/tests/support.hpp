#pragma once

#include <random>

#include "trirgnm/experiment.hpp"

namespace support {

using namespace trirgnm;

/// 3D slab with a 2x2 parameter layer on its free face: 4 parameters, 24 DoFs.
inline ProblemConfig toy4_config(int steps = 8) {
  ProblemConfig c;
  c.dimension = 3;
  c.lower = {0, 0, 0};
  c.upper = {2, 1, 1};
  c.cells = {2, 1, 1};
  c.dirichlet = {Face{0, 1}};
  c.material.lame_lambda = 1.0;
  c.material.lame_mu = 0.8;
  c.material.density = 1.0;
  c.material.layer = ParameterLayer::lower_face;
  c.time.steps = steps;
  c.time.horizon = 4.0;
  c.load.frequency = 0.3;
  c.load.onset = 1.0;
  c.load.width = 0.5;
  c.load.center = {0.5, 0.5};
  c.load.half_width = 1.0;
  c.load.direction = {1.0, 0.3, -0.2};
  c.sensors.layout = "full";
  return c;
}

/// 2D clamped square with every node a parameter: 6x6 cells, 49 parameters, 50 DoFs.
inline ProblemConfig small2d_config(int cells = 6, int steps = 16) {
  ProblemConfig c;
  c.dimension = 2;
  c.lower = {-3, -3, 0};
  c.upper = {3, 3, 0};
  c.cells = {cells, cells, 0};
  c.dirichlet = {Face{0, 0}, Face{0, 1}, Face{1, 0}, Face{1, 1}};
  c.material.lame_lambda = 2.0;
  c.material.lame_mu = 1.0;
  c.material.density = 1.0;
  c.time.steps = steps;
  c.time.horizon = 8.0;
  c.load.frequency = 0.25;
  c.load.onset = 2.0;
  c.load.width = 0.8;
  c.load.center = {0.0, 0.0};
  c.load.half_width = 2.0;
  c.load.direction = {1.0, 0.5, 0.0};
  c.sensors.layout = "full";
  return c;
}

struct Toy {
  Problem problem;
  Vector truth;
  SyntheticData data;
};

/// Problem with data generated from `truth` (or a default smooth perturbation of 1).
inline Toy make_toy(const ProblemConfig& config, double relative_noise, std::uint64_t seed = 7,
                    const Vector* truth = nullptr) {
  Problem p = build_problem(config);
  Vector qe;
  if (truth) {
    qe = *truth;
  } else {
    qe = Vector::Ones(p.ops.param_dim());
    for (Eigen::Index i = 0; i < qe.size(); ++i) qe[i] += 0.5 * std::sin(1.3 * static_cast<double>(i) + 0.4);
  }
  auto data = generate_data(p, qe, relative_noise, seed);
  set_data(p.model, p.obs, data.noisy);
  return Toy{std::move(p), std::move(qe), std::move(data)};
}

inline Vector random_vector(Eigen::Index n, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = u(rng);
  return v;
}

inline double relative_difference(const DenseMatrix& a, const DenseMatrix& b) {
  const double scale = std::max(a.norm(), b.norm());
  return scale > 0.0 ? (a - b).norm() / scale : 0.0;
}

}  // namespace support
