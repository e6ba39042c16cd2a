#include "trirgnm/grid.hpp"

#include <cmath>
#include <string>

#include "trirgnm/errors.hpp"

namespace trirgnm {

Grid::Grid(int dimension, std::array<double, 3> lower, std::array<double, 3> upper,
           std::array<int, 3> cells, std::vector<Face> dirichlet)
    : dim_(dimension), lower_(lower), upper_(upper), cells_(cells), dirichlet_(std::move(dirichlet)) {
  if (dim_ != 2 && dim_ != 3) throw ConfigError("grid dimension must be 2 or 3");
  for (int a = dim_; a < 3; ++a) {
    cells_[a] = 0;
    lower_[a] = upper_[a] = 0.0;
  }
  node_count_ = 1;
  element_count_ = 1;
  for (int a = 0; a < dim_; ++a) {
    if (cells_[a] < 1) throw ConfigError("grid needs at least one cell per axis");
    if (!(upper_[a] > lower_[a])) throw ConfigError("degenerate grid extent on axis " + std::to_string(a));
    node_count_ *= cells_[a] + 1;
    element_count_ *= cells_[a];
  }
  for (const auto& f : dirichlet_) {
    if (f.axis < 0 || f.axis >= dim_ || (f.side != 0 && f.side != 1))
      throw ConfigError("invalid Dirichlet face");
  }
  free_index_.assign(node_count_, -1);
  for (int n = 0; n < node_count_; ++n) {
    bool fixed = false;
    for (const auto& f : dirichlet_) fixed = fixed || on_face(n, f);
    if (!fixed) free_index_[n] = free_count_++;
  }
}

std::array<int, 3> Grid::node_multi_index(int node) const {
  std::array<int, 3> m{0, 0, 0};
  for (int a = dim_ - 1; a >= 0; --a) {
    m[a] = node % (cells_[a] + 1);
    node /= cells_[a] + 1;
  }
  return m;
}

int Grid::node_index(const std::array<int, 3>& multi) const {
  int n = 0;
  for (int a = 0; a < dim_; ++a) n = n * (cells_[a] + 1) + multi[a];
  return n;
}

std::array<double, 3> Grid::node_coordinate(int node) const {
  const auto m = node_multi_index(node);
  std::array<double, 3> x{0, 0, 0};
  for (int a = 0; a < dim_; ++a) x[a] = lower_[a] + m[a] * spacing(a);
  return x;
}

bool Grid::on_face(int node, const Face& face) const {
  const auto m = node_multi_index(node);
  return m[face.axis] == (face.side == 0 ? 0 : cells_[face.axis]);
}

std::array<int, 3> Grid::element_multi_index(int element) const {
  std::array<int, 3> m{0, 0, 0};
  for (int a = dim_ - 1; a >= 0; --a) {
    m[a] = element % cells_[a];
    element /= cells_[a];
  }
  return m;
}

std::vector<int> Grid::element_nodes(int element) const {
  const auto base = element_multi_index(element);
  const int corners = 1 << dim_;
  std::vector<int> nodes(corners);
  for (int c = 0; c < corners; ++c) {
    auto m = base;
    for (int a = 0; a < dim_; ++a) m[a] += (c >> a) & 1;
    nodes[c] = node_index(m);
  }
  return nodes;
}

double Grid::element_measure() const {
  double v = 1.0;
  for (int a = 0; a < dim_; ++a) v *= spacing(a);
  return v;
}

int Grid::find_node(const std::array<double, 3>& point, double tolerance) const {
  std::array<int, 3> m{0, 0, 0};
  for (int a = 0; a < dim_; ++a) {
    const double s = (point[a] - lower_[a]) / spacing(a);
    const long r = std::lround(s);
    if (r < 0 || r > cells_[a]) return -1;
    if (std::abs(point[a] - (lower_[a] + r * spacing(a))) > tolerance) return -1;
    m[a] = static_cast<int>(r);
  }
  return node_index(m);
}

}  // namespace trirgnm
