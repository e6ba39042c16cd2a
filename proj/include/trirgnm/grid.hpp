#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace trirgnm {

/// Axis-aligned boundary face: `side` 0 is the lower end of `axis`, 1 the upper end.
struct Face {
  int axis = 0;
  int side = 0;
  bool operator==(const Face&) const = default;
};

/// Tensor-product grid of (bi/tri)linear elements on a box.
///
/// Nodes are numbered row-major: the last axis runs fastest. Degrees of freedom exist only
/// on nodes that do not touch a Dirichlet face; free node f carries DoFs f*dim + c.
class Grid {
 public:
  Grid(int dimension, std::array<double, 3> lower, std::array<double, 3> upper,
       std::array<int, 3> cells, std::vector<Face> dirichlet);

  int dimension() const { return dim_; }
  double lower(int axis) const { return lower_[axis]; }
  double upper(int axis) const { return upper_[axis]; }
  int cells(int axis) const { return cells_[axis]; }
  int nodes_along(int axis) const { return cells_[axis] + 1; }
  double spacing(int axis) const { return (upper_[axis] - lower_[axis]) / cells_[axis]; }
  const std::vector<Face>& dirichlet_faces() const { return dirichlet_; }

  int node_count() const { return node_count_; }
  int element_count() const { return element_count_; }
  int free_node_count() const { return free_count_; }
  /// N_V = dimension * free nodes.
  int dof_count() const { return free_count_ * dim_; }

  std::array<int, 3> node_multi_index(int node) const;
  int node_index(const std::array<int, 3>& multi) const;
  std::array<double, 3> node_coordinate(int node) const;
  /// -1 for nodes on a Dirichlet face.
  int free_index(int node) const { return free_index_[node]; }
  /// -1 for constrained components.
  int dof(int node, int component) const {
    const int f = free_index_[node];
    return f < 0 ? -1 : f * dim_ + component;
  }
  bool on_face(int node, const Face& face) const;

  /// Element corners in local order: bit `a` of the local index selects the upper node on axis `a`.
  std::vector<int> element_nodes(int element) const;
  std::array<int, 3> element_multi_index(int element) const;
  /// Product of spacings along the active axes.
  double element_measure() const;

  /// Nearest node to a point, or -1 if the point is farther than `tolerance` from every node.
  int find_node(const std::array<double, 3>& point, double tolerance) const;

 private:
  int dim_;
  std::array<double, 3> lower_;
  std::array<double, 3> upper_;
  std::array<int, 3> cells_;
  std::vector<Face> dirichlet_;
  int node_count_ = 0;
  int element_count_ = 0;
  int free_count_ = 0;
  std::vector<int> free_index_;
};

}  // namespace trirgnm
