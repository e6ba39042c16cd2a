#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <vector>

namespace trirgnm {

using Vector = Eigen::VectorXd;
using DenseMatrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

/// A(q) = A_0 + sum_p q_p A_p with all A_p stored against one precomputed union pattern.
///
/// Each A_p is a short list of (pattern slot, row, col, value) terms, so memory stays
/// proportional to the number of element contributions rather than N_Q * N_V.
class SparseAffineFamily {
 public:
  struct Term {
    int slot;
    int row;
    int col;
    double value;
  };

  /// Collects element contributions before the pattern is fixed.
  class Builder {
   public:
    Builder(int state_dim, int param_dim);
    /// parameter == -1 adds to A_0.
    void add(int parameter, int row, int col, double value);
    SparseAffineFamily build() &&;

   private:
    struct Raw {
      int parameter;
      int row;
      int col;
      double value;
    };
    int n_;
    int np_;
    std::vector<Raw> raw_;
  };

  SparseAffineFamily() = default;

  Eigen::Index state_dim() const { return pattern_.rows(); }
  Eigen::Index param_dim() const { return static_cast<Eigen::Index>(offsets_.size()) - 1; }
  Eigen::Index pattern_nonzeros() const { return pattern_.nonZeros(); }

  /// A(q) on the union pattern.
  SparseMatrix evaluate(const Vector& q) const;
  /// sum_p d_p A_p (no A_0) on the union pattern.
  SparseMatrix linear_part(const Vector& d) const;
  const SparseMatrix& constant_part() const { return constant_; }
  /// A_p u.
  Vector apply_component(Eigen::Index p, const Vector& u) const;
  /// Dense copy of A_p (tests and small problems only).
  SparseMatrix component(Eigen::Index p) const;
  const std::vector<Term>& terms() const { return terms_; }
  const std::vector<int>& offsets() const { return offsets_; }

  /// Accumulates w_p = sum_i s_i * left_i^T A_p right_i over many (left, right) pairs.
  class BilinearAccumulator {
   public:
    explicit BilinearAccumulator(const SparseAffineFamily& family);
    void add(const Vector& left, const Vector& right, double scale);
    Vector contract() const;

   private:
    const SparseAffineFamily* family_;
    Vector weights_;
  };

 private:
  SparseMatrix pattern_;   // union pattern, all values zero
  SparseMatrix constant_;  // A_0 on the union pattern
  std::vector<Term> terms_;
  std::vector<int> offsets_;  // terms of A_p are [offsets_[p], offsets_[p+1])
  std::vector<int> slot_row_;
  std::vector<int> slot_col_;
};

/// Dense affine family for reduced models: A_r(q_r) = A_{r,0} + sum_j q_{r,j} A_{r,j}.
class DenseAffineFamily {
 public:
  DenseAffineFamily() = default;
  DenseAffineFamily(DenseMatrix constant, std::vector<DenseMatrix> components)
      : constant_(std::move(constant)), components_(std::move(components)) {}

  Eigen::Index state_dim() const { return constant_.rows(); }
  Eigen::Index param_dim() const { return static_cast<Eigen::Index>(components_.size()); }

  DenseMatrix evaluate(const Vector& q) const { return constant_ + linear_part(q); }
  DenseMatrix linear_part(const Vector& d) const;
  const DenseMatrix& constant_part() const { return constant_; }
  Vector apply_component(Eigen::Index j, const Vector& u) const { return components_[j] * u; }
  const DenseMatrix& component(Eigen::Index j) const { return components_[j]; }

  class BilinearAccumulator {
   public:
    explicit BilinearAccumulator(const DenseAffineFamily& family)
        : family_(&family), outer_(DenseMatrix::Zero(family.state_dim(), family.state_dim())) {}
    void add(const Vector& left, const Vector& right, double scale) {
      outer_.noalias() += scale * left * right.transpose();
    }
    Vector contract() const;

   private:
    const DenseAffineFamily* family_;
    DenseMatrix outer_;
  };

 private:
  DenseMatrix constant_;
  std::vector<DenseMatrix> components_;
};

}  // namespace trirgnm
