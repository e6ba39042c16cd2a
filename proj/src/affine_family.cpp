#include "trirgnm/affine_family.hpp"

#include <algorithm>

#include "trirgnm/errors.hpp"

namespace trirgnm {

SparseAffineFamily::Builder::Builder(int state_dim, int param_dim) : n_(state_dim), np_(param_dim) {}

void SparseAffineFamily::Builder::add(int parameter, int row, int col, double value) {
  raw_.push_back({parameter, row, col, value});
}

SparseAffineFamily SparseAffineFamily::Builder::build() && {
  SparseAffineFamily f;
  std::vector<Eigen::Triplet<double>> structure;
  structure.reserve(raw_.size());
  for (const auto& r : raw_) structure.emplace_back(r.row, r.col, 0.0);
  f.pattern_.resize(n_, n_);
  f.pattern_.setFromTriplets(structure.begin(), structure.end());
  f.pattern_.makeCompressed();

  const Eigen::Index nnz = f.pattern_.nonZeros();
  f.slot_row_.resize(nnz);
  f.slot_col_.resize(nnz);
  const int* outer = f.pattern_.outerIndexPtr();
  const int* inner = f.pattern_.innerIndexPtr();
  for (int c = 0; c < n_; ++c) {
    for (int s = outer[c]; s < outer[c + 1]; ++s) {
      f.slot_row_[s] = inner[s];
      f.slot_col_[s] = c;
    }
  }
  auto slot_of = [&](int row, int col) {
    const int* begin = inner + outer[col];
    const int* end = inner + outer[col + 1];
    return static_cast<int>(std::lower_bound(begin, end, row) - inner);
  };

  f.constant_ = f.pattern_;
  double* constant_values = f.constant_.valuePtr();

  std::vector<std::vector<std::pair<int, double>>> per_param(np_);
  for (const auto& r : raw_) {
    const int slot = slot_of(r.row, r.col);
    if (r.parameter < 0) {
      constant_values[slot] += r.value;
    } else {
      per_param[r.parameter].emplace_back(slot, r.value);
    }
  }
  raw_.clear();
  raw_.shrink_to_fit();

  f.offsets_.assign(np_ + 1, 0);
  for (int p = 0; p < np_; ++p) {
    auto& list = per_param[p];
    std::sort(list.begin(), list.end(), [](auto& a, auto& b) { return a.first < b.first; });
    std::size_t w = 0;
    for (std::size_t i = 0; i < list.size(); ++i) {
      if (w > 0 && list[w - 1].first == list[i].first) {
        list[w - 1].second += list[i].second;
      } else {
        list[w++] = list[i];
      }
    }
    list.resize(w);
    for (const auto& [slot, value] : list)
      f.terms_.push_back({slot, f.slot_row_[slot], f.slot_col_[slot], value});
    f.offsets_[p + 1] = static_cast<int>(f.terms_.size());
  }
  return f;
}

SparseMatrix SparseAffineFamily::evaluate(const Vector& q) const {
  require(q.size() == param_dim(), "evaluate_operator: parameter length mismatch");
  SparseMatrix a = constant_;
  double* values = a.valuePtr();
  for (Eigen::Index p = 0; p < param_dim(); ++p) {
    const double qp = q[p];
    for (int t = offsets_[p]; t < offsets_[p + 1]; ++t) values[terms_[t].slot] += qp * terms_[t].value;
  }
  return a;
}

SparseMatrix SparseAffineFamily::linear_part(const Vector& d) const {
  require(d.size() == param_dim(), "linear_part: parameter length mismatch");
  SparseMatrix a = pattern_;
  double* values = a.valuePtr();
  for (Eigen::Index p = 0; p < param_dim(); ++p) {
    const double dp = d[p];
    if (dp == 0.0) continue;
    for (int t = offsets_[p]; t < offsets_[p + 1]; ++t) values[terms_[t].slot] += dp * terms_[t].value;
  }
  return a;
}

Vector SparseAffineFamily::apply_component(Eigen::Index p, const Vector& u) const {
  require(u.size() == state_dim(), "apply_component: state length mismatch");
  Vector out = Vector::Zero(state_dim());
  for (int t = offsets_[p]; t < offsets_[p + 1]; ++t) out[terms_[t].row] += terms_[t].value * u[terms_[t].col];
  return out;
}

SparseMatrix SparseAffineFamily::component(Eigen::Index p) const {
  std::vector<Eigen::Triplet<double>> trip;
  for (int t = offsets_[p]; t < offsets_[p + 1]; ++t) trip.emplace_back(terms_[t].row, terms_[t].col, terms_[t].value);
  SparseMatrix m(state_dim(), state_dim());
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

SparseAffineFamily::BilinearAccumulator::BilinearAccumulator(const SparseAffineFamily& family)
    : family_(&family), weights_(Vector::Zero(family.pattern_.nonZeros())) {}

void SparseAffineFamily::BilinearAccumulator::add(const Vector& left, const Vector& right, double scale) {
  const auto& rows = family_->slot_row_;
  const auto& cols = family_->slot_col_;
  for (std::size_t s = 0; s < rows.size(); ++s) weights_[s] += scale * left[rows[s]] * right[cols[s]];
}

Vector SparseAffineFamily::BilinearAccumulator::contract() const {
  Vector out = Vector::Zero(family_->param_dim());
  const auto& terms = family_->terms_;
  const auto& offsets = family_->offsets_;
  for (Eigen::Index p = 0; p < family_->param_dim(); ++p) {
    double acc = 0.0;
    for (int t = offsets[p]; t < offsets[p + 1]; ++t) acc += terms[t].value * weights_[terms[t].slot];
    out[p] = acc;
  }
  return out;
}

DenseMatrix DenseAffineFamily::linear_part(const Vector& d) const {
  require(d.size() == param_dim(), "linear_part: parameter length mismatch");
  DenseMatrix a = DenseMatrix::Zero(state_dim(), state_dim());
  for (Eigen::Index j = 0; j < param_dim(); ++j)
    if (d[j] != 0.0) a.noalias() += d[j] * components_[j];
  return a;
}

Vector DenseAffineFamily::BilinearAccumulator::contract() const {
  Vector out(family_->param_dim());
  for (Eigen::Index j = 0; j < family_->param_dim(); ++j)
    out[j] = family_->component(j).cwiseProduct(outer_).sum();
  return out;
}

}  // namespace trirgnm
