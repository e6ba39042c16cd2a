#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "trirgnm/timestep.hpp"

namespace trirgnm {

/// Binary column-major matrix record: 4-byte magic "TRGM", u32 rows, u32 K (= columns - 1),
/// u32 dtype code (1 = float64), then rows * (K+1) doubles.
void write_matrix(std::ostream& out, const DenseMatrix& m);
DenseMatrix read_matrix(std::istream& in);
void write_matrix_file(const std::string& path, const DenseMatrix& m);
DenseMatrix read_matrix_file(const std::string& path);

/// A trajectory dump is the displacement record followed by the velocity record.
void write_trajectory_file(const std::string& path, const Trajectory& t);
Trajectory read_trajectory_file(const std::string& path);

/// 64-bit FNV-1a over the raw bytes of the matrix entries, as 16 hex digits.
std::string matrix_hash(const DenseMatrix& m);

}  // namespace trirgnm
