#include "trirgnm/io.hpp"

#include <array>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace trirgnm {

namespace {
constexpr std::array<char, 4> kMagic{'T', 'R', 'G', 'M'};
constexpr std::uint32_t kFloat64 = 1;

void put_u32(std::ostream& out, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw std::runtime_error("matrix record truncated");
  return b[0] | (b[1] << 8) | (b[2] << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}
}  // namespace

void write_matrix(std::ostream& out, const DenseMatrix& m) {
  require(m.cols() >= 1, "write_matrix: need at least one column");
  out.write(kMagic.data(), 4);
  put_u32(out, static_cast<std::uint32_t>(m.rows()));
  put_u32(out, static_cast<std::uint32_t>(m.cols() - 1));
  put_u32(out, kFloat64);
  out.write(reinterpret_cast<const char*>(m.data()), static_cast<std::streamsize>(sizeof(double) * m.size()));
  if (!out) throw std::runtime_error("matrix record write failed");
}

DenseMatrix read_matrix(std::istream& in) {
  std::array<char, 4> magic{};
  in.read(magic.data(), 4);
  if (!in || magic != kMagic) throw std::runtime_error("not a matrix record (bad magic)");
  const std::uint32_t rows = get_u32(in);
  const std::uint32_t k = get_u32(in);
  if (get_u32(in) != kFloat64) throw std::runtime_error("unsupported matrix dtype");
  DenseMatrix m(rows, static_cast<Eigen::Index>(k) + 1);
  in.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(sizeof(double) * m.size()));
  if (!in) throw std::runtime_error("matrix record truncated");
  return m;
}

void write_matrix_file(const std::string& path, const DenseMatrix& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  write_matrix(out, m);
}

DenseMatrix read_matrix_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_matrix(in);
}

void write_trajectory_file(const std::string& path, const Trajectory& t) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  write_matrix(out, t.u);
  write_matrix(out, t.v);
}

Trajectory read_trajectory_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  Trajectory t;
  t.u = read_matrix(in);
  t.v = read_matrix(in);
  return t;
}

std::string matrix_hash(const DenseMatrix& m) {
  std::uint64_t h = 1469598103934665603ull;
  const auto* bytes = reinterpret_cast<const unsigned char*>(m.data());
  for (std::size_t i = 0; i < sizeof(double) * static_cast<std::size_t>(m.size()); ++i) {
    h ^= bytes[i];
    h *= 1099511628211ull;
  }
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << h;
  return s.str();
}

}  // namespace trirgnm
