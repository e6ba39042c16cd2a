#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "trirgnm/tr.hpp"

namespace trirgnm {

struct SensorLayoutSpec {
  std::string layout = "full";  // full | grid | edge | explicit
  std::vector<double> grid_coordinates{-14, -10, -6, -2, 2, 6, 10, 14};
  double edge_extent = 14.0;
  double edge_step = 1.0;
  std::vector<std::array<double, 3>> positions;  // explicit layout
  int component = 0;
  Face surface{0, 0};
};

struct ProblemConfig {
  int dimension = 2;
  std::array<double, 3> lower{-15, -15, 0};
  std::array<double, 3> upper{15, 15, 0};
  std::array<int, 3> cells{30, 30, 0};
  std::vector<Face> dirichlet;
  MaterialSpec material;
  TimeGrid time;
  LoadSignal load;
  SensorLayoutSpec sensors;
  double box_lower = 1e-20;
  double box_upper = 1e20;
};

struct PointDefect {
  std::array<double, 2> center{0, 0};
  double value = 1.0;
};

struct RectangleDefect {
  std::array<double, 2> lower{0, 0};
  std::array<double, 2> upper{0, 0};
  double value = 1.0;
};

struct TruthSpec {
  std::vector<PointDefect> points;
  std::vector<RectangleDefect> rectangles;
};

struct NoiseSpec {
  double relative = 0.01;
  std::uint64_t seed = 20260101;
};

struct ExperimentConfig {
  std::string name = "experiment";
  ProblemConfig problem;
  TruthSpec truth;
  NoiseSpec noise;
  IrgnmConfig irgnm;
  TrustRegionConfig tr;
  std::string output_dir = "out";
};

/// Parses a JSON experiment description; missing keys keep their defaults. Throws ConfigError.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config_file(const std::string& path);

/// The assembled full-order problem (operators, observation, load, model without data).
struct Problem {
  Grid grid;
  OperatorFamily ops;
  Observation obs;
  DenseMatrix load;
  AdmissibleSet box;
  FomModel model;

  /// Lateral (two in-surface) coordinates of parameter p.
  std::array<double, 2> parameter_position(Eigen::Index p) const;
  /// Parameter grid shape: nodes along the two lateral axes.
  std::array<int, 2> parameter_shape() const;
};

Problem build_problem(const ProblemConfig& config);

/// Background 1; rectangles set coefficients whose B-spline support lies inside; point defects set
/// the centre to v and its 8 lateral neighbours to (v + 1) / 2.
Vector build_truth(const Problem& problem, const TruthSpec& truth);

struct SyntheticData {
  DenseMatrix exact;  // C u_h(q^e)
  DenseMatrix noisy;  // y^delta
  double delta = 0.0;
  std::string hash;
};

/// y^delta = C u_h(q^e) + delta xi / |xi|, xi uniform on [-1, 1], delta = relative * |C u_h(q^e)|.
SyntheticData generate_data(const Problem& problem, const Vector& truth, double relative, std::uint64_t seed);

struct RunReport {
  std::string method;  // FOM | TR
  Vector q;
  double relative_error = -1.0;  // TR vs FOM in the Q-norm; negative for the reference run
  double seconds = 0.0;
  long fom_solves = 0;
  long n_q = 0;
  long n_v = 0;
  int outer_iterations = 0;
  int total_iterations = 0;
  double final_value = 0.0;
  bool converged = false;
  bool failed = false;
  std::string message;
};

struct ComparisonResult {
  std::optional<RunReport> fom;
  std::optional<RunReport> tr;
  std::optional<IrgnmResult> fom_run;
  std::optional<TrResult> tr_run;
  std::string data_hash_fom;
  std::string data_hash_tr;
};

/// Runs FOM-IRGNM and/or TR-IRGNM from q = 1 on the same data. `problem.model` must carry the data.
ComparisonResult run_comparison(Problem& problem, double delta, const ExperimentConfig& config, bool run_fom,
                                bool run_tr, const std::string& data_hash);

/// Table-1 schema: setup,method,rel_err,time_s,speedup,fom_solves,n_q,n_v,outer_iter,total_iter.
void write_table_csv(std::ostream& out, const std::string& setup, const std::vector<RunReport>& reports);
std::vector<RunReport> read_table_csv(std::istream& in);

nlohmann::json field_dump(const Problem& problem, const Vector& q);
nlohmann::json tr_ledger_json(const TrResult& result);

}  // namespace trirgnm
