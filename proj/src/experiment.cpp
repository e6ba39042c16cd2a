#include "trirgnm/experiment.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "trirgnm/io.hpp"

namespace trirgnm {

using nlohmann::json;

namespace {

template <typename T>
void read(const json& j, const char* key, T& target) {
  if (!j.contains(key)) return;
  try {
    target = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

template <std::size_t N, typename T>
void read_array(const json& j, const char* key, std::array<T, N>& target, std::size_t count) {
  if (!j.contains(key)) return;
  const auto& a = j.at(key);
  if (!a.is_array() || a.size() != count) throw ConfigError(std::string("config key '") + key + "' has wrong length");
  for (std::size_t i = 0; i < count; ++i) target[i] = a[i].get<T>();
}

Face parse_face(const json& j) {
  Face f;
  read(j, "axis", f.axis);
  read(j, "side", f.side);
  return f;
}

}  // namespace

ExperimentConfig parse_config(const json& j) {
  ExperimentConfig c;
  try {
    read(j, "name", c.name);
    if (j.contains("problem")) {
      const auto& p = j.at("problem");
      auto& pc = c.problem;
      read(p, "dimension", pc.dimension);
      if (pc.dimension != 2 && pc.dimension != 3) throw ConfigError("problem.dimension must be 2 or 3");
      const auto n = static_cast<std::size_t>(pc.dimension);
      read_array(p, "lower", pc.lower, n);
      read_array(p, "upper", pc.upper, n);
      read_array(p, "cells", pc.cells, n);
      if (p.contains("dirichlet")) {
        pc.dirichlet.clear();
        for (const auto& f : p.at("dirichlet")) pc.dirichlet.push_back(parse_face(f));
      }
      if (p.contains("material")) {
        const auto& m = p.at("material");
        read(m, "lambda", pc.material.lame_lambda);
        read(m, "mu", pc.material.lame_mu);
        read(m, "density", pc.material.density);
        read(m, "time_scale", pc.material.time_scale);
        read(m, "length_scale", pc.material.length_scale);
        std::string layer = "all_nodes";
        read(m, "layer", layer);
        if (layer == "all_nodes") {
          pc.material.layer = ParameterLayer::all_nodes;
        } else if (layer == "lower_face") {
          pc.material.layer = ParameterLayer::lower_face;
        } else {
          throw ConfigError("unknown parameter layer '" + layer + "'");
        }
      }
      if (p.contains("time")) {
        const auto& t = p.at("time");
        read(t, "steps", pc.time.steps);
        read(t, "horizon", pc.time.horizon);
        read(t, "zeta", pc.time.zeta);
      }
      if (p.contains("load")) {
        const auto& l = p.at("load");
        read(l, "frequency", pc.load.frequency);
        read(l, "onset", pc.load.onset);
        read(l, "width", pc.load.width);
        read_array(l, "center", pc.load.center, 2);
        read(l, "half_width", pc.load.half_width);
        read_array(l, "direction", pc.load.direction, 3);
        read(l, "amplitude", pc.load.amplitude);
      }
      if (p.contains("observation")) {
        const auto& o = p.at("observation");
        auto& s = pc.sensors;
        read(o, "layout", s.layout);
        read(o, "coordinates", s.grid_coordinates);
        read(o, "extent", s.edge_extent);
        read(o, "step", s.edge_step);
        read(o, "component", s.component);
        if (o.contains("surface")) s.surface = parse_face(o.at("surface"));
        if (o.contains("positions")) {
          for (const auto& pos : o.at("positions")) {
            std::array<double, 3> x{0, 0, 0};
            for (std::size_t i = 0; i < pos.size() && i < 3; ++i) x[i] = pos[i].get<double>();
            s.positions.push_back(x);
          }
        }
        if (s.layout != "full" && s.layout != "grid" && s.layout != "edge" && s.layout != "explicit")
          throw ConfigError("unknown sensor layout '" + s.layout + "'");
      }
      if (p.contains("bounds")) {
        const auto& b = p.at("bounds");
        if (!b.is_array() || b.size() != 2) throw ConfigError("problem.bounds needs [lower, upper]");
        pc.box_lower = b[0].get<double>();
        pc.box_upper = b[1].get<double>();
      }
    }
    if (j.contains("truth")) {
      const auto& t = j.at("truth");
      if (t.contains("points"))
        for (const auto& d : t.at("points")) {
          PointDefect pd;
          read_array(d, "center", pd.center, 2);
          read(d, "value", pd.value);
          c.truth.points.push_back(pd);
        }
      if (t.contains("rectangles"))
        for (const auto& d : t.at("rectangles")) {
          RectangleDefect rd;
          read_array(d, "lower", rd.lower, 2);
          read_array(d, "upper", rd.upper, 2);
          read(d, "value", rd.value);
          c.truth.rectangles.push_back(rd);
        }
    }
    if (j.contains("noise")) {
      read(j.at("noise"), "relative", c.noise.relative);
      read(j.at("noise"), "seed", c.noise.seed);
      if (c.noise.relative < 0.0) throw ConfigError("noise.relative must be nonnegative");
    }
    if (j.contains("irgnm")) {
      const auto& g = j.at("irgnm");
      auto& ic = c.irgnm;
      read(g, "theta", ic.theta);
      read(g, "Theta", ic.Theta);
      read(g, "tau", ic.tau);
      read(g, "alpha_init", ic.alpha_init);
      read(g, "alpha_factor", ic.alpha_factor);
      read(g, "alpha_max_trials", ic.alpha_max_trials);
      read(g, "inner_max_iterations", ic.inner_max_iterations);
      read(g, "inner_relative_change", ic.inner_relative_change);
      read(g, "inner_first_order", ic.inner_first_order);
      read(g, "max_outer_iterations", ic.max_outer_iterations);
      read(g, "max_seconds", ic.max_seconds);
      read(g, "explicit_hessian_max_dim", ic.explicit_hessian_max_dim);
    }
    if (j.contains("tr")) {
      const auto& g = j.at("tr");
      auto& tc = c.tr;
      read(g, "eta0", tc.eta0);
      read(g, "eta_max", tc.eta_max);
      read(g, "beta2", tc.beta2);
      read(g, "beta3", tc.beta3);
      read(g, "tau_tilde", tc.tau_tilde);
      read(g, "boundary_fraction", tc.boundary_fraction);
      read(g, "max_halvings", tc.max_halvings);
      read(g, "max_outer_iterations", tc.max_outer_iterations);
      read(g, "max_subproblem_iterations", tc.max_subproblem_iterations);
      read(g, "max_consecutive_rejections", tc.max_consecutive_rejections);
      read(g, "pod_tolerance", tc.pod_tolerance);
      read(g, "consistency_tolerance", tc.consistency_tolerance);
      read(g, "report_estimators", tc.report_estimators);
    }
    if (j.contains("output")) read(j.at("output"), "dir", c.output_dir);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  c.irgnm.validate();
  c.tr.validate();
  c.problem.material.validate();
  c.problem.time.validate();
  return c;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config file " + path + " is not valid JSON: " + e.what());
  }
  return parse_config(j);
}

std::array<double, 2> Problem::parameter_position(Eigen::Index p) const {
  const auto x = grid.node_coordinate(ops.node_of_param[p]);
  const int d = grid.dimension();
  return {x[d - 2], x[d - 1]};
}

std::array<int, 2> Problem::parameter_shape() const {
  const int d = grid.dimension();
  return {grid.nodes_along(d - 2), grid.nodes_along(d - 1)};
}

Problem build_problem(const ProblemConfig& config) {
  Grid grid(config.dimension, config.lower, config.upper, config.cells, config.dirichlet);
  OperatorFamily ops = assemble_operators(grid, config.material);

  ObservationSpec spec;
  spec.component = config.sensors.component;
  spec.surface = config.sensors.surface;
  const double normal = config.dimension == 3
                            ? (spec.surface.side == 0 ? grid.lower(spec.surface.axis) : grid.upper(spec.surface.axis))
                            : 0.0;
  const auto& layout = config.sensors.layout;
  if (layout == "full") {
    spec.kind = ObservationKind::full_field;
  } else {
    spec.kind = ObservationKind::sensors;
    if (layout == "grid") {
      spec.positions = grid_layout(grid, config.sensors.grid_coordinates, normal);
    } else if (layout == "edge") {
      spec.positions = edge_layout(grid, config.sensors.edge_extent, config.sensors.edge_step, normal);
    } else {
      spec.positions = config.sensors.positions;
    }
  }
  Observation obs = assemble_observation(grid, ops, spec);
  DenseMatrix load = assemble_load(grid, ops, config.load, config.time);
  AdmissibleSet box = AdmissibleSet::box(ops.param_dim(), config.box_lower, config.box_upper);
  FomModel model = build_fom_model(ops, obs, load, config.time, Vector::Ones(ops.param_dim()), box);
  return Problem{std::move(grid), std::move(ops), std::move(obs), std::move(load), std::move(box), std::move(model)};
}

Vector build_truth(const Problem& problem, const TruthSpec& truth) {
  const auto n = problem.ops.param_dim();
  Vector q = Vector::Ones(n);
  const int d = problem.grid.dimension();
  const std::array<int, 2> axes{d - 2, d - 1};
  const double tol = 1e-6 * problem.grid.spacing(axes[0]);

  auto find_param = [&](double a, double b) -> Eigen::Index {
    for (Eigen::Index p = 0; p < n; ++p) {
      const auto x = problem.parameter_position(p);
      if (std::abs(x[0] - a) <= tol && std::abs(x[1] - b) <= tol) return p;
    }
    return -1;
  };

  for (const auto& r : truth.rectangles) {
    for (int i = 0; i < 2; ++i) {
      if (!(r.lower[i] < r.upper[i]) || r.lower[i] < problem.grid.lower(axes[i]) - tol ||
          r.upper[i] > problem.grid.upper(axes[i]) + tol)
        throw ConfigError("rectangular defect lies outside the parameter layer");
    }
    for (Eigen::Index p = 0; p < n; ++p) {
      const auto x = problem.parameter_position(p);
      bool inside = true;
      for (int i = 0; i < 2; ++i) {
        const double h = problem.grid.spacing(axes[i]);
        const double lo = std::max(x[i] - h, problem.grid.lower(axes[i]));
        const double hi = std::min(x[i] + h, problem.grid.upper(axes[i]));
        inside = inside && lo >= r.lower[i] - tol && hi <= r.upper[i] + tol;
      }
      if (inside) q[p] = r.value;
    }
  }
  for (const auto& pd : truth.points) {
    const auto centre = find_param(pd.center[0], pd.center[1]);
    if (centre < 0) throw ConfigError("point defect is not on a node of the parameter layer");
    const double hy = problem.grid.spacing(axes[0]);
    const double hz = problem.grid.spacing(axes[1]);
    for (int a = -1; a <= 1; ++a)
      for (int b = -1; b <= 1; ++b) {
        if (a == 0 && b == 0) continue;
        const auto p = find_param(pd.center[0] + a * hy, pd.center[1] + b * hz);
        if (p >= 0) q[p] = 0.5 * (pd.value + 1.0);
      }
    q[centre] = pd.value;
  }
  return q;
}

SyntheticData generate_data(const Problem& problem, const Vector& truth, double relative, std::uint64_t seed) {
  require(relative >= 0.0, "generate_data: relative noise must be nonnegative");
  const auto eval = eval_objective(problem.model, truth);
  SyntheticData data;
  data.exact = problem.obs.c * eval.state.u;
  const double dt = problem.model.dt();
  const double scale = trajectory_norm(problem.obs, data.exact, dt);
  data.delta = relative * scale;
  data.noisy = data.exact;
  if (data.delta > 0.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uniform(-1.0, 1.0);
    DenseMatrix xi = DenseMatrix::Zero(data.exact.rows(), data.exact.cols());
    for (Eigen::Index k = 1; k < xi.cols(); ++k)
      for (Eigen::Index i = 0; i < xi.rows(); ++i) xi(i, k) = uniform(rng);
    data.noisy += (data.delta / trajectory_norm(problem.obs, xi, dt)) * xi;
  }
  data.hash = matrix_hash(data.noisy);
  return data;
}

ComparisonResult run_comparison(Problem& problem, double delta, const ExperimentConfig& config, bool run_fom,
                                bool run_tr, const std::string& data_hash) {
  ComparisonResult out;
  const Vector q0 = Vector::Ones(problem.ops.param_dim());
  if (run_fom) {
    problem.model.counter = std::make_shared<SolveCounter>();
    const auto t0 = std::chrono::steady_clock::now();
    IrgnmResult r = irgnm_run(problem.model, q0, delta, config.irgnm);
    RunReport rep;
    rep.method = "FOM";
    rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    rep.q = r.q;
    rep.fom_solves = problem.model.counter->trajectory_solves();
    rep.outer_iterations = static_cast<int>(r.ledger.size());
    rep.total_iterations = rep.outer_iterations;
    rep.final_value = r.value;
    rep.converged = r.converged;
    rep.failed = r.failed || !r.converged;
    rep.message = r.message;
    out.fom = rep;
    out.fom_run = std::move(r);
    out.data_hash_fom = data_hash;
  }
  if (run_tr) {
    problem.model.counter = std::make_shared<SolveCounter>();
    const auto t0 = std::chrono::steady_clock::now();
    TrResult r = tr_irgnm(problem.model, problem.ops.gram_v, problem.box, problem.obs.norm, q0, delta, config.irgnm,
                          config.tr);
    RunReport rep;
    rep.method = "TR";
    rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    rep.q = r.q;
    rep.fom_solves = problem.model.counter->trajectory_solves();
    rep.n_q = r.n_q;
    rep.n_v = r.n_v;
    rep.outer_iterations = r.accepted_iterations;
    rep.total_iterations = r.total_iterations;
    rep.final_value = r.value;
    rep.converged = r.converged;
    rep.failed = r.failed || !r.converged;
    rep.message = r.message;
    if (out.fom) rep.relative_error = (rep.q - out.fom->q).norm() / out.fom->q.norm();
    out.tr = rep;
    out.tr_run = std::move(r);
    out.data_hash_tr = data_hash;
  }
  return out;
}

void write_table_csv(std::ostream& out, const std::string& setup, const std::vector<RunReport>& reports) {
  out << "setup,method,rel_err,time_s,speedup,fom_solves,n_q,n_v,outer_iter,total_iter\n";
  out.precision(10);
  double fom_seconds = -1.0;
  for (const auto& r : reports)
    if (r.method == "FOM") fom_seconds = r.seconds;
  for (const auto& r : reports) {
    const bool tr = r.method == "TR";
    out << setup << ',' << r.method << ',';
    if (tr && r.relative_error >= 0.0) out << r.relative_error;
    out << ',' << r.seconds << ',';
    if (tr && fom_seconds > 0.0) out << fom_seconds / r.seconds;
    out << ',' << r.fom_solves << ',';
    if (tr) out << r.n_q;
    out << ',';
    if (tr) out << r.n_v;
    out << ',' << r.outer_iterations << ',' << r.total_iterations << '\n';
  }
}

std::vector<RunReport> read_table_csv(std::istream& in) {
  std::vector<RunReport> out;
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream s(line);
    std::string cell;
    while (std::getline(s, cell, ',')) f.push_back(cell);
    while (f.size() < 10) f.emplace_back();
    auto num = [](const std::string& x, double fallback) { return x.empty() ? fallback : std::stod(x); };
    RunReport r;
    r.method = f[1];
    r.relative_error = num(f[2], -1.0);
    r.seconds = num(f[3], 0.0);
    r.fom_solves = static_cast<long>(num(f[5], 0));
    r.n_q = static_cast<long>(num(f[6], 0));
    r.n_v = static_cast<long>(num(f[7], 0));
    r.outer_iterations = static_cast<int>(num(f[8], 0));
    r.total_iterations = static_cast<int>(num(f[9], 0));
    out.push_back(r);
  }
  return out;
}

json field_dump(const Problem& problem, const Vector& q) {
  const auto shape = problem.parameter_shape();
  const int d = problem.grid.dimension();
  std::vector<double> ys, zs;
  for (int i = 0; i < shape[0]; ++i) ys.push_back(problem.grid.lower(d - 2) + i * problem.grid.spacing(d - 2));
  for (int i = 0; i < shape[1]; ++i) zs.push_back(problem.grid.lower(d - 1) + i * problem.grid.spacing(d - 1));
  // Parameters are numbered row-major over the lateral node grid in both layer modes.
  std::vector<std::vector<double>> values(shape[0], std::vector<double>(shape[1]));
  for (Eigen::Index p = 0; p < q.size(); ++p) values[p / shape[1]][p % shape[1]] = q[p];
  return json{{"shape", shape}, {"y", ys}, {"z", zs}, {"values", values}};
}

json tr_ledger_json(const TrResult& result) {
  json rows = json::array();
  for (const auto& r : result.ledger) {
    json row{{"i", r.iteration},
             {"J_h", r.value_h},
             {"J_r", r.value_r},
             {"eta", r.eta},
             {"rho", std::isfinite(r.rho) ? json(r.rho) : json("inf")},
             {"accepted", r.accepted},
             {"n_Q", r.n_q},
             {"n_V", r.n_v},
             {"fom_solves_cum", r.fom_solves},
             {"seconds", r.seconds}};
    if (r.accepted) {
      row["pod_tolerance_used"] = r.enrichment.tolerance_used;
      row["value_gap"] = r.enrichment.value_gap;
      row["gradient_gap"] = r.enrichment.gradient_gap;
    }
    if (r.delta_u >= 0.0) {
      row["delta_u"] = r.delta_u;
      row["delta_J"] = r.delta_j;
      row["true_state_error"] = r.true_state_error;
      row["true_J_gap"] = r.true_gap;
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace trirgnm
