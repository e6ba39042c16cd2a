#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "trirgnm/experiment.hpp"
#include "trirgnm/io.hpp"

#ifndef TRIRGNM_CONFIG_DIR
#define TRIRGNM_CONFIG_DIR "configs"
#endif

namespace fs = std::filesystem;
using nlohmann::json;
using namespace trirgnm;

namespace {

struct Options {
  std::string config;
  std::string profile = "desk2d";
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string method = "both";
};

ExperimentConfig resolve_config(const Options& o) {
  const std::string path = o.config.empty() ? std::string(TRIRGNM_CONFIG_DIR) + "/" + o.profile + ".json" : o.config;
  ExperimentConfig c = load_config_file(path);
  if (o.seed) c.noise.seed = *o.seed;
  if (!o.out.empty()) c.output_dir = o.out;
  return c;
}

fs::path prepare_out(const ExperimentConfig& c) {
  fs::path dir(c.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + dir.string() + ": " + ec.message());
  return dir;
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

int cmd_assemble(const Options& o) {
  const auto c = resolve_config(o);
  const auto dir = prepare_out(c);
  Problem p = build_problem(c.problem);
  json summary{{"name", c.name},
               {"state_dim", p.ops.state_dim()},
               {"param_dim", p.ops.param_dim()},
               {"observation_rows", p.obs.rows()},
               {"observation_norm", p.obs.norm},
               {"steps", c.problem.time.steps},
               {"dt", c.problem.time.dt()},
               {"stiffness_nnz", p.ops.stiffness.constant_part().nonZeros()},
               {"load_hash", matrix_hash(p.load)}};
  write_matrix_file(dir / "load.bin", p.load);
  write_json(dir / "operators.json", summary);
  std::cout << summary.dump(2) << '\n';
  return 0;
}

int cmd_truth(const Options& o) {
  const auto c = resolve_config(o);
  const auto dir = prepare_out(c);
  Problem p = build_problem(c.problem);
  const Vector q = build_truth(p, c.truth);
  write_matrix_file(dir / "truth.bin", q);
  write_json(dir / "truth_field.json", field_dump(p, q));
  std::cout << "truth: " << q.size() << " coefficients, range [" << q.minCoeff() << ", " << q.maxCoeff() << "]\n";
  return 0;
}

int cmd_data(const Options& o) {
  const auto c = resolve_config(o);
  const auto dir = prepare_out(c);
  Problem p = build_problem(c.problem);
  const Vector q = build_truth(p, c.truth);
  const auto data = generate_data(p, q, c.noise.relative, c.noise.seed);
  write_matrix_file(dir / "y_exact.bin", data.exact);
  write_matrix_file(dir / "y_delta.bin", data.noisy);
  write_json(dir / "data.json", json{{"delta", data.delta}, {"relative", c.noise.relative},
                                     {"seed", c.noise.seed}, {"hash", data.hash}});
  std::cout << "data: delta = " << data.delta << ", hash " << data.hash << '\n';
  return 0;
}

int cmd_run(const Options& o) {
  const auto c = resolve_config(o);
  const auto dir = prepare_out(c);
  Problem p = build_problem(c.problem);
  const Vector truth = build_truth(p, c.truth);
  const auto data = generate_data(p, truth, c.noise.relative, c.noise.seed);
  set_data(p.model, p.obs, data.noisy);
  std::cout << "problem " << c.name << ": N_V = " << p.ops.state_dim() << ", N_Q = " << p.ops.param_dim()
            << ", delta = " << data.delta << '\n';

  const bool fom = o.method != "tr";
  const bool tr = o.method != "fom";
  auto res = run_comparison(p, data.delta, c, fom, tr, data.hash);

  std::vector<RunReport> reports;
  bool failed = false;
  if (res.fom) {
    reports.push_back(*res.fom);
    failed = failed || res.fom->failed;
    std::ofstream ledger(dir / "fom_ledger.csv");
    write_irgnm_ledger_csv(ledger, res.fom_run->ledger);
    write_json(dir / "fom_field.json", field_dump(p, res.fom->q));
  }
  if (res.tr) {
    reports.push_back(*res.tr);
    failed = failed || res.tr->failed;
    write_json(dir / "tr_ledger.json", tr_ledger_json(*res.tr_run));
    write_json(dir / "tr_field.json", field_dump(p, res.tr->q));
  }
  {
    std::ofstream table(dir / "table.csv");
    if (!table) throw std::runtime_error("cannot write table.csv");
    write_table_csv(table, c.name, reports);
  }
  write_table_csv(std::cout, c.name, reports);
  for (const auto& r : reports)
    if (r.failed) std::cerr << r.method << " run did not converge: " << r.message << '\n';
  return failed ? 3 : 0;
}

int cmd_report(const Options& o) {
  const auto c = resolve_config(o);
  const fs::path table = fs::path(c.output_dir) / "table.csv";
  std::ifstream in(table);
  if (!in) throw std::runtime_error("no results at " + table.string() + "; run `trirgnm run` first");
  const auto reports = read_table_csv(in);
  write_table_csv(std::cout, c.name, reports);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Trust-region reduced-basis IRGNM for elastic parameter identification"};
  app.require_subcommand(1);
  Options o;
  app.add_option("--config", o.config, "Experiment JSON file (overrides --profile)");
  app.add_option("--profile", o.profile, "Bundled configuration")
      ->check(CLI::IsMember({"desk2d", "desk3d", "paper3d"}));
  app.add_option("--seed", o.seed, "Noise seed");
  app.add_option("--out", o.out, "Output directory");

  auto* assemble = app.add_subcommand("assemble", "Assemble operators and write a summary");
  auto* truth = app.add_subcommand("truth", "Build the ground-truth parameter field");
  auto* data = app.add_subcommand("data", "Generate synthetic noisy measurements");
  auto* run = app.add_subcommand("run", "Run FOM-IRGNM and/or TR-IRGNM");
  run->add_option("--method", o.method, "fom, tr or both")->check(CLI::IsMember({"fom", "tr", "both"}));
  auto* report = app.add_subcommand("report", "Print the comparison table of a previous run");
  for (auto* s : {assemble, truth, data, run, report}) s->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*assemble) return cmd_assemble(o);
    if (*truth) return cmd_truth(o);
    if (*data) return cmd_data(o);
    if (*run) return cmd_run(o);
    if (*report) return cmd_report(o);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const SolverError& e) {
    std::cerr << "solver error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
