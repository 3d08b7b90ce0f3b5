#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "shear/app/commands.hpp"
#include "shear/context.hpp"

using namespace shear;
using namespace shear::app;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("shear_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

RunConfig small_config(const fs::path& out, const std::string& extra = "") {
  RunConfig c = parse_config_text("[mesh]\nnx = 4\nny = 4\n[schedule]\nfactors = 0.1, 0.01, 0.0001\n" + extra);
  c.output.dir = out.string();
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int config_error_line(const std::string& text) {
  try {
    parse_config_text(text);
  } catch (const ConfigError& e) {
    return e.line();
  }
  return -1;
}

std::string config_error(const std::string& text) {
  try {
    parse_config_text(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("minimal config applies the documented defaults") {
  const RunConfig c = parse_config_text("[mesh]\nnx = 8\nny = 8\n");
  CHECK(c.mesh.nx == 8);
  CHECK(c.mesh.ny == 8);
  CHECK(c.mesh.file.empty());
  CHECK(c.problem.params.g == 0.5);
  CHECK(c.problem.params.mu == 1.0);
  CHECK(c.problem.params.nu == 1.0);
  CHECK(c.problem.alpha == 1e-2);
  CHECK(c.problem.target == "vortex");
  CHECK(c.problem.anchor == AnchorPolicy::self_consistent);
  REQUIRE(c.deltas.size() == 4);
  CHECK(c.deltas[0] == doctest::Approx(0.05));
  CHECK(c.deltas[3] == doctest::Approx(5e-5));
  CHECK(c.state.tol_residual == 1e-11);
  CHECK(c.optimizer.state.tol_residual == c.state.tol_residual);
  CHECK(c.certify.num_probes == 16);
  CHECK(c.certify.seed == 42);
  CHECK(c.verify.samples == 100000);
  CHECK(c.output.dir == "out");
  CHECK((c.output.vtk && c.output.csv && c.output.json));
  // Every documented key carries the expected type used in diagnostics.
  for (const auto& k : config_keys()) CHECK(std::string(k.type).size() > 0);
}

TEST_CASE("config rejections name the key, the constraint and the line") {
  const std::string e = config_error("[problem]\ng = 0.5\n[schedule]\ndeltas = 0.1, 0.6\n");
  CHECK(e.find("delta < g") != std::string::npos);
  CHECK(e.find("schedule.deltas") != std::string::npos);
  CHECK(config_error_line("[problem]\ng = 0.5\n[schedule]\ndeltas = 0.1, 0.6\n") == 4);
  CHECK(config_error("[schedule]\ndeltas = 0.5\n").find("delta < g") != std::string::npos);

  CHECK(config_error("[problem]\nalpha = -1\n").find("problem.alpha") != std::string::npos);
  CHECK(config_error_line("[problem]\nalpha = -1\n") == 2);
  CHECK_THROWS_AS(parse_config_text("[problem]\nmu = 0\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("[problem]\nnu = abc\n"), ConfigError);

  CHECK(config_error_line("# header\n[mesh]\nnx = 4\nnz = 4\n") == 4);
  CHECK(config_error("[mesh]\nnz = 4\n").find("nz") != std::string::npos);
  CHECK(config_error_line("[solvers]\n") == 1);
  CHECK(config_error_line("[mesh]\nnx = 4\nnx = 5\n") == 3);
  CHECK(config_error_line("nx = 4\n") == 1);
  CHECK(config_error_line("[mesh]\nnx 4\n") == 2);
  CHECK(config_error("[mesh]\nnx = 2.5\n").find("integer") != std::string::npos);
  CHECK_THROWS_AS(parse_config_text("[schedule]\ndeltas = 0.01, 0.02\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("[schedule]\ndeltas = 0.01\nfactors = 0.1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("[problem]\ntarget = spiral\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("[problem]\nanchor = latest\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("[mesh]\nfile = does_not_exist.txt\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("[output]\nformats = vtk, png\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("/nonexistent/shear.ini"), ConfigError);
}

TEST_CASE("solve-state with zero control gives zero fields and exit 0") {
  const fs::path out = scratch("zero_state");
  std::ostringstream log;
  const CommandOutcome r = run_command(Command::solve_state, small_config(out, "[problem]\ncontrol = zero\n"), log);
  CHECK(r.exit_code == exit_ok);
  CHECK(r.report["state"]["residual"].get<double>() == 0.0);
  CHECK(r.report["state"]["velocity_max_abs"].get<double>() == 0.0);
  CHECK(r.report["state"]["pressure_max_abs"].get<double>() == 0.0);
  for (const char* f : {"state.json", "state.vtk", "state_velocity.csv", "residuals.csv", "mesh.txt"}) {
    CHECK(fs::exists(out / f));
  }
  const std::string vtk = slurp(out / "state.vtk");
  CHECK(vtk.find("CELL_TYPES") != std::string::npos);
  CHECK(vtk.find("VECTORS velocity") != std::string::npos);
  CHECK(vtk.find("SCALARS abs_strain") != std::string::npos);
}

TEST_CASE("solve-state with a nonzero load converges and writes a residual log") {
  const fs::path out = scratch("vortex_state");
  std::ostringstream log;
  const RunConfig cfg = small_config(out, "[problem]\ncontrol = vortex\ncontrol_amplitude = 20\n");
  const CommandOutcome r = run_command(Command::solve_state, cfg, log);
  CHECK(r.exit_code == exit_ok);
  CHECK(r.report["state"]["residual"].get<double>() <= cfg.state.tol_residual);
  CHECK(r.report["state"]["velocity_h1_norm"].get<double>() > 0.0);
  CHECK(slurp(out / "residuals.csv").rfind("iteration,residual,step,method", 0) == 0);
}

TEST_CASE("exported mesh re-imported yields identical assembly matrices") {
  const fs::path out = scratch("mesh_round_trip");
  std::ostringstream log;
  const RunConfig cfg = small_config(out);
  REQUIRE(run_command(Command::solve_state, cfg, log).exit_code == exit_ok);
  const Mesh original = Mesh::structured(cfg.mesh.nx, cfg.mesh.ny);
  const Mesh reread = read_mesh_file((out / "mesh.txt").string());
  const Assembler a(make_discretization(original));
  const Assembler b(make_discretization(reread));
  auto same = [](const SparseMatrix& x, const SparseMatrix& y) {
    if (x.rows() != y.rows() || x.cols() != y.cols() || x.nonZeros() != y.nonZeros()) return false;
    return Eigen::MatrixXd(x - y).cwiseAbs().maxCoeff() == 0.0;
  };
  CHECK(same(a.ops().strain, b.ops().strain));
  CHECK(same(a.ops().mass, b.ops().mass));
  CHECK(same(a.ops().h1, b.ops().h1));
  CHECK(same(a.ops().divergence, b.ops().divergence));

  // The same file drives a run through mesh.file.
  const fs::path out2 = scratch("mesh_from_file");
  RunConfig from_file = cfg;
  from_file.mesh.file = (out / "mesh.txt").string();
  from_file.output.dir = out2.string();
  const CommandOutcome r = run_command(Command::solve_state, from_file, log);
  CHECK(r.exit_code == exit_ok);
  CHECK(r.report["mesh"] == run_command(Command::solve_state, cfg, log).report["mesh"]);
}

TEST_CASE("verify-properties with seed 42 reports the monotonicity worst case") {
  const fs::path out = scratch("properties");
  RunConfig cfg = small_config(out);
  cfg.verify.samples = 20000;
  cfg.verify.seed = 42;
  std::ostringstream log;
  const CommandOutcome r = run_command(Command::verify_properties, cfg, log);
  CHECK(r.exit_code == exit_ok);
  REQUIRE(r.report["dimensions"].size() == 2);
  for (const auto& d : r.report["dimensions"]) {
    CHECK(d["monotone_min"].get<double>() >= -1e-10);
    CHECK(d["samples"].get<long>() == 20000);
  }
  CHECK(r.report["consistency"]["fitted_k"].get<double>() > 0.0);
  CHECK(r.report["pass"]["jacobian_decay"].get<bool>());
  const Json stored = read_json((out / "properties.json").string());
  CHECK(stored == r.report);
  const CommandOutcome again = run_command(Command::verify_properties, cfg, log);
  CHECK(again.report.dump() == r.report.dump());
}

TEST_CASE("optimize and certify are deterministic and certify the small benchmark") {
  std::string reports[2][2];
  for (int run = 0; run < 2; ++run) {
    const fs::path out = scratch("determinism_" + std::to_string(run));
    const RunConfig cfg = small_config(out);
    std::ostringstream log;
    const CommandOutcome opt = run_command(Command::optimize, cfg, log);
    CHECK(opt.exit_code == exit_ok);
    CHECK(opt.report["stages"].size() == 3);
    CHECK(fs::exists(out / "solution.json"));
    const CommandOutcome cert = run_command(Command::certify, cfg, log);
    CHECK(cert.exit_code == exit_ok);
    CHECK(cert.report["source"] == "solution.json");
    reports[run][0] = slurp(out / "path.json");
    reports[run][1] = slurp(out / "certify.json");
  }
  CHECK(reports[0][0] == reports[1][0]);
  CHECK(reports[0][1] == reports[1][1]);
}

TEST_CASE("certify reruns the path when no stored solution matches") {
  const fs::path out = scratch("certify_fresh");
  std::ostringstream log;
  const RunConfig cfg = small_config(out);
  const CommandOutcome cert = run_command(Command::certify, cfg, log);
  CHECK(cert.exit_code == exit_ok);
  CHECK(cert.report["source"] == "path");

  // A stale solution from another problem is ignored.
  RunConfig other = small_config(out, "[problem]\ntarget_amplitude = 2\n");
  REQUIRE(run_command(Command::optimize, other, log).exit_code == exit_ok);
  CHECK(run_command(Command::certify, cfg, log).report["source"] == "path");
}

TEST_CASE("certify on an unconverged run exits nonzero and still writes the report") {
  const fs::path out = scratch("unconverged");
  const RunConfig cfg = small_config(out, "[solver]\nopt_max_iters = 1\n");
  std::ostringstream log;
  const CommandOutcome opt = run_command(Command::optimize, cfg, log);
  CHECK(opt.exit_code == exit_tolerance);
  CHECK_FALSE(opt.report["all_converged"].get<bool>());
  const CommandOutcome cert = run_command(Command::certify, cfg, log);
  CHECK(cert.exit_code != exit_ok);
  CHECK(fs::exists(out / "certify.json"));
  CHECK_FALSE(cert.report["pass"]["converged"].get<bool>());
  CHECK(cert.report["status"] == "failed");
}

TEST_CASE("runtime failures produce a machine-readable record") {
  const fs::path out = scratch("failure");
  RunConfig cfg = small_config(out, "[problem]\ncontrol = vortex\ncontrol_amplitude = 50\n[solver]\nmax_iters = 1\n"
                                    "picard_max_iters = 1\n");
  std::ostringstream log;
  const CommandOutcome r = run_command(Command::solve_state, cfg, log);
  CHECK(r.exit_code == exit_runtime);
  CHECK(r.report["status"] == "failed");
  CHECK(r.report["kind"] == "convergence");
  CHECK(r.report.contains("history"));
  CHECK(fs::exists(out / "failure.json"));
  CHECK(Json::parse(log.str().substr(log.str().find('{'))) == r.report);

  cfg.problem.params.g = -1.0;
  CHECK(run_command(Command::solve_state, cfg, log).exit_code == exit_config);
  CHECK_THROWS_AS(parse_command("plot"), ParameterError);
  CHECK(parse_command(command_name(Command::verify_properties)) == Command::verify_properties);
}
