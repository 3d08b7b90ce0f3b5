#include "shear/app/commands.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>

#include "shear/properties.hpp"
#include "shear/stationarity.hpp"

namespace shear::app {

namespace fs = std::filesystem;

Command parse_command(const std::string& name) {
  if (name == "solve-state") return Command::solve_state;
  if (name == "optimize") return Command::optimize;
  if (name == "certify") return Command::certify;
  if (name == "verify-properties") return Command::verify_properties;
  throw ParameterError("unknown command '" + name + "' (expected solve-state|optimize|certify|verify-properties)");
}

const char* command_name(Command cmd) {
  switch (cmd) {
    case Command::solve_state: return "solve-state";
    case Command::optimize: return "optimize";
    case Command::certify: return "certify";
    case Command::verify_properties: return "verify-properties";
  }
  return "?";
}

Json failure_record(const std::string& command, const std::string& kind, const std::string& message) {
  return Json{{"command", command}, {"status", "failed"}, {"kind", kind}, {"message", message}};
}

namespace {

// Tolerances declared for the certify report.
constexpr double kWeakTol = 1e-6;
constexpr double kSignFraction = 0.05;

struct Workspace {
  std::shared_ptr<const Mesh> mesh;
  std::shared_ptr<SolverContext> ctx;
  ControlProblem problem;
};

Workspace make_workspace(const RunConfig& cfg) {
  Workspace w;
  w.mesh = std::make_shared<const Mesh>(cfg.mesh.file.empty() ? Mesh::structured(cfg.mesh.nx, cfg.mesh.ny, cfg.mesh.rect)
                                                              : read_mesh_file(cfg.mesh.file));
  w.ctx = SolverContext::create(*w.mesh, cfg.mesh.quad_order, cfg.parallel ? Exec::parallel : Exec::serial);
  const auto dofs = w.ctx->dofs_ptr();
  w.problem.params = cfg.problem.params;
  w.problem.alpha = cfg.problem.alpha;
  w.problem.z_d = analytic_field(dofs, cfg.problem.target, cfg.problem.target_amplitude);
  w.problem.u_bar = FeField::zeros(dofs, Role::control);
  w.problem.validate();
  return w;
}

// Everything that determines the discrete problem and the path; a stored
// solution is reused only when this matches exactly.
Json fingerprint(const RunConfig& cfg, const Workspace& w) {
  const auto& p = cfg.problem;
  return Json{{"mu", p.params.mu},
              {"nu", p.params.nu},
              {"g", p.params.g},
              {"alpha", p.alpha},
              {"target", p.target},
              {"target_amplitude", p.target_amplitude},
              {"anchor", anchor_policy_name(p.anchor)},
              {"mesh", {{"file", cfg.mesh.file},
                        {"nx", cfg.mesh.nx},
                        {"ny", cfg.mesh.ny},
                        {"rect", {cfg.mesh.rect.x0, cfg.mesh.rect.y0, cfg.mesh.rect.x1, cfg.mesh.rect.y1}},
                        {"quad_order", cfg.mesh.quad_order},
                        {"num_vertices", w.mesh->num_vertices()},
                        {"num_triangles", w.mesh->num_triangles()}}},
              {"deltas", cfg.deltas},
              {"tol_residual", cfg.state.tol_residual},
              {"opt_max_iters", cfg.optimizer.max_iters},
              {"tol_grad", cfg.optimizer.tol_grad}};
}

Json mesh_info(const Workspace& w) {
  return Json{{"num_vertices", w.mesh->num_vertices()},
              {"num_triangles", w.mesh->num_triangles()},
              {"num_velocity_dofs", w.ctx->assembler().num_velocity()},
              {"num_pressure_dofs", w.ctx->assembler().num_pressure()},
              {"h", w.mesh->max_edge_length()}};
}

Json history_json(const std::vector<IterationRecord>& h) {
  Json out = Json::array();
  for (const auto& r : h) out.push_back({{"iteration", r.iteration}, {"residual", r.residual}, {"step", r.step}, {"method", r.method}});
  return out;
}

void write_history_csv(const std::string& path, const std::vector<IterationRecord>& h) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << std::setprecision(17) << "iteration,residual,step,method\n";
  for (const auto& r : h) out << r.iteration << ',' << r.residual << ',' << r.step << ',' << r.method << '\n';
}

std::vector<double> vec(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd from_json(const Json& j, Eigen::Index expected, const char* what) {
  const auto v = j.get<std::vector<double>>();
  if (static_cast<Eigen::Index>(v.size()) != expected) {
    throw ShapeError(std::string("stored ") + what + " has " + std::to_string(v.size()) + " coefficients, expected " +
                     std::to_string(expected));
  }
  return Eigen::Map<const Eigen::VectorXd>(v.data(), expected);
}

std::vector<double> abs_strain(const Assembler& a, const FeField& y) {
  const auto ey = a.strain(y.coefficients());
  std::vector<double> out(ey.size());
  for (std::size_t k = 0; k < ey.size(); ++k) out[k] = ey[k].norm();
  return out;
}

fs::path prepare_dir(const RunConfig& cfg) {
  const fs::path dir(cfg.output.dir);
  fs::create_directories(dir);
  return dir;
}

void write_common_fields(const fs::path& dir, const std::string& stem, const Workspace& w, const RunConfig& cfg,
                         const VtkData& vtk, const std::vector<std::pair<std::string, const FeField*>>& csv_fields) {
  if (cfg.output.vtk) write_vtk((dir / (stem + ".vtk")).string(), w.ctx->assembler().dofs(), vtk, stem);
  if (cfg.output.csv) {
    for (const auto& [name, f] : csv_fields) write_field_csv((dir / (stem + "_" + name + ".csv")).string(), *f);
  }
}

CommandOutcome finish(const fs::path& path, Json report, bool ok) {
  report["status"] = ok ? "passed" : "failed";
  write_json(path.string(), report);
  return {ok ? exit_ok : exit_tolerance, std::move(report), path.string()};
}

// ---------------------------------------------------------------------------

CommandOutcome solve_state(const RunConfig& cfg, std::ostream& log) {
  const fs::path dir = prepare_dir(cfg);
  const Workspace w = make_workspace(cfg);
  const Assembler& a = w.ctx->assembler();
  const FeField u = analytic_field(w.ctx->dofs_ptr(), cfg.problem.control, cfg.problem.control_amplitude);
  StateSolver solver(w.ctx, cfg.problem.params);
  log << "solve-state: " << a.num_velocity() << " velocity dofs, control " << cfg.problem.control << '\n';
  const StateSolution s = solver.solve_nonsmooth(u, cfg.state);

  const auto strain = abs_strain(a, s.velocity);
  const RegionMasks masks = classify_sets(a, s.velocity, cfg.problem.params.g, reporting_band(cfg.problem.params.g));
  VtkData vtk;
  vtk.point_vectors = {{"velocity", &s.velocity}, {"control", &u}};
  vtk.pressure = &s.pressure;
  vtk.cell_scalars = {{"abs_strain", cell_average(a.disc(), strain)}};
  write_common_fields(dir, "state", w, cfg, vtk, {{"velocity", &s.velocity}, {"control", &u}});
  if (cfg.output.csv) {
    write_point_csv((dir / "state_points.csv").string(), a.disc(), {{"abs_strain", &strain}});
    write_history_csv((dir / "residuals.csv").string(), s.history);
  }
  write_mesh_file((dir / "mesh.txt").string(), *w.mesh);

  const bool ok = s.residual <= cfg.state.tol_residual;
  Json rep{{"command", "solve-state"},
           {"mesh", mesh_info(w)},
           {"control", {{"name", cfg.problem.control}, {"amplitude", cfg.problem.control_amplitude},
                        {"l2_norm", a.l2_norm(u.coefficients())}}},
           {"state", {{"residual", s.residual},
                      {"tol_residual", cfg.state.tol_residual},
                      {"iterations", s.iterations},
                      {"method", s.method},
                      {"velocity_h1_norm", a.h1_norm(s.velocity.coefficients())},
                      {"velocity_max_abs", s.velocity.coefficients().size() ? s.velocity.coefficients().cwiseAbs().maxCoeff() : 0.0},
                      {"pressure_max_abs", s.pressure.coefficients().size() ? s.pressure.coefficients().cwiseAbs().maxCoeff() : 0.0}}},
           {"regions", {{"band_tol", masks.band_tol},
                        {"measure_below", masks.measure_below},
                        {"measure_band", masks.measure_band},
                        {"measure_above", masks.measure_above}}},
           {"history", history_json(s.history)}};
  log << "solve-state: residual " << s.residual << " after " << s.iterations << " iterations (" << s.method << ")\n";
  return finish(dir / "state.json", std::move(rep), ok);
}

// ---------------------------------------------------------------------------

Json stage_json(const StageRecord& r) {
  return Json{{"delta", r.delta},
              {"iters", r.iters},
              {"j_value", r.j_value},
              {"grad_norm", r.grad_norm},
              {"tol_grad", r.tol_grad},
              {"state_residual", r.state_residual},
              {"multiplier_norm", r.multiplier_norm},
              {"control_distance", r.control_distance},
              {"state_distance", r.state_distance},
              {"converged", r.converged},
              {"status", r.status}};
}

struct FinalStage {
  FeField u, y, p, anchor;
  double delta = 0.0;
  bool converged = false;
};

bool all_converged(const PathResult& path) {
  if (!path.complete || path.table.empty()) return false;
  for (const auto& r : path.table) {
    if (!r.converged) return false;
  }
  return true;
}

struct PathRun {
  PathResult path;
  FinalStage last;
};

PathRun run_path(const RunConfig& cfg, const Workspace& w, std::ostream& log) {
  PathSchedule schedule;
  schedule.deltas = cfg.deltas;
  log << "optimize: " << cfg.deltas.size() << " stages, anchor " << anchor_policy_name(cfg.problem.anchor) << '\n';
  PathRun run;
  run.path = delta_path(w.ctx, w.problem, schedule, cfg.optimizer, cfg.problem.anchor);
  for (const auto& r : run.path.table) {
    log << "  delta " << r.delta << ": " << r.status << " after " << r.iters << " iterations, j " << r.j_value
        << ", |grad| " << r.grad_norm << '\n';
  }
  if (!run.path.stages.empty()) {
    const OptimizeResult& s = run.path.stages.back();
    run.last = {s.u, s.state.velocity, s.adjoint.p, run.path.anchors.back(), run.path.table.back().delta,
                all_converged(run.path)};
  }
  return run;
}

Json solution_json(const FinalStage& f, const Json& fp) {
  return Json{{"fingerprint", fp},
              {"delta", f.delta},
              {"converged", f.converged},
              {"control", vec(f.u.coefficients())},
              {"state", vec(f.y.coefficients())},
              {"adjoint", vec(f.p.coefficients())},
              {"anchor", vec(f.anchor.coefficients())}};
}

void write_stage_fields(const fs::path& dir, const std::string& stem, const Workspace& w, const RunConfig& cfg,
                        const FinalStage& f, const std::vector<double>* lambda_dot_strain) {
  const Assembler& a = w.ctx->assembler();
  const auto strain = abs_strain(a, f.y);
  VtkData vtk;
  vtk.point_vectors = {{"velocity", &f.y}, {"adjoint", &f.p}, {"control", &f.u}};
  vtk.cell_scalars = {{"abs_strain", cell_average(a.disc(), strain)}};
  if (lambda_dot_strain) vtk.cell_scalars.push_back({"lambda_dot_strain", cell_average(a.disc(), *lambda_dot_strain)});
  write_common_fields(dir, stem, w, cfg, vtk, {{"velocity", &f.y}, {"adjoint", &f.p}, {"control", &f.u}});
}

Json path_checks(const PathResult& path) {
  bool decreasing = path.table.size() >= 3;
  for (std::size_t k = 2; k < path.table.size(); ++k) {
    decreasing = decreasing && path.table[k].control_distance < path.table[k - 1].control_distance;
  }
  bool finite = !path.table.empty();
  bool growing = path.table.size() >= 3;
  for (std::size_t k = 0; k < path.table.size(); ++k) {
    finite = finite && std::isfinite(path.table[k].multiplier_norm);
    if (k >= 2) {
      const double d1 = path.table[k].multiplier_norm - path.table[k - 1].multiplier_norm;
      const double d0 = path.table[k - 1].multiplier_norm - path.table[k - 2].multiplier_norm;
      growing = growing && d0 > 0.0 && d1 >= d0;
    }
  }
  return Json{{"control_distances_strictly_decreasing", decreasing},
              {"multiplier_norms_finite", finite},
              {"multiplier_norms_monotone_growth", growing}};
}

CommandOutcome optimize(const RunConfig& cfg, std::ostream& log) {
  const fs::path dir = prepare_dir(cfg);
  const Workspace w = make_workspace(cfg);
  const PathRun run = run_path(cfg, w, log);
  const Json fp = fingerprint(cfg, w);

  Json stages = Json::array();
  std::vector<std::vector<double>> rows;
  for (const auto& r : run.path.table) {
    stages.push_back(stage_json(r));
    rows.push_back({r.delta, static_cast<double>(r.iters), r.j_value, r.grad_norm, r.state_residual, r.multiplier_norm,
                    r.control_distance, r.state_distance, r.converged ? 1.0 : 0.0});
  }
  if (cfg.output.csv) {
    write_table_csv((dir / "stages.csv").string(),
                    {"delta", "iters", "j_value", "grad_norm", "state_residual", "multiplier_norm", "control_distance",
                     "state_distance", "converged"},
                    rows);
  }
  if (!run.path.stages.empty()) {
    if (cfg.output.json) write_json((dir / "solution.json").string(), solution_json(run.last, fp));
    write_stage_fields(dir, "optimize", w, cfg, run.last, nullptr);
  }
  const bool ok = all_converged(run.path);
  Json rep{{"command", "optimize"},
           {"mesh", mesh_info(w)},
           {"config", fp},
           {"stages", stages},
           {"complete", run.path.complete},
           {"all_converged", ok},
           {"failure", run.path.failure},
           {"checks", path_checks(run.path)}};
  return finish(dir / "path.json", std::move(rep), ok);
}

// ---------------------------------------------------------------------------

CommandOutcome certify_cmd(const RunConfig& cfg, std::ostream& log) {
  const fs::path dir = prepare_dir(cfg);
  const Workspace w = make_workspace(cfg);
  const Assembler& a = w.ctx->assembler();
  const auto dofs = w.ctx->dofs_ptr();
  const Json fp = fingerprint(cfg, w);

  FinalStage f;
  std::string source = "path";
  bool loaded = false;
  const fs::path stored = dir / "solution.json";
  if (fs::exists(stored)) {
    const Json s = read_json(stored.string());
    if (s.value("fingerprint", Json()) == fp) {
      const Eigen::Index n = a.num_velocity();
      f.u = FeField(dofs, Role::control, from_json(s.at("control"), n, "control"));
      f.y = FeField(dofs, Role::velocity, from_json(s.at("state"), n, "state"));
      f.p = FeField(dofs, Role::adjoint, from_json(s.at("adjoint"), n, "adjoint"));
      f.anchor = FeField(dofs, Role::control, from_json(s.at("anchor"), n, "anchor"));
      f.delta = s.at("delta").get<double>();
      f.converged = s.at("converged").get<bool>();
      loaded = true;
      source = "solution.json";
      log << "certify: using stored solution " << stored.string() << '\n';
    } else {
      log << "certify: stored solution does not match the config, rerunning the path\n";
    }
  }
  if (!loaded) {
    const PathRun run = run_path(cfg, w, log);
    if (run.path.stages.empty()) throw std::runtime_error("path produced no stage: " + run.path.failure);
    f = run.last;
  }

  ControlProblem problem = w.problem;
  problem.u_bar = f.anchor;
  CertifyConfig cc;
  cc.band_tol = cfg.certify.band_tol;
  cc.num_probes = cfg.certify.num_probes;
  cc.seed = cfg.certify.seed;
  cc.state = cfg.state;
  cc.linearized = cfg.linearized;
  const StationarityReport r = certify(w.ctx, problem, f.u, f.y, f.p, RegParam{f.delta}, cc);

  const QuadTensorField lambda = compute_multiplier(a, f.y, f.p, problem.params.g, RegParam{f.delta});
  const auto ey = a.strain(f.y.coefficients());
  std::vector<double> strain(ey.size()), lde(ey.size()), region(ey.size());
  for (std::size_t k = 0; k < ey.size(); ++k) {
    strain[k] = ey[k].norm();
    lde[k] = contract(lambda.values[k], ey[k]);
    region[k] = static_cast<double>(static_cast<int>(r.regions.region[k]) - 1);  // -1 below, 0 band, 1 above
  }
  if (cfg.output.csv) {
    write_point_csv((dir / "sign.csv").string(), a.disc(),
                    {{"abs_strain", &strain}, {"lambda_dot_strain", &lde}, {"region", &region}});
  }
  write_stage_fields(dir, "certify", w, cfg, f, &lde);

  bool probes_ok = true;
  Json probes = Json::array();
  for (const auto& p : r.probes) {
    probes_ok = probes_ok && !p.flagged && !p.skipped;
    Json pj{{"id", p.id}, {"value", p.value}, {"flagged", p.flagged}, {"skipped", p.skipped}};
    if (!p.error.empty()) pj["error"] = p.error;
    probes.push_back(pj);
  }
  const Json pass{{"adjoint", r.weak.adjoint_scaled <= kWeakTol},
                  {"gradient", r.weak.gradient_scaled <= kWeakTol},
                  {"inactive_lambda", r.weak.inactive_lambda_scaled <= kWeakTol},
                  {"sign", r.sign.violating_fraction <= kSignFraction},
                  {"b_probes", probes_ok},
                  {"converged", f.converged}};
  bool ok = true;
  for (const auto& [k, v] : pass.items()) ok = ok && v.get<bool>();

  const auto& wr = r.weak;
  Json rep{{"command", "certify"},
           {"source", source},
           {"mesh", mesh_info(w)},
           {"g", r.g},
           {"delta", r.delta},
           {"j_value", r.j_value},
           {"state_gap_h1", r.state_gap},
           {"multiplier_l2_norm", lambda.l2_norm()},
           {"regions", {{"band_tol", r.regions.band_tol},
                        // the inactive-multiplier residual is only meaningful when delta <= band_tol
                        {"delta_within_band", r.delta <= r.regions.band_tol},
                        {"band_points", r.regions.band_points},
                        {"measure_below", r.regions.measure_below},
                        {"measure_band", r.regions.measure_band},
                        {"measure_above", r.regions.measure_above}}},
           {"weak", {{"adjoint", wr.adjoint},
                     {"adjoint_scaled", wr.adjoint_scaled},
                     {"gradient", wr.gradient},
                     {"gradient_scaled", wr.gradient_scaled},
                     {"gradient_proximal", wr.gradient_proximal},
                     {"inactive_lambda", wr.inactive_lambda},
                     {"inactive_lambda_scaled", wr.inactive_lambda_scaled},
                     {"above_lambda", wr.above_lambda},
                     {"above_lambda_scaled", wr.above_lambda_scaled},
                     {"state", wr.state},
                     {"state_scaled", wr.state_scaled},
                     {"tol", kWeakTol}}},
           {"sign", {{"band_points", r.sign.band_points},
                     {"band_measure", r.sign.band_measure},
                     {"max", r.sign.max},
                     {"mean", r.sign.mean},
                     {"violating_fraction", r.sign.violating_fraction},
                     {"tol_sign", r.sign.tol_sign},
                     {"vacuous", r.sign.vacuous},
                     {"max_fraction", kSignFraction}}},
           {"b_probes", {{"seed", cfg.certify.seed},
                         {"count", static_cast<int>(r.probes.size())},
                         {"probe_band", r.probe_band},
                         {"tol_b", r.tol_b},
                         {"min", r.min_probe},
                         {"values", probes}}},
           {"pass", pass},
           {"notes",
            {"The multiplier is lambda = m_delta'(eps y)^* eps p and enters the adjoint equation multiplied by nu; "
             "the alternative convention drops nu in front of (lambda, eps v).",
             "Control-space distances use the L2 norm.",
             "The weak-star limit of the Clarke selection on the band is not represented; only lambda is reported."}}};
  log << "certify: min probe " << r.min_probe << " (tol " << r.tol_b << "), weak adjoint " << wr.adjoint_scaled
      << ", gradient " << wr.gradient_scaled << '\n';
  return finish(dir / "certify.json", std::move(rep), ok);
}

// ---------------------------------------------------------------------------

CommandOutcome verify_properties(const RunConfig& cfg, std::ostream& log) {
  const fs::path dir = prepare_dir(cfg);
  PropertySuiteConfig pc;
  pc.samples = cfg.verify.samples;
  pc.seed = cfg.verify.seed;
  pc.g = cfg.problem.params.g;
  log << "verify-properties: " << pc.samples << " samples per dimension, seed " << pc.seed << '\n';
  const PropertyReport r = run_property_suite(pc);
  const PropertyVerdict v = judge_properties(r);

  Json dims = Json::array();
  for (const auto& d : r.dims) {
    dims.push_back({{"dim", d.dim},
                    {"samples", d.samples},
                    {"monotone_min", d.monotone_min},
                    {"monotone_smoothed_min", d.monotone_smoothed_min},
                    {"lipschitz_excess", d.lipschitz_excess},
                    {"jacobian_psd_min", d.jacobian_psd_min},
                    {"jacobian_bound", d.jacobian_bound},
                    {"symmetry_defect", d.symmetry_defect},
                    {"exactness_defect", d.exactness_defect},
                    {"exact_region_samples", d.exact_region_samples},
                    {"homogeneity_defect", d.homogeneity_defect}});
  }
  Json levels = Json::array();
  for (const auto& c : r.consistency) {
    levels.push_back({{"delta", c.delta},
                      {"max_gap", c.max_gap},
                      {"ratio", c.ratio},
                      {"jacobian_sup_error", c.jacobian_sup_error},
                      {"off_kink_samples", c.off_kink_samples}});
  }
  Json decay = Json::array();
  for (const auto& p : v.decay) {
    decay.push_back({{"delta", p.delta}, {"delta_tenth", p.delta_tenth}, {"error", p.error},
                     {"error_tenth", p.error_tenth}, {"pass", p.pass}});
  }
  const Json pass{{"monotone", v.monotone},         {"lipschitz", v.lipschitz},
                  {"jacobian_psd", v.jacobian_psd}, {"jacobian_bound", v.jacobian_bound},
                  {"exactness", v.exactness},       {"symmetry", v.symmetry},
                  {"homogeneity", v.homogeneity},   {"gap_linear", v.gap_linear},
                  {"jacobian_decay", v.jacobian_decay}};
  Json rep{{"command", "verify-properties"},
           {"seed", pc.seed},
           {"g", pc.g},
           {"kink_distance", pc.kink_distance},
           {"tolerances", {{"property", r.tol_num}, {"lipschitz", 1e-12}, {"jacobian_bound", 3.0}, {"decay_factor", 5.0}}},
           {"dimensions", dims},
           {"consistency", {{"levels", levels},
                            {"fitted_k", r.fitted_k},
                            {"sup_k", r.sup_k},
                            {"min_k", r.min_k},
                            {"jacobian_decay", decay}}},
           {"pass", pass}};
  log << "verify-properties: fitted K " << r.fitted_k << '\n';
  return finish(dir / "properties.json", std::move(rep), v.tensor_ok() && v.consistency_ok());
}

}  // namespace

CommandOutcome run_command(Command cmd, const RunConfig& cfg, std::ostream& log) {
  const std::string name = command_name(cmd);
  std::string kind = "runtime";
  int code = exit_runtime;
  std::string message;
  Json extra;
  try {
    switch (cmd) {
      case Command::solve_state: return solve_state(cfg, log);
      case Command::optimize: return optimize(cfg, log);
      case Command::certify: return certify_cmd(cfg, log);
      case Command::verify_properties: return verify_properties(cfg, log);
    }
  } catch (const ConvergenceError& e) {
    kind = "convergence";
    message = e.what();
    extra = history_json(e.history());
  } catch (const ParameterError& e) {
    kind = "parameter";
    code = exit_config;
    message = e.what();
  } catch (const std::exception& e) {
    message = e.what();
  }
  Json rec = failure_record(name, kind, message);
  if (!extra.is_null()) rec["history"] = extra;
  std::string path;
  try {
    const fs::path dir(cfg.output.dir);
    fs::create_directories(dir);
    path = (dir / "failure.json").string();
    write_json(path, rec);
  } catch (const std::exception&) {
    path.clear();  // the record still reaches the caller and the log
  }
  log << rec.dump() << '\n';
  return {code, std::move(rec), path};
}

}  // namespace shear::app
