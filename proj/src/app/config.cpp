#include "shear/app/config.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace shear::app {

const std::vector<KeySpec>& config_keys() {
  static const std::vector<KeySpec> keys{
      {"problem", "mu", "positive real", "1"},
      {"problem", "nu", "positive real", "1"},
      {"problem", "g", "positive real", "0.5"},
      {"problem", "alpha", "positive real", "0.01"},
      {"problem", "target", "field name (zero|vortex|uniform|shear)", "vortex"},
      {"problem", "target_amplitude", "real", "1"},
      {"problem", "control", "field name (zero|vortex|uniform|shear)", "zero"},
      {"problem", "control_amplitude", "real", "0"},
      {"problem", "anchor", "anchor policy (self_consistent|previous|zero|fixed)", "self_consistent"},
      {"mesh", "nx", "integer >= 1", "16"},
      {"mesh", "ny", "integer >= 1", "16"},
      {"mesh", "x0", "real", "0"},
      {"mesh", "y0", "real", "0"},
      {"mesh", "x1", "real", "1"},
      {"mesh", "y1", "real", "1"},
      {"mesh", "file", "path", ""},
      {"mesh", "quad_order", "integer >= 4", "4"},
      {"schedule", "deltas", "list of reals in (0, g)", ""},
      {"schedule", "factors", "list of reals in (0, 1), times g", "0.1, 0.01, 0.001, 0.0001"},
      {"solver", "tol_residual", "positive real", "1e-11"},
      {"solver", "max_iters", "integer >= 1", "60"},
      {"solver", "linesearch", "real in (0, 1)", "0.5"},
      {"solver", "picard_relax", "real in (0, 1]", "1"},
      {"solver", "picard_max_iters", "integer >= 1", "2000"},
      {"solver", "newton", "boolean", "true"},
      {"solver", "parallel", "boolean", "true"},
      {"solver", "opt_max_iters", "integer >= 0", "200"},
      {"solver", "tol_grad", "positive real", "1e-8 (1 + |z_d|)"},
      {"solver", "linearized_tol", "positive real", "1e-12"},
      {"solver", "linearized_max_iters", "integer >= 1", "200"},
      {"solver", "linearized_damping", "real in (0, 1]", "0.7"},
      {"solver", "sensitivity_band", "positive real", "1e-6 g"},
      {"certify", "num_probes", "integer >= 0", "16"},
      {"certify", "seed", "unsigned integer", "42"},
      {"certify", "band_tol", "positive real", "1e-3 g"},
      {"verify", "samples", "integer >= 1", "100000"},
      {"verify", "seed", "unsigned integer", "42"},
      {"output", "dir", "path", "out"},
      {"output", "formats", "list of vtk|csv|json", "vtk, csv, json"},
  };
  return keys;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct Entry {
  std::string value;
  int line = 0;
};

class Reader {
 public:
  Reader(std::map<std::string, Entry> entries) : entries_(std::move(entries)) {}

  bool has(const std::string& k) const { return entries_.count(k) > 0; }

  [[noreturn]] void fail(const std::string& k, const std::string& expected, const std::string& detail = "") const {
    const auto it = entries_.find(k);
    const int line = it == entries_.end() ? 0 : it->second.line;
    std::ostringstream os;
    os << "config key '" << k << "'";
    if (line > 0) os << " (line " << line << ")";
    os << ": expected " << expected;
    if (it != entries_.end()) os << ", got '" << it->second.value << "'";
    if (!detail.empty()) os << "; " << detail;
    throw ConfigError(os.str(), k, line);
  }

  const std::string* raw(const std::string& k) const {
    const auto it = entries_.find(k);
    return it == entries_.end() ? nullptr : &it->second.value;
  }

  void real(const std::string& k, double& out, const char* expected = "real") const {
    const std::string* v = raw(k);
    if (!v) return;
    out = to_real(k, *v, expected);
  }

  void positive(const std::string& k, double& out) const {
    const std::string* v = raw(k);
    if (!v) return;
    const double x = to_real(k, *v, "positive real");
    if (!(x > 0.0)) fail(k, "positive real");
    out = x;
  }

  template <class Int>
  void integer(const std::string& k, Int& out, long min, const char* expected) const {
    const std::string* v = raw(k);
    if (!v) return;
    errno = 0;
    char* end = nullptr;
    const long long x = std::strtoll(v->c_str(), &end, 10);
    if (v->empty() || *end != '\0' || errno != 0 || x < min) fail(k, expected);
    out = static_cast<Int>(x);
  }

  void unsigned64(const std::string& k, std::uint64_t& out) const {
    const std::string* v = raw(k);
    if (!v) return;
    errno = 0;
    char* end = nullptr;
    const unsigned long long x = std::strtoull(v->c_str(), &end, 10);
    if (v->empty() || v->front() == '-' || *end != '\0' || errno != 0) fail(k, "unsigned integer");
    out = static_cast<std::uint64_t>(x);
  }

  void boolean(const std::string& k, bool& out) const {
    const std::string* v = raw(k);
    if (!v) return;
    if (*v == "true" || *v == "1" || *v == "yes" || *v == "on") {
      out = true;
    } else if (*v == "false" || *v == "0" || *v == "no" || *v == "off") {
      out = false;
    } else {
      fail(k, "boolean");
    }
  }

  std::vector<std::string> list(const std::string& k) const {
    std::vector<std::string> items;
    const std::string* v = raw(k);
    if (!v) return items;
    std::stringstream ss(*v);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (!item.empty()) items.push_back(item);
    }
    return items;
  }

  std::vector<double> reals(const std::string& k, const char* expected) const {
    std::vector<double> out;
    for (const auto& s : list(k)) out.push_back(to_real(k, s, expected));
    if (raw(k) && out.empty()) fail(k, expected);
    return out;
  }

 private:
  double to_real(const std::string& k, const std::string& v, const char* expected) const {
    errno = 0;
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (v.empty() || *end != '\0' || errno != 0 || !std::isfinite(x)) fail(k, expected);
    return x;
  }

  std::map<std::string, Entry> entries_;
};

void check_field_name(const Reader& r, const std::string& key, const std::string& name) {
  const auto& names = analytic_field_names();
  if (std::find(names.begin(), names.end(), name) == names.end()) {
    r.fail(key, "field name (zero|vortex|uniform|shear)");
  }
}

}  // namespace

RunConfig parse_config_text(const std::string& text, const std::string& base_dir) {
  std::map<std::string, const KeySpec*> known;
  for (const auto& k : config_keys()) known[std::string(k.section) + "." + k.key] = &k;

  std::map<std::string, Entry> entries;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("line " + std::to_string(lineno) + ": malformed section header", "", lineno);
      section = trim(line.substr(1, line.size() - 2));
      bool ok = false;
      for (const auto& k : config_keys()) ok = ok || section == k.section;
      if (!ok) throw ConfigError("line " + std::to_string(lineno) + ": unknown section [" + section + "]", section, lineno);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'", "", lineno);
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string full = section + "." + key;
    if (section.empty()) {
      throw ConfigError("line " + std::to_string(lineno) + ": key '" + key + "' outside any section", key, lineno);
    }
    if (!known.count(full)) {
      std::ostringstream os;
      os << "line " << lineno << ": unknown key '" << key << "' in section [" << section << "] (known:";
      for (const auto& k : config_keys()) {
        if (section == k.section) os << ' ' << k.key;
      }
      os << ')';
      throw ConfigError(os.str(), full, lineno);
    }
    if (entries.count(full)) {
      throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + full + "' (first at line " +
                            std::to_string(entries[full].line) + ")",
                        full, lineno);
    }
    entries[full] = {trim(line.substr(eq + 1)), lineno};
  }

  const Reader r(std::move(entries));
  RunConfig c;
  auto& pb = c.problem;
  r.positive("problem.mu", pb.params.mu);
  r.positive("problem.nu", pb.params.nu);
  r.positive("problem.g", pb.params.g);
  r.positive("problem.alpha", pb.alpha);
  if (const auto* v = r.raw("problem.target")) {
    check_field_name(r, "problem.target", *v);
    pb.target = *v;
  }
  r.real("problem.target_amplitude", pb.target_amplitude);
  if (const auto* v = r.raw("problem.control")) {
    check_field_name(r, "problem.control", *v);
    pb.control = *v;
  }
  r.real("problem.control_amplitude", pb.control_amplitude);
  if (const auto* v = r.raw("problem.anchor")) {
    try {
      pb.anchor = parse_anchor_policy(*v);
    } catch (const ParameterError&) {
      r.fail("problem.anchor", "anchor policy (self_consistent|previous|zero|fixed)");
    }
  }

  auto& m = c.mesh;
  r.integer("mesh.nx", m.nx, 1, "integer >= 1");
  r.integer("mesh.ny", m.ny, 1, "integer >= 1");
  r.real("mesh.x0", m.rect.x0);
  r.real("mesh.y0", m.rect.y0);
  r.real("mesh.x1", m.rect.x1);
  r.real("mesh.y1", m.rect.y1);
  if (!(m.rect.x1 > m.rect.x0) || !(m.rect.y1 > m.rect.y0)) {
    r.fail(r.has("mesh.x1") ? "mesh.x1" : "mesh.y1", "x1 > x0 and y1 > y0");
  }
  r.integer("mesh.quad_order", m.quad_order, 4, "integer >= 4");
  if (const auto* v = r.raw("mesh.file")) {
    std::filesystem::path p(*v);
    if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
    if (!std::filesystem::exists(p)) r.fail("mesh.file", "existing mesh file", "not found: " + p.string());
    m.file = p.string();
  }

  const double g = pb.params.g;
  if (r.has("schedule.deltas") && r.has("schedule.factors")) {
    r.fail("schedule.factors", "either deltas or factors, not both");
  }
  if (r.has("schedule.deltas")) {
    c.deltas = r.reals("schedule.deltas", "list of reals in (0, g)");
  } else {
    std::vector<double> f{0.1, 0.01, 0.001, 0.0001};
    if (r.has("schedule.factors")) f = r.reals("schedule.factors", "list of reals in (0, 1)");
    for (double x : f) c.deltas.push_back(x * g);
  }
  const char* sched_key = r.has("schedule.deltas") ? "schedule.deltas" : "schedule.factors";
  for (std::size_t k = 0; k < c.deltas.size(); ++k) {
    if (!(c.deltas[k] > 0.0) || !(c.deltas[k] < g)) {
      std::ostringstream os;
      os << "constraint 0 < delta < g violated by delta=" << c.deltas[k] << " (g=" << g << ")";
      r.fail(sched_key, "regularization widths with 0 < delta < g", os.str());
    }
    if (k > 0 && !(c.deltas[k] < c.deltas[k - 1])) r.fail(sched_key, "strictly decreasing widths");
  }

  r.positive("solver.tol_residual", c.state.tol_residual);
  r.integer("solver.max_iters", c.state.max_iters, 1, "integer >= 1");
  r.real("solver.linesearch", c.state.linesearch, "real in (0, 1)");
  if (!(c.state.linesearch > 0.0 && c.state.linesearch < 1.0)) r.fail("solver.linesearch", "real in (0, 1)");
  r.real("solver.picard_relax", c.state.picard_relax, "real in (0, 1]");
  if (!(c.state.picard_relax > 0.0 && c.state.picard_relax <= 1.0)) r.fail("solver.picard_relax", "real in (0, 1]");
  r.integer("solver.picard_max_iters", c.state.picard_max_iters, 1, "integer >= 1");
  r.boolean("solver.newton", c.state.newton);
  r.boolean("solver.parallel", c.parallel);
  r.integer("solver.opt_max_iters", c.optimizer.max_iters, 0, "integer >= 0");
  r.positive("solver.tol_grad", c.optimizer.tol_grad);
  r.positive("solver.linearized_tol", c.linearized.tol_residual);
  r.integer("solver.linearized_max_iters", c.linearized.max_iters, 1, "integer >= 1");
  r.real("solver.linearized_damping", c.linearized.damping, "real in (0, 1]");
  if (!(c.linearized.damping > 0.0 && c.linearized.damping <= 1.0)) r.fail("solver.linearized_damping", "real in (0, 1]");
  r.positive("solver.sensitivity_band", c.linearized.band_tol);
  c.optimizer.state = c.state;

  r.integer("certify.num_probes", c.certify.num_probes, 0, "integer >= 0");
  r.unsigned64("certify.seed", c.certify.seed);
  r.positive("certify.band_tol", c.certify.band_tol);
  r.integer("verify.samples", c.verify.samples, 1, "integer >= 1");
  r.unsigned64("verify.seed", c.verify.seed);

  if (const auto* v = r.raw("output.dir")) {
    if (v->empty()) r.fail("output.dir", "nonempty path");
    c.output.dir = *v;
  }
  if (r.has("output.formats")) {
    c.output.vtk = c.output.csv = c.output.json = false;
    for (const auto& f : r.list("output.formats")) {
      if (f == "vtk") c.output.vtk = true;
      else if (f == "csv") c.output.csv = true;
      else if (f == "json") c.output.json = true;
      else r.fail("output.formats", "list of vtk|csv|json");
    }
  }

  pb.params.validate();
  return c;
}

RunConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path, "", 0);
  std::stringstream ss;
  ss << in.rdbuf();
  const auto dir = std::filesystem::path(path).parent_path();
  RunConfig c = parse_config_text(ss.str(), dir.empty() ? "." : dir.string());
  c.source = path;
  return c;
}

}  // namespace shear::app
