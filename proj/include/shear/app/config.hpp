#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "shear/control.hpp"
#include "shear/errors.hpp"
#include "shear/mesh.hpp"
#include "shear/problems.hpp"
#include "shear/sensitivity.hpp"

namespace shear::app {

/// Rejected configuration; line is 0 when the problem is not tied to one line.
class ConfigError : public ParameterError {
 public:
  ConfigError(const std::string& what, std::string key, int line)
      : ParameterError(what), key_(std::move(key)), line_(line) {}
  const std::string& key() const { return key_; }
  int line() const { return line_; }

 private:
  std::string key_;
  int line_;
};

struct ProblemBlock {
  PlasticityParams params;
  double alpha = 1e-2;
  std::string target = "vortex";
  double target_amplitude = 1.0;
  std::string control = "zero";  // fixed control for solve-state
  double control_amplitude = 0.0;
  AnchorPolicy anchor = AnchorPolicy::self_consistent;
};

struct MeshBlock {
  int nx = 16;
  int ny = 16;
  Rect rect;
  std::string file;  // resolved path; overrides nx/ny when set
  int quad_order = 4;
};

struct CertifyBlock {
  int num_probes = 16;
  std::uint64_t seed = 42;
  double band_tol = -1.0;  // negative selects 1e-3 g
};

struct VerifyBlock {
  long samples = 100000;
  std::uint64_t seed = 42;
};

struct OutputBlock {
  std::string dir = "out";
  bool vtk = true;
  bool csv = true;
  bool json = true;
};

struct RunConfig {
  std::string source;  // config path, empty for in-memory text
  ProblemBlock problem;
  MeshBlock mesh;
  std::vector<double> deltas;  // absolute widths
  SolverConfig state;
  OptimizerConfig optimizer;
  LinearizedConfig linearized;
  bool parallel = true;
  CertifyBlock certify;
  VerifyBlock verify;
  OutputBlock output;
};

/// Flat INI: [section] headers, key = value lines, '#' or ';' comments.
/// Relative file paths resolve against base_dir.
RunConfig parse_config_text(const std::string& text, const std::string& base_dir = ".");
RunConfig parse_config(const std::string& path);

/// Documented keys per section, in file order; used for diagnostics and docs.
struct KeySpec {
  const char* section;
  const char* key;
  const char* type;
  const char* fallback;
};
const std::vector<KeySpec>& config_keys();

}  // namespace shear::app
