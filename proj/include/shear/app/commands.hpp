#pragma once

#include <iosfwd>
#include <string>

#include "shear/app/config.hpp"
#include "shear/app/io.hpp"

namespace shear::app {

enum class Command { solve_state, optimize, certify, verify_properties };

Command parse_command(const std::string& name);
const char* command_name(Command cmd);

/// Exit codes: 0 all declared tolerances met, 1 a tolerance failed (the
/// report is still written), 2 invalid parameters, 3 runtime failure.
/// Failures write failure.json into the output directory.
enum ExitCode : int { exit_ok = 0, exit_tolerance = 1, exit_config = 2, exit_runtime = 3 };

struct CommandOutcome {
  int exit_code = exit_ok;
  Json report;       // the main report, or the failure record
  std::string path;  // where the report was written
};

/// Runs one workflow and writes its artifacts under cfg.output.dir.
/// Progress lines go to log; JSON reports contain no timings.
CommandOutcome run_command(Command cmd, const RunConfig& cfg, std::ostream& log);

/// Machine-readable failure record.
Json failure_record(const std::string& command, const std::string& kind, const std::string& message);

}  // namespace shear::app
