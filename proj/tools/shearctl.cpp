#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "shear/app/commands.hpp"

int main(int argc, char** argv) {
  using namespace shear::app;
  CLI::App app{"shearctl: optimal control of a viscoplastic Stokes flow"};
  std::string command, config, out;
  std::optional<std::uint64_t> seed;
  app.add_option("command", command, "solve-state | optimize | certify | verify-properties")
      ->required()
      ->check(CLI::IsMember({"solve-state", "optimize", "certify", "verify-properties"}));
  app.add_option("--config", config, "INI configuration file")->required()->check(CLI::ExistingFile);
  app.add_option("--out", out, "output directory (overrides output.dir)");
  app.add_option("--seed", seed, "seed for B-probe directions and the property suite");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    if (rc == 0) return 0;
    std::cerr << failure_record(command, "usage", e.what()).dump() << '\n';
    return exit_config;
  }

  RunConfig cfg;
  try {
    cfg = parse_config(config);
  } catch (const ConfigError& e) {
    Json rec = failure_record(command, "config", e.what());
    rec["key"] = e.key();
    rec["line"] = e.line();
    std::cerr << rec.dump() << '\n';
    return exit_config;
  } catch (const std::exception& e) {
    std::cerr << failure_record(command, "config", e.what()).dump() << '\n';
    return exit_config;
  }
  if (!out.empty()) cfg.output.dir = out;
  if (seed) {
    cfg.certify.seed = *seed;
    cfg.verify.seed = *seed;
  }
  const CommandOutcome res = run_command(parse_command(command), cfg, std::cerr);
  if (!res.path.empty()) std::cerr << "report: " << res.path << '\n';
  return res.exit_code;
}
