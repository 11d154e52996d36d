#include <CLI11.hpp>
#include <iostream>
#include <utility>

#include "pstruct/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Regularity experiments for p-structure systems"};
  app.require_subcommand(1, 1);
  std::string config_path;
  std::vector<std::string> overrides;
  std::string output;
  bool strict = false;
  app.add_option("--config", config_path, "INI configuration file");
  app.add_option("--set", overrides, "Override as section.key=value (repeatable)");
  app.add_option("--output", output, "Output directory (overrides output.directory)");
  app.add_flag("--strict", strict, "Exit with status 1 when a verdict is FAIL");
  app.fallthrough();
  const std::pair<const char*, const char*> commands[] = {
      {"solve", "Solve one configured problem"},
      {"audit", "Estimate constants and check every listed estimate"},
      {"constants", "Estimate the Laplacian constants c4 and c5(q)"},
      {"reconstruct", "Solve, then check the pointwise normal-derivative bound"},
      {"sweep", "Run one estimate check per p in sweep.ps"},
  };
  for (const auto& [name, help] : commands) app.add_subcommand(name, help);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    overrides.push_back("run.command=" + command);
    if (!output.empty()) overrides.push_back("output.directory=" + output);
    const auto cfg = config_path.empty() ? pstruct::config::parse_config("", overrides)
                                         : pstruct::config::load_config(config_path, overrides);
    std::string summary;
    const int status = pstruct::runner::run(cfg, strict, &summary);
    std::cout << summary << "\n" << "artifacts in " << cfg.output.directory.string() << "\n";
    return status;
  } catch (const pstruct::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == pstruct::ErrorCode::ConfigError ? 2 : 3;
  }
}
