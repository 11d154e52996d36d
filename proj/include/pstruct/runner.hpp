#pragma once

// Executes one configured experiment and writes its artifacts.

#include <string>

#include "pstruct/config.hpp"
#include "pstruct/report.hpp"

namespace pstruct::runner {

struct Outcome {
  report::Results results;
  int failures = 0;  // FAIL verdicts
  std::string summary;
};

/// Runs the pipeline named by config.command without touching the disk.
Outcome execute(const config::ExperimentConfig& config);

/// execute() plus emit_report() and manifest.json. Returns the process exit
/// status: 0, or 1 when strict and some verdict is FAIL.
int run(const config::ExperimentConfig& config, bool strict, std::string* summary = nullptr);

report::Json manifest(const config::ExperimentConfig& config, double wall_seconds);

}  // namespace pstruct::runner
