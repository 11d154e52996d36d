#pragma once

// Experiment configuration: an INI file with sections, overridden by
// `section.key=value` assignments.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "pstruct/constitutive.hpp"
#include "pstruct/grid.hpp"
#include "pstruct/problems.hpp"
#include "pstruct/solver.hpp"

namespace pstruct::config {

enum class Command { Solve, Audit, Constants, Reconstruct, Sweep };

std::string to_string(Command c);
Command command_from_string(const std::string& name);

struct OutputConfig {
  std::filesystem::path directory = "out";
  bool json = true;
  bool csv = true;
  bool fields = false;
};

struct ConstantsConfig {
  int samples = 20;
  std::uint64_t seed = 1;
  std::vector<double> qs{2, 3, 4, 6, 8, 12, 16};
};

struct AuditConfig {
  std::vector<std::string> estimates{"p_gt_2_W22", "p_lt_2_W22", "p_lt_2_W2q", "tangential_fe1"};
  std::vector<double> mus{1.0, 0.5, 0.25, 0.125};
  std::vector<double> amplitudes{0.25, 1.0, 4.0, 16.0};
  std::vector<std::uint64_t> seeds{1, 2, 3};
  double q = 4.0;
  double holder_q = 6.0;
  std::size_t pair_budget = 20000;
};

struct SweepConfig {
  std::string estimate = "auto";
  std::vector<double> ps{1.2, 1.5, 1.8};
  std::vector<double> mus{0.0, 0.1};
  std::vector<double> amplitudes{0.25, 1.0, 4.0, 16.0};
  std::vector<std::uint64_t> seeds{1, 2, 3};
  double q = 2.0;
};

struct ExperimentConfig {
  Command command = Command::Solve;
  grid::DomainKind kind = grid::DomainKind::CubicPeriodic;
  int n = 16;
  double p = 2.0;
  double mu = 1.0;
  constitutive::Structure structure = constitutive::Structure::FullGradient;
  solver::SolveConfig solver;
  problems::RhsDescriptor rhs;
  OutputConfig output;
  ConstantsConfig constants;
  AuditConfig audit;
  SweepConfig sweep;
  double residual_tol = 1e-6;  // [reconstruct]
  int threads = 1;
};

/// Applies INI text and then the overrides. Unknown keys and malformed values
/// throw ConfigError naming the key.
ExperimentConfig parse_config(const std::string& ini_text,
                              const std::vector<std::string>& overrides = {},
                              ExperimentConfig base = {});

ExperimentConfig load_config(const std::filesystem::path& path,
                             const std::vector<std::string>& overrides = {});

/// Complete INI rendering; parse_config(to_ini(c)) reproduces c.
std::string to_ini(const ExperimentConfig& c);

std::string format_double(double x);

}  // namespace pstruct::config
