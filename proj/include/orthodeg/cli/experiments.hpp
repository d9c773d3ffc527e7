#pragma once

#include "orthodeg/cli/config.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace orthodeg::cli {

enum class CheckVerdict { pass, fail, expected_fail };
std::string to_string(CheckVerdict v);

struct Check {
  std::string name;
  CheckVerdict verdict = CheckVerdict::fail;
  double value = 0.0;
  double threshold = 0.0;
  std::string relation;  // "<=", ">=", "in", "=="
  std::string detail;
};

struct Table {
  std::string file;     // relative to the experiment directory
  std::string content;  // CSV text
};

struct ExperimentReport {
  std::string experiment;
  std::vector<std::pair<std::string, std::string>> config;
  std::vector<Check> checks;
  std::vector<Table> tables;
  std::string grid;    // grid.txt content, empty when the experiment has no grid
  std::string system;  // coordinate dump of the main system when requested
  double wall_seconds = 0.0;

  /// Informational expected-FAIL checks do not count against the run.
  bool all_pass() const;
  const Check* find(const std::string& name) const;
};

struct RunOptions {
  int jobs = 1;
  bool dump_system = false;
};

inline constexpr const char* kArtifactVersion = "1.0.0";

/// Dispatches to the owning module. Deterministic given config and seed
/// except for wall-clock fields.
ExperimentReport run_experiment(const ExperimentConfig& cfg, const RunOptions& options = {});

/// report.json text.
std::string report_json(const ExperimentReport& report);

/// Writes report.json, the CSV tables, grid.txt and system.txt into `dir`.
void write_report(const ExperimentReport& report, const std::string& dir);

/// 2*_a by exact rationals for `count` random admissible (d, n, a), compared
/// with an independent integer evaluation of 2 D / (D - 2).
Check exponent_arithmetic_check(std::uint64_t seed, int count = 10);

}  // namespace orthodeg::cli
