#pragma once

// Machine-readable run report written by `encopt optimize`. The schema is
// documented in docs/report-schema.md.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "encopt/logdet.hpp"

namespace encopt {

inline constexpr int kReportSchemaMajor = 1;
inline constexpr int kReportSchemaMinor = 0;
inline constexpr const char* kToolVersion = "0.1.0";

struct RunInput {
  std::string channel;
  Index r = 2;
  InputMode mode = InputMode::real_qubit;
  HeuristicConfig config;
  int restarts = 1;
  std::uint64_t seed = 0;
  std::string init = "random";
  int jobs = 1;
};

struct RestartRecord {
  int index = 0;
  std::uint64_t seed = 0;
  std::string initial;  // "random" or the encoder URI
  OptimizationResult result;
};

struct Verification {
  double oracle_purity = 0;
  RealVector argmin_angles;
  int resolution = 0;
  double cross_check_residual = 0;
};

struct RunReport {
  RunInput input;
  std::vector<RestartRecord> restarts;
  std::optional<int> best;  // index into restarts
  std::optional<Verification> verification;
  std::string tool_version = kToolVersion;
  double wall_clock_seconds = 0;
};

/// Best restart: smallest eps among certified restarts. In general_r mode
/// uncertified restarts with a feasible iterate also qualify.
std::optional<int> select_best(const std::vector<RestartRecord>& restarts, InputMode mode);

std::string to_json(const RunReport& report);
/// Throws Error(schema) on malformed input or an unsupported major version.
RunReport parse_report(const std::string& text);

void save_report(const std::filesystem::path& path, const RunReport& report);
RunReport load_report(const std::filesystem::path& path);

}  // namespace encopt
