#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "pilotscat/scenario.hpp"

namespace pilotscat {

inline constexpr const char* tool_version = "0.1.0";

struct EmittedFile {
  std::string name;  // relative to the output directory
  std::string role;
  std::size_t rows = 0;  // data rows, header excluded
  std::string sha256;
};

struct RunManifest {
  std::string scenario_name;
  std::string task;
  std::string scenario_sha256;  // of the canonical scenario text
  std::string tool_version;
  std::uint64_t seed = 0;
  int threads = 1;
  std::vector<EmittedFile> files;
  double wall_clock_s = 0.0;
  // Task-specific scalar results (JSON object text).
  std::string summary_json = "{}";

  std::string to_json() const;
};

// Hex SHA-256 of a byte string.
std::string sha256_hex(const std::string& bytes);

// "%.17g"
std::string format_number(double v);

// Runs the scenario's task, writes its CSV files, scenario.ini and
// manifest.json into out_dir (created if missing) and returns the manifest.
// Errors from the task are rethrown with the task name prepended, keeping
// their type.
RunManifest run_scenario(const Scenario& scenario, const std::filesystem::path& out_dir);

}  // namespace pilotscat
