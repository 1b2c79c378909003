#pragma once

#include <optional>
#include <string>
#include <vector>

#include "halfline/io.hpp"

namespace halfline::workbench {

enum ExitCode { kSuccess = 0, kConfigError = 2, kNumericalFailure = 3, kStrictWarning = 4 };

// One validation finding; `pointer` is a JSON pointer into the config
// (or "line N" for parse errors).
struct ConfigIssue {
  std::string pointer;
  std::string message;
};

struct Grid {
  double x_max = 0.0, h = 1e-3, k_max = 0.0, T_max = 0.0, x_step = 0.02;
  int k_count = 0;
};

struct JobConfig {
  std::string mode;
  Grid grid;
  int parallel = 1;
  std::string out = "out";
  std::string base_dir = ".";  // relative input paths resolve here
  io::Json raw;
};

inline const std::vector<std::string> kModes{"forward", "darboux", "inverse", "graph-recover",
                                             "roundtrip"};

// Schema and grid-consistency checks without numerics.
std::vector<ConfigIssue> validate(const io::Json& config, const std::string& base_dir = ".");

// Parses a config file; parse failures come back as issues with a line pointer.
std::vector<ConfigIssue> load(const std::string& path, JobConfig& out);

struct ManifestEntry {
  std::string path;  // relative to the output directory
  std::string sha256;
  std::size_t bytes = 0;
};

struct RunFlags {
  std::optional<std::string> mode, out;
  std::optional<int> parallel;
  bool strict = false;
};

struct RunResult {
  int exit_code = kSuccess;
  std::string stage;    // pipeline stage of a numerical failure
  std::string message;
  std::vector<ManifestEntry> manifest;
  std::vector<std::string> warnings;
};

std::string sha256_hex(const std::string& bytes);

// Applies the flag overrides, runs the pipeline, and writes the artifacts,
// report.json and manifest.json into the output directory.
RunResult run(JobConfig config, const RunFlags& flags = {});

}  // namespace halfline::workbench
