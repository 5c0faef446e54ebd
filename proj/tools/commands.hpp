#pragma once

#include <string>
#include <vector>

#include "config.hpp"

namespace aoi::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitNumerical = 2;
inline constexpr int kExitCertification = 3;

struct Artifact {
  std::string name;
  std::string content;
};

/// Everything a command produced. Files are only written once the whole
/// command has succeeded.
struct CommandResult {
  std::vector<Artifact> files;
  std::vector<std::string> log;  // one-line summaries for the console
  int status = kExitOk;          // kExitCertification when a check failed
};

std::string version();

CommandResult cmd_solve(const ExperimentConfig& cfg);
CommandResult cmd_structure(const ExperimentConfig& cfg);
CommandResult cmd_dominance(const ExperimentConfig& cfg);
CommandResult cmd_fleet(const ExperimentConfig& cfg);

/// Writes every artifact under `dir` (created if missing) via temporary
/// files renamed into place.
void write_artifacts(const std::string& dir, const std::vector<Artifact>& files);

}  // namespace aoi::cli
