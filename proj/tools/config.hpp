#pragma once

// Experiment configuration read from a YAML file. Each mapping is checked
// against its allowed keys; errors carry the 1-based line and column of the
// offending node.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "aoi/cmdp.hpp"
#include "aoi/fleet.hpp"
#include "aoi/simulator.hpp"
#include "aoi/structure.hpp"

namespace aoi::cli {

class ConfigError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

struct SolveSection {
  std::vector<double> lambdas;  // Lagrangian solves: value table and policy map
  std::vector<double> c_max;    // constrained solves: lambda trace and mixture
  MultiplierSearch search = MultiplierSearch::robbins_monro;
  double eta = 1e-3;
  RobbinsMonroOptions robbins_monro;
  bool simulate = false;        // simulate each mixture with the sim section
};

struct SweepSpec {
  SweepParameter parameter = SweepParameter::sampling_cost;
  std::vector<double> grid;
  double lambda = 0.1;
  std::size_t channel_index = 0;
};

struct UpsetSpec {
  double lambda = 0.1;
  std::vector<Age> a_l;
};

struct StructureSection {
  std::vector<double> lambdas;
  std::optional<SweepSpec> sweep;
  std::optional<UpsetSpec> upset;
};

struct DominancePair {
  std::string name;
  std::vector<double> weights_i;  // over the instance's gain alphabet
  std::vector<double> weights_j;
};

struct DominanceSection {
  double c_max = 0.3;
  std::vector<DominancePair> pairs;
};

struct FleetSection {
  std::vector<std::size_t> devices;  // K grid
  std::vector<double> c_max;
  Age cap = 10;
  double cost_lo = 0.2;
  double cost_hi = 0.3;
  std::vector<Controller> controllers{Controller::learned, Controller::zero_wait};
  std::optional<Age> oracle_cap;  // exact joint oracle at reduced caps
  std::uint64_t window = 1000;
  std::uint64_t trace_every = 0;
};

struct ExperimentConfig {
  std::string hash;  // FNV-1a 64 of the file bytes, hex
  std::optional<ProblemInstance> instance;
  SolverOptions solver;
  std::optional<SolveSection> solve;
  std::optional<StructureSection> structure;
  std::optional<DominanceSection> dominance;
  std::optional<FleetSection> fleet;
  LearningSchedule schedule;
  SimConfig sim;
  bool burn_in_set = false;
  std::string output_dir = "out";
};

/// Parses YAML text. `origin` prefixes error messages (usually the path).
ExperimentConfig parse_config(const std::string& text, const std::string& origin = "config");
ExperimentConfig load_config(const std::string& path);

std::string fnv1a_hex(const std::string& bytes);

}  // namespace aoi::cli
