#pragma once

// Seeded slot-synchronous simulation of single-device policies and of fleets
// under the learned or zero-wait controller.

#include <cstdint>
#include <variant>
#include <vector>

#include "aoi/fleet.hpp"

namespace aoi {

struct SimConfig {
  std::uint64_t horizon = 100'000;
  std::uint64_t seed = 1;
  std::uint64_t burn_in = 0;
  std::size_t replications = 1;

  void validate() const;
};

/// Mean and batch-means standard error of a slot sequence (100 non-overlapping batches).
class BatchMeans {
 public:
  BatchMeans(std::uint64_t expected_count, std::size_t batches = 100);
  void add(double x);
  std::uint64_t count() const { return count_; }
  double mean() const { return count_ ? sum_ / static_cast<double>(count_) : 0.0; }
  double standard_error() const;

 private:
  std::uint64_t batch_len_;
  std::vector<double> batch_sums_;
  std::uint64_t count_ = 0;
  double sum_ = 0.0;
};

struct DeviceMetrics {
  double avg_aoi = 0.0;
  double se_aoi = 0.0;
  double avg_energy = 0.0;
  double se_energy = 0.0;
  std::uint64_t slots = 0;
};

struct SingleRunResult {
  DeviceMetrics pooled;  // replication means averaged; SE from batch means (one run) or replications
  std::vector<DeviceMetrics> replications;
  std::vector<int> mixture_choice;  // 1 or 2 per replication, empty for deterministic policies
};

using SinglePolicy = std::variant<DeterministicPolicy, MixturePolicy>;

/// Simulates from (a_l, a_r) = (1, 1) with i.i.d. channel draws. Mixture
/// policies flip their coin once per replication at slot 0.
SingleRunResult run_single(const ProblemInstance& inst, const SinglePolicy& policy,
                           const SimConfig& config);

enum class Controller { learned, zero_wait };

struct TraceRecord {
  std::uint64_t slot = 0;
  std::uint32_t device = 0;
  Age a_l = 0, a_r = 0;
  std::uint32_t h_index = 0;
  bool s = false, u = false;
  double energy = 0.0;
  double lambda = 0.0;
};

struct WindowRecord {
  std::uint64_t window = 0;
  std::uint64_t end_slot = 0;
  double max_dq = 0.0;       // max over devices and entries of |Q(end) - Q(start)|
  double max_dlambda = 0.0;  // max over devices of |lambda(end) - lambda(start)|
  double avg_aoi = 0.0;      // per-device destination AoI averaged over the window
  double avg_energy = 0.0;
};

struct FleetRunConfig {
  SimConfig sim;
  LearningSchedule schedule;
  Controller controller = Controller::learned;
  std::uint64_t trace_every = 0;  // 0 disables the slot trace
  std::uint64_t window = 1000;
  /// Q tables to start from (default: zeros with the schedule's initial lambda).
  std::vector<PerDeviceQTable> initial_tables;
  bool learn = true;  // false freezes Q and lambda
};

struct FleetRunResult {
  std::vector<DeviceMetrics> metrics;  // post burn-in
  std::vector<PerDeviceQTable> tables;
  std::vector<TraceRecord> trace;
  std::vector<WindowRecord> convergence;
  std::uint64_t collisions = 0;  // slots with more than one update (always 0)
};

/// Runs the semi-distributed controller (or the zero-wait baseline) for the
/// horizon: grant, sampling, Q and lambda updates every slot.
FleetRunResult run_fleet(const FleetInstance& fleet, const FleetRunConfig& config);

/// First window end after which every later window has max_dq < dq_tol and
/// max_dlambda < dlambda_tol; nullopt if the run never settles.
std::optional<std::uint64_t> convergence_slot(const std::vector<WindowRecord>& windows,
                                              double dq_tol, double dlambda_tol);

}  // namespace aoi
