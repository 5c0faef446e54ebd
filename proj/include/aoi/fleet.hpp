#pragma once

// Several devices sharing one update channel (at most one update per slot):
// per-device Q-factors, the semi-distributed grant and sampling rules, their
// two-timescale online learning, the zero-wait baseline and an exact joint
// oracle for tiny fleets.

#include <array>
#include <optional>
#include <vector>

#include "aoi/cmdp.hpp"
#include "aoi/rng.hpp"

namespace aoi {

struct FleetInstance {
  std::vector<ProblemInstance> devices;  // costs.c_max is the per-device budget

  std::size_t size() const { return devices.size(); }
  void validate() const;

  /// K devices on a shared channel model and caps; c_s and the c_u scale of
  /// each device are drawn uniformly from [lo, hi] with c_u(h) = scale / h.
  static FleetInstance random_costs(std::size_t k, Age cap, const ChannelModel& channel,
                                    double c_max, const Rng& rng, double lo = 0.2, double hi = 0.3);
};

/// Per-slot device cost a_r + lambda * (C(w) - c_max).
kernels::StageCost device_stage_cost(const ProblemInstance& inst, double lambda);

/// Q_k over (state, u); q[2 * state + u].
struct PerDeviceQTable {
  StateSpace space;
  std::vector<double> q;
  double lambda = 0.0;
  double theta = 0.0;  // offline fixed point only
  std::vector<std::uint64_t> visits;

  PerDeviceQTable() = default;
  PerDeviceQTable(StateSpace sp, double lambda_k)
      : space(std::move(sp)), q(2 * space.num_states(), 0.0), lambda(lambda_k),
        visits(2 * space.num_states(), 0) {}

  double at(std::size_t state, int u) const { return q[2 * state + u]; }
  double min_at(std::size_t state) const { return std::min(q[2 * state], q[2 * state + 1]); }
};

/// The (state, u) pair pinned to zero: (a_l=1, a_r=1, first channel, u=0).
inline constexpr std::size_t kQReferenceState = 0;
inline constexpr int kQReferenceU = 0;

struct FixedPointOptions {
  double tolerance = 1e-9;
  std::size_t max_iterations = 2'000'000;
  double damping = 0.5;
  std::optional<kernels::Exec> exec;
};

/// Relative Q-iteration on the per-device fixed point equation with the
/// device's Lagrange cost; Q(reference) = 0 and theta is the average cost.
PerDeviceQTable per_device_fixed_point(const ProblemInstance& inst, double lambda,
                                       const FixedPointOptions& opts = {});

/// sum_h' p(h') min_u' Q(aoi, h', u')
double expected_min_q(const PerDeviceQTable& table, const ChannelModel& channel, std::size_t aoi);

/// F(state, u, s) = L(state, (s, u)) + expected_min_q(next aoi).
double device_target(const ProblemInstance& inst, const PerDeviceQTable& table, std::size_t state,
                     int u, int s);

/// Grant over the K+1 feasible joint updates from the reported (Q(.,0), Q(.,1))
/// pairs. Ties favor all-idle, then the lowest device index.
std::optional<std::size_t> updating_control(std::span<const std::array<double, 2>> reported);

/// argmin_s F(state, u, s); ties pick s = 0.
int sampling_control(const ProblemInstance& inst, const PerDeviceQTable& table, std::size_t state,
                     int granted_u);

enum class ReferenceMode {
  current,  // reference target re-evaluated each step with the current Q and lambda
  cached,   // target stored at the reference pair's last visit
};

struct LearningSchedule {
  double q_exponent = 0.51;   // epsilon_q = n^-q_exponent, n = visits of the entry
  double lambda_gain = 1.5;   // epsilon_lambda = lambda_gain * t^-lambda_exponent
  double lambda_exponent = 0.75;
  double explore_scale = 0.5; // exploration probability min(1, scale * t^-exponent)
  double explore_exponent = 0.3;
  double initial_lambda = 1.0;
  ReferenceMode reference = ReferenceMode::current;

  void validate() const;
  double q_step(std::uint64_t visits) const;
  double lambda_step(std::uint64_t t) const;
  double explore_probability(std::uint64_t t) const;
};

/// Reference target cache for ReferenceMode::cached. Zero before the first visit.
struct ReferenceCache {
  double value = 0.0;
  bool visited = false;
};

enum class SamplingRule {
  optimized,  // sampling_control
  zero_wait,  // s = u
};

int controller_sampling(SamplingRule rule, const ProblemInstance& inst, const PerDeviceQTable& table,
                        std::size_t state, int granted_u);

/// One asynchronous relative Q-learning step on the visited (state, u) entry:
///   Q += eps_q(n) * (F(state, u, s) - F_ref - Q)
/// where s is the controller's sampling rule applied to (state, u), so the
/// target does not depend on exploratory sampling. Only the visited entry
/// and its visit count change.
void q_learning_update(PerDeviceQTable& table, const ProblemInstance& inst, std::size_t state,
                       int u, SamplingRule rule, const LearningSchedule& schedule,
                       ReferenceCache& ref);

/// [lambda + eps_lambda(t) * (energy - c_max)]^+
double lambda_update(double lambda, double energy, double c_max, std::uint64_t t,
                     const LearningSchedule& schedule);

/// Zero-wait baseline: grant as updating_control, granted device takes (1,1),
/// everyone else idles.
std::vector<Action> zero_wait_policy(std::span<const std::array<double, 2>> reported);

/// Single-device policy induced by a Q table: u = argmin_u Q (ties idle),
/// s from sampling_control.
DeterministicPolicy semi_distributed_policy(const ProblemInstance& inst, const PerDeviceQTable& table);

/// Joint state space of a tiny fleet. joint = joint_aoi * |H_joint| + joint_h,
/// both mixed radix over devices (device 0 least significant).
class JointSpace {
 public:
  explicit JointSpace(const FleetInstance& fleet, std::size_t limit = 50'000);

  std::size_t num_devices() const { return spaces_.size(); }
  std::size_t num_aoi() const { return num_aoi_; }
  std::size_t num_channels() const { return num_channels_; }
  std::size_t size() const { return num_aoi_ * num_channels_; }
  const StateSpace& device(std::size_t k) const { return spaces_[k]; }

  std::size_t aoi_of(std::size_t joint_aoi, std::size_t k) const { return (joint_aoi / aoi_stride_[k]) % spaces_[k].num_aoi(); }
  std::size_t channel_of(std::size_t joint_h, std::size_t k) const { return (joint_h / h_stride_[k]) % spaces_[k].num_channels(); }
  /// Per-device state index of device k in a joint state.
  std::size_t device_state(std::size_t joint, std::size_t k) const;
  std::size_t aoi_stride(std::size_t k) const { return aoi_stride_[k]; }
  /// Probability of a joint channel index (independent devices).
  double channel_prob(std::size_t joint_h) const { return channel_prob_[joint_h]; }

 private:
  std::vector<StateSpace> spaces_;
  std::vector<std::size_t> aoi_stride_, h_stride_;
  std::vector<double> channel_prob_;
  std::size_t num_aoi_ = 1, num_channels_ = 1;
};

struct CentralizedSolution {
  double theta = 0.0;
  std::vector<double> q;  // q[joint * (K + 1) + u], u = 0 all idle, u = k + 1 device k updates
};

/// Exact joint Bellman equation over (joint state, grant) by relative
/// Q-iteration. Refuses joint spaces above the JointSpace limit.
CentralizedSolution centralized_oracle(const FleetInstance& fleet, std::span<const double> lambdas,
                                       const FixedPointOptions& opts = {});

/// Exact average Lagrange cost (sum over devices) of the semi-distributed
/// policy built from fixed Q tables, via the joint chain's stationary law.
double semi_distributed_lagrange_cost(const FleetInstance& fleet,
                                      std::span<const PerDeviceQTable> tables);

}  // namespace aoi
