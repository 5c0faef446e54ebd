#pragma once

// Unconstrained average-cost MDP for a fixed Lagrange multiplier:
// relative value iteration, exact policy evaluation and structure-aware
// policy iteration.

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "aoi/kernels.hpp"
#include "aoi/markov.hpp"
#include "aoi/model.hpp"

namespace aoi {

/// Differential values V(a_l, a_r, h; lambda) with the average cost theta.
struct ValueTable {
  StateSpace space;
  std::vector<double> values;
  double lambda = 0.0;
  double theta = 0.0;

  double at(Age a_l, Age a_r, std::size_t h) const { return values[space.index(a_l, a_r, h)]; }
};

class DeterministicPolicy {
 public:
  DeterministicPolicy() = default;
  DeterministicPolicy(StateSpace space, Action fill);
  DeterministicPolicy(StateSpace space, std::vector<std::uint8_t> actions);

  const StateSpace& space() const { return space_; }
  Action at(std::size_t state) const { return Action::from_index(actions_[state]); }
  Action at(Age a_l, Age a_r, std::size_t h) const { return at(space_.index(a_l, a_r, h)); }
  void set(std::size_t state, Action w) { actions_[state] = static_cast<std::uint8_t>(w.index()); }
  std::span<const std::uint8_t> raw() const { return actions_; }

  friend bool operator==(const DeterministicPolicy& a, const DeterministicPolicy& b) {
    return a.actions_ == b.actions_;
  }

 private:
  StateSpace space_;
  std::vector<std::uint8_t> actions_;
};

struct SolverOptions {
  double tolerance = 1e-9;  // span seminorm of successive value differences
  std::size_t max_iterations = 2'000'000;
  double damping = 0.5;  // aperiodicity transform weight
  std::optional<kernels::Exec> exec;  // default picks by state-space size
};

/// The reference state (a_l=1, a_r=1, first channel) pins V to zero.
inline constexpr std::size_t kReferenceState = 0;

ValueTable relative_value_iteration(const ProblemInstance& inst, double lambda,
                                    const SolverOptions& opts = {});

/// J(s, w) for all four actions of one state, in action-index order.
std::array<double, kNumActions> state_action_costs(const ProblemInstance& inst,
                                                   const ValueTable& vt, double lambda,
                                                   std::size_t state);

/// Dense J table: j[state * 4 + action].
struct StateActionCost {
  StateSpace space;
  std::vector<double> j;

  double at(std::size_t state, Action w) const { return j[state * kNumActions + w.index()]; }
  double min_at(std::size_t state) const;
};
StateActionCost state_action_cost(const ProblemInstance& inst, const ValueTable& vt, double lambda);

/// Markov chain over (a_l, a_r, h) induced by a deterministic policy.
SparseChain induced_chain(const ProblemInstance& inst, const DeterministicPolicy& policy);

struct PolicyValue {
  double theta = 0.0;
  ValueTable values;
};

/// Exact average Lagrange cost and bias of a unichain policy.
PolicyValue policy_evaluation(const ProblemInstance& inst, const DeterministicPolicy& policy,
                              double lambda, std::size_t reference = kReferenceState);

struct PolicyIterationResult {
  DeterministicPolicy policy;
  double theta = 0.0;
  ValueTable values;
  int iterations = 0;
  std::size_t shortcut_decisions = 0;  // states settled by the neighbor implications
  bool fallback_used = false;          // plain improvement steps were needed at the end
};

/// Policy iteration whose improvement step first applies the neighbor
/// implications (0,1)->(0,1) along a_r, (1,0)->(1,0) along a_l and
/// (1,1)->(1,1) along a_r, and only minimizes J when none applies.
PolicyIterationResult structure_aware_policy_iteration(
    const ProblemInstance& inst, double lambda,
    const std::optional<DeterministicPolicy>& warm_start = std::nullopt);

/// Per-state argmin of J; exact ties go to the lowest action index.
DeterministicPolicy extract_greedy_policy(const ProblemInstance& inst, const ValueTable& vt,
                                          double lambda);

/// max_s |theta + V(s) - min_w J(s, w)|
double bellman_residual(const ProblemInstance& inst, const ValueTable& vt, double lambda);

}  // namespace aoi
