#pragma once

// Dominance deltas, threshold functions and certification of the structural
// properties of optimal Lagrangian policies.

#include <climits>
#include <string>
#include <vector>

#include "aoi/mdp.hpp"

namespace aoi {

inline constexpr int kPlusInfinity = INT_MAX;
inline constexpr int kMinusInfinity = INT_MIN;
inline constexpr double kStructureSlack = 1e-9;

/// J(state, w) - J(state, w').
double dominance_delta(const ProblemInstance& inst, const ValueTable& vt, std::size_t state,
                       Action w, Action w_prime, double lambda);

/// Threshold functions of every action over the age grid. An age belongs to
/// Phi_w (scan over a_l at fixed a_r, h) or Psi_w (scan over a_r at fixed
/// a_l, h) when w dominates every other action there within the slack.
/// Empty sets give the sentinels: max -> kMinusInfinity, min -> kPlusInfinity.
class ThresholdReport {
 public:
  ThresholdReport() = default;
  ThresholdReport(const ProblemInstance& inst, const ValueTable& vt, double lambda,
                  double slack = kStructureSlack);

  const StateSpace& space() const { return space_; }
  double lambda() const { return lambda_; }

  int phi_plus(Action w, Age a_r, std::size_t h) const { return phi_plus_[w.index()][row_r(a_r, h)]; }
  int phi_minus(Action w, Age a_r, std::size_t h) const { return phi_minus_[w.index()][row_r(a_r, h)]; }
  int psi_plus(Action w, Age a_l, std::size_t h) const { return psi_plus_[w.index()][row_l(a_l, h)]; }
  int psi_minus(Action w, Age a_l, std::size_t h) const { return psi_minus_[w.index()][row_l(a_l, h)]; }

  /// min(psi-_(0,1), psi-_(1,1)): above it the optimal action updates.
  int psi_update_minus(Age a_l, std::size_t h) const;
  /// a_l <= phi+_(0,0)(a_r, h) and a_r <= psi+_(0,0)(a_l, h).
  bool in_idle_region(Age a_l, Age a_r, std::size_t h) const;
  /// w dominates all other actions at the state (within the slack).
  bool dominant(std::size_t state, Action w) const { return dominant_[state * kNumActions + w.index()] != 0; }

 private:
  std::size_t row_r(Age a_r, std::size_t h) const { return h * space_.cap_r() + (a_r - 1); }
  std::size_t row_l(Age a_l, std::size_t h) const { return h * space_.cap_l() + (a_l - 1); }

  StateSpace space_;
  double lambda_ = 0.0;
  std::vector<std::uint8_t> dominant_;
  std::array<std::vector<int>, kNumActions> phi_plus_, phi_minus_, psi_plus_, psi_minus_;
};

ThresholdReport compute_thresholds(const ProblemInstance& inst, const ValueTable& vt, double lambda,
                                   double slack = kStructureSlack);

struct Violation {
  std::string check;
  Age a_l = 0;
  Age a_r = 0;
  std::size_t h = 0;
  double magnitude = 0.0;
};

struct CheckReport {
  std::size_t checked = 0;
  std::vector<Violation> violations;
  bool pass() const { return violations.empty(); }
  double worst() const;
  void merge(const CheckReport& other);
};

/// V non-decreasing in a_l and in a_r on the whole grid.
CheckReport certify_value_monotonicity(const ValueTable& vt, double slack = kStructureSlack);

/// Monotonicity of the dominance deltas along a_l or a_r:
///   (0,0) vs (1,0) non-decreasing in a_l; (0,0) vs (0,1), (1,1) non-decreasing in a_r;
///   (0,1), (1,1) vs any other non-increasing in a_r; (1,0) vs any other non-increasing in a_l.
CheckReport certify_dominance_deltas(const ProblemInstance& inst, const ValueTable& vt,
                                     double lambda, double slack = kStructureSlack);

struct StructureCertificate {
  CheckReport idle_region;      // A
  CheckReport update_region;    // B
  CheckReport sample_region;    // C
  CheckReport sample_update;    // D
  CheckReport implications;     // neighbor propagation of (0,1), (1,0), (1,1)
  std::size_t ties_resolved = 0;  // policy differs from the structured action by a J tie only
  bool pass() const {
    return idle_region.pass() && update_region.pass() && sample_region.pass() &&
           sample_update.pass() && implications.pass();
  }
};

/// Checks properties A-D of the threshold structure and the neighbor
/// implications for `policy`. A state where the policy's action differs from
/// the structured one but has the same J (within the slack) counts as a tie,
/// not a violation.
StructureCertificate certify_threshold_structure(const ProblemInstance& inst,
                                                 const DeterministicPolicy& policy,
                                                 const ValueTable& vt, double lambda,
                                                 double slack = kStructureSlack);

enum class SweepParameter {
  sampling_cost,  // c_s takes each grid value; tracked: phi-_(1,0)(a_r, h)
  updating_cost,  // c_u(h) = value / h; tracked: psi-_{u=1}(a_l, h)
};

struct SweepPoint {
  double value = 0.0;
  std::vector<int> threshold;  // indexed by age - 1
};

struct SweepReport {
  SweepParameter parameter = SweepParameter::sampling_cost;
  double lambda = 0.0;
  std::size_t h = 0;
  std::vector<SweepPoint> points;
  CheckReport monotonicity;  // threshold non-decreasing in the swept cost, pointwise
};

/// Solves the instance at every grid value (sorted ascending) and checks the
/// tracked threshold is pointwise non-decreasing in the cost.
SweepReport threshold_monotonicity_sweep(const ProblemInstance& base, SweepParameter parameter,
                                         std::vector<double> grid, double lambda, std::size_t h);

/// For fixed (a_l, a_r), the channel indices where the policy updates form a
/// suffix of the gain-sorted alphabet. Exact J ties are resolved toward the
/// suffix shape.
CheckReport certify_channel_upset(const ProblemInstance& inst, const DeterministicPolicy& policy,
                                  const ValueTable& vt, double lambda,
                                  const std::vector<Age>& device_ages = {},
                                  double slack = kStructureSlack);

}  // namespace aoi
