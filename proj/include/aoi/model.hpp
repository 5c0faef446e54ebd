#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace aoi {

/// Raised when an instance, policy or configuration value is out of its domain.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a numerical procedure fails (non-convergence, reducible chain, ...).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Age = int;

/// Ages are 1-based, exactly as the counters they model. Array indices
/// derived from them subtract one; see StateSpace.
struct AoiState {
  Age a_l = 1;
  Age a_r = 1;

  friend bool operator==(const AoiState&, const AoiState&) = default;
};

/// Sampling/updating decision of one device in one slot.
struct Action {
  bool s = false;
  bool u = false;

  friend bool operator==(const Action&, const Action&) = default;

  /// Index in the fixed tie-break order (0,0) < (0,1) < (1,0) < (1,1).
  constexpr int index() const { return (s ? 2 : 0) + (u ? 1 : 0); }
  static constexpr Action from_index(int i) { return Action{(i & 2) != 0, (i & 1) != 0}; }
};

inline constexpr int kNumActions = 4;
inline constexpr Action kIdle{false, false};
inline constexpr Action kUpdate{false, true};
inline constexpr Action kSample{true, false};
inline constexpr Action kSampleUpdate{true, true};

std::string to_string(Action w);

/// Finite channel-gain alphabet with its probability mass function.
class ChannelModel {
 public:
  ChannelModel() = default;
  ChannelModel(std::vector<double> gains, std::vector<double> pmf);

  /// Uniform pmf over the given gains.
  static ChannelModel uniform(std::vector<double> gains);
  /// pmf proportional to non-negative weights.
  static ChannelModel from_weights(std::vector<double> gains, std::span<const double> weights);

  std::size_t size() const { return gains_.size(); }
  std::span<const double> gains() const { return gains_; }
  std::span<const double> pmf() const { return pmf_; }
  double gain(std::size_t i) const { return gains_.at(i); }
  double prob(std::size_t i) const { return pmf_.at(i); }
  double mean() const;

 private:
  std::vector<double> gains_;
  std::vector<double> pmf_;
};

/// Energy model: sampling cost, per-gain updating cost and the average budget.
struct CostModel {
  double c_s = 0.0;
  std::vector<double> c_u;  // indexed by channel index
  double c_max = 0.0;

  /// c_u(h) = scale / h on every gain of the alphabet.
  static CostModel inverse_gain(double c_s, double scale, const ChannelModel& channel, double c_max);
};

/// Single-device problem. State space size is cap_l * cap_r * |gains|.
struct ProblemInstance {
  Age cap_l = 1;
  Age cap_r = 1;
  ChannelModel channel;
  CostModel costs;

  /// Throws ValidationError on any broken invariant.
  void validate() const;
};

// One-step dynamics (pure functions).
Age step_device_age(Age a_l, bool s, Age cap_l);
Age step_destination_age(Age a_l, Age a_r, bool u, Age cap_r);
AoiState transition(AoiState state, Action w, const ProblemInstance& inst);

double energy_cost(Action w, std::size_t channel_index, const CostModel& costs);
/// a_r + lambda * C(w); lambda must be non-negative.
double lagrange_cost(AoiState state, std::size_t channel_index, Action w, double lambda,
                     const CostModel& costs);

/// Dense indexing of (a_l, a_r, channel index).
///
/// aoi index  = (a_l - 1) * cap_r + (a_r - 1)
/// state index = aoi index * |H| + channel index
class StateSpace {
 public:
  StateSpace() = default;
  explicit StateSpace(const ProblemInstance& inst);
  StateSpace(Age cap_l, Age cap_r, std::size_t num_channels);

  Age cap_l() const { return cap_l_; }
  Age cap_r() const { return cap_r_; }
  std::size_t num_channels() const { return num_channels_; }
  std::size_t num_aoi() const { return static_cast<std::size_t>(cap_l_) * cap_r_; }
  std::size_t num_states() const { return num_aoi() * num_channels_; }

  std::size_t aoi_index(AoiState a) const {
    return static_cast<std::size_t>(a.a_l - 1) * cap_r_ + static_cast<std::size_t>(a.a_r - 1);
  }
  AoiState aoi_state(std::size_t aoi) const {
    return AoiState{static_cast<Age>(aoi / cap_r_) + 1, static_cast<Age>(aoi % cap_r_) + 1};
  }
  std::size_t index(AoiState a, std::size_t h) const { return aoi_index(a) * num_channels_ + h; }
  std::size_t index(Age a_l, Age a_r, std::size_t h) const { return index(AoiState{a_l, a_r}, h); }
  AoiState aoi_of(std::size_t state) const { return aoi_state(state / num_channels_); }
  std::size_t channel_of(std::size_t state) const { return state % num_channels_; }

  /// next_aoi()[aoi * 4 + w.index()] is the successor aoi index.
  std::span<const std::uint32_t> next_aoi() const { return next_; }
  std::size_t next_aoi(std::size_t aoi, Action w) const { return next_[aoi * kNumActions + w.index()]; }

 private:
  Age cap_l_ = 0;
  Age cap_r_ = 0;
  std::size_t num_channels_ = 0;
  std::vector<std::uint32_t> next_;
};

}  // namespace aoi
