#include "aoi/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace aoi {

std::string to_string(Action w) {
  std::string out = "(0,0)";
  out[1] = w.s ? '1' : '0';
  out[3] = w.u ? '1' : '0';
  return out;
}

ChannelModel::ChannelModel(std::vector<double> gains, std::vector<double> pmf)
    : gains_(std::move(gains)), pmf_(std::move(pmf)) {
  if (gains_.empty()) throw ValidationError("channel: empty gain alphabet");
  if (gains_.size() != pmf_.size())
    throw ValidationError("channel: gains and pmf have different lengths");
  for (std::size_t i = 0; i < gains_.size(); ++i) {
    if (!(gains_[i] > 0.0) || !std::isfinite(gains_[i]))
      throw ValidationError("channel: gains must be finite and positive");
    if (i > 0 && !(gains_[i] > gains_[i - 1]))
      throw ValidationError("channel: gains must be strictly increasing");
    if (!(pmf_[i] >= 0.0)) throw ValidationError("channel: pmf entries must be non-negative");
  }
  const double total = std::accumulate(pmf_.begin(), pmf_.end(), 0.0);
  if (std::abs(total - 1.0) > 1e-12) throw ValidationError("channel: pmf must sum to one");
}

ChannelModel ChannelModel::uniform(std::vector<double> gains) {
  std::vector<double> w(gains.size(), 1.0);
  return from_weights(std::move(gains), w);
}

ChannelModel ChannelModel::from_weights(std::vector<double> gains, std::span<const double> weights) {
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(total > 0.0)) throw ValidationError("channel: weights must have a positive sum");
  std::vector<double> pmf;
  pmf.reserve(weights.size());
  for (double w : weights) pmf.push_back(w / total);
  return ChannelModel(std::move(gains), std::move(pmf));
}

double ChannelModel::mean() const {
  double m = 0.0;
  for (std::size_t i = 0; i < gains_.size(); ++i) m += gains_[i] * pmf_[i];
  return m;
}

CostModel CostModel::inverse_gain(double c_s, double scale, const ChannelModel& channel, double c_max) {
  CostModel c;
  c.c_s = c_s;
  c.c_max = c_max;
  for (double g : channel.gains()) c.c_u.push_back(scale / g);
  return c;
}

void ProblemInstance::validate() const {
  if (cap_l < 1 || cap_r < 1) throw ValidationError("instance: age caps must be positive");
  if (channel.size() == 0) throw ValidationError("instance: channel model is empty");
  if (costs.c_u.size() != channel.size())
    throw ValidationError("instance: c_u must have one entry per channel gain");
  if (!(costs.c_s >= 0.0) || !std::isfinite(costs.c_s))
    throw ValidationError("instance: c_s must be finite and non-negative");
  if (!(costs.c_max >= 0.0)) throw ValidationError("instance: c_max must be non-negative");
  for (std::size_t i = 0; i < costs.c_u.size(); ++i) {
    if (!(costs.c_u[i] >= 0.0) || !std::isfinite(costs.c_u[i]))
      throw ValidationError("instance: c_u entries must be finite and non-negative");
    if (i > 0 && costs.c_u[i] > costs.c_u[i - 1])
      throw ValidationError("instance: c_u must be non-increasing in the channel gain");
  }
}

Age step_device_age(Age a_l, bool s, Age cap_l) {
  if (a_l < 1 || a_l > cap_l) throw ValidationError("device age out of range");
  return s ? 1 : std::min(a_l + 1, cap_l);
}

Age step_destination_age(Age a_l, Age a_r, bool u, Age cap_r) {
  if (a_l < 1 || a_r < 1 || a_r > cap_r) throw ValidationError("destination age out of range");
  return u ? std::min(a_l + 1, cap_r) : std::min(a_r + 1, cap_r);
}

AoiState transition(AoiState state, Action w, const ProblemInstance& inst) {
  if (state.a_l > inst.cap_l) throw ValidationError("device age out of range");
  return AoiState{step_device_age(state.a_l, w.s, inst.cap_l),
                  step_destination_age(state.a_l, state.a_r, w.u, inst.cap_r)};
}

double energy_cost(Action w, std::size_t channel_index, const CostModel& costs) {
  if (channel_index >= costs.c_u.size()) throw ValidationError("unknown channel index");
  return (w.s ? costs.c_s : 0.0) + (w.u ? costs.c_u[channel_index] : 0.0);
}

double lagrange_cost(AoiState state, std::size_t channel_index, Action w, double lambda,
                     const CostModel& costs) {
  if (!(lambda >= 0.0)) throw ValidationError("Lagrange multiplier must be non-negative");
  return static_cast<double>(state.a_r) + lambda * energy_cost(w, channel_index, costs);
}

StateSpace::StateSpace(const ProblemInstance& inst)
    : StateSpace(inst.cap_l, inst.cap_r, inst.channel.size()) {}

StateSpace::StateSpace(Age cap_l, Age cap_r, std::size_t num_channels)
    : cap_l_(cap_l), cap_r_(cap_r), num_channels_(num_channels) {
  if (cap_l < 1 || cap_r < 1) throw ValidationError("state space: caps must be positive");
  next_.resize(num_aoi() * kNumActions);
  for (std::size_t a = 0; a < num_aoi(); ++a) {
    const AoiState st = aoi_state(a);
    for (int wi = 0; wi < kNumActions; ++wi) {
      const Action w = Action::from_index(wi);
      const AoiState nx{w.s ? 1 : std::min(st.a_l + 1, cap_l_),
                        w.u ? std::min(st.a_l + 1, cap_r_) : std::min(st.a_r + 1, cap_r_)};
      next_[a * kNumActions + wi] = static_cast<std::uint32_t>(aoi_index(nx));
    }
  }
}

}  // namespace aoi
