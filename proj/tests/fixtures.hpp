#pragma once

// Instances shared by the tests and the acceptance binary.

#include <aoi/model.hpp>

#include "oracles.hpp"

namespace fixtures {

inline const std::vector<double> kFadingGains{0.0131, 0.0418, 0.0753, 0.1157, 0.1661, 0.2343, 0.3407, 0.6200};
inline const std::vector<double> kFadingWeights{1, 1, 2, 3, 3, 2, 1, 1};

inline aoi::ChannelModel fading_channel() { return aoi::ChannelModel::from_weights(kFadingGains, kFadingWeights); }

/// Eight-level fading channel, caps 10, C_s = 0.2, C_u(h) = 0.2 / h.
inline aoi::ProblemInstance single_device(double c_max = 0.3, aoi::Age cap = 10) {
  const auto ch = fading_channel();
  return aoi::ProblemInstance{cap, cap, ch, aoi::CostModel::inverse_gain(0.2, 0.2, ch, c_max)};
}

/// h in {1, 2} uniform, caps 10, C_s = 2, C_u(h) = 3.5 / h.
inline aoi::ProblemInstance two_state(double c_max = 3.0) {
  const auto ch = aoi::ChannelModel::uniform({1.0, 2.0});
  return aoi::ProblemInstance{10, 10, ch, aoi::CostModel::inverse_gain(2.0, 3.5, ch, c_max)};
}

inline aoi::ProblemInstance to_instance(const oracle::Tiny& t) {
  aoi::ProblemInstance inst;
  inst.cap_l = t.cap_l;
  inst.cap_r = t.cap_r;
  inst.channel = aoi::ChannelModel(t.gains, t.pmf);
  inst.costs.c_s = t.c_s;
  inst.costs.c_u = t.c_u;
  return inst;
}

inline oracle::Tiny to_tiny(const aoi::ProblemInstance& inst) {
  oracle::Tiny t;
  t.cap_l = inst.cap_l;
  t.cap_r = inst.cap_r;
  t.gains.assign(inst.channel.gains().begin(), inst.channel.gains().end());
  t.pmf.assign(inst.channel.pmf().begin(), inst.channel.pmf().end());
  t.c_s = inst.costs.c_s;
  t.c_u = inst.costs.c_u;
  return t;
}

}  // namespace fixtures
