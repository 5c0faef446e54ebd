#include "aoi/fleet.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace aoi {

void FleetInstance::validate() const {
  if (devices.empty()) throw ValidationError("fleet needs at least one device");
  for (const auto& d : devices) d.validate();
}

FleetInstance FleetInstance::random_costs(std::size_t k, Age cap, const ChannelModel& channel,
                                          double c_max, const Rng& rng, double lo, double hi) {
  if (!(lo >= 0.0) || !(hi >= lo)) throw ValidationError("cost draw range must satisfy 0 <= lo <= hi");
  FleetInstance fleet;
  for (std::size_t i = 0; i < k; ++i) {
    Rng r = rng.substream(i, Purpose::costs);
    const double c_s = r.uniform(lo, hi);
    const double scale = r.uniform(lo, hi);
    fleet.devices.push_back(
        ProblemInstance{cap, cap, channel, CostModel::inverse_gain(c_s, scale, channel, c_max)});
  }
  fleet.validate();
  return fleet;
}

kernels::StageCost device_stage_cost(const ProblemInstance& inst, double lambda) {
  return kernels::StageCost{inst.costs.c_s, inst.costs.c_u, lambda, -lambda * inst.costs.c_max};
}

PerDeviceQTable per_device_fixed_point(const ProblemInstance& inst, double lambda,
                                       const FixedPointOptions& opts) {
  inst.validate();
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw ValidationError("Lagrange multiplier must be finite and non-negative");
  if (!(opts.tolerance > 0.0)) throw ValidationError("tolerance must be positive");
  const StateSpace space(inst);
  const std::size_t n = space.num_states();
  const auto exec = opts.exec.value_or(kernels::choose_exec(n));
  const auto cost = device_stage_cost(inst, lambda);
  const std::size_t ref = 2 * kQReferenceState + kQReferenceU;

  PerDeviceQTable table(space, lambda);
  std::vector<double>& q = table.q;
  std::vector<double> tq(q.size()), w(space.num_aoi());
  double span = std::numeric_limits<double>::infinity();
  for (std::size_t it = 0; it < opts.max_iterations; ++it) {
    kernels::q_channel_min_average(exec, q, inst.channel.pmf(), w);
    kernels::q_backup(exec, space, cost, w, tq);
    const auto r = kernels::difference_range(exec, tq, q);
    span = r.span();
    if (span < opts.tolerance) {
      table.theta = 0.5 * (r.lo + r.hi);
      return table;
    }
    for (std::size_t i = 0; i < q.size(); ++i) q[i] += opts.damping * (tq[i] - q[i]);
    const double shift = q[ref];
    for (double& x : q) x -= shift;
  }
  std::ostringstream msg;
  msg << "per-device Q iteration did not converge (last span " << span << ")";
  throw NumericalError(msg.str());
}

double expected_min_q(const PerDeviceQTable& table, const ChannelModel& channel, std::size_t aoi) {
  const std::size_t nh = channel.size();
  double acc = 0.0;
  for (std::size_t h = 0; h < nh; ++h) acc += channel.prob(h) * table.min_at(aoi * nh + h);
  return acc;
}

double device_target(const ProblemInstance& inst, const PerDeviceQTable& table, std::size_t state,
                     int u, int s) {
  const StateSpace& sp = table.space;
  const std::size_t nh = sp.num_channels();
  const std::size_t a = state / nh;
  const Action w{s != 0, u != 0};
  const auto cost = device_stage_cost(inst, table.lambda);
  return cost(sp.aoi_state(a).a_r, state % nh, w.index()) +
         expected_min_q(table, inst.channel, sp.next_aoi(a, w));
}

std::optional<std::size_t> updating_control(std::span<const std::array<double, 2>> reported) {
  // sum_k Q_k(u_k) differs between options only through the granted device's
  // Q(1) - Q(0), so the K+1 sums reduce to these deltas.
  std::optional<std::size_t> grant;
  double best = 0.0;
  for (std::size_t k = 0; k < reported.size(); ++k) {
    const double d = reported[k][1] - reported[k][0];
    if (d < best) {
      best = d;
      grant = k;
    }
  }
  return grant;
}

int sampling_control(const ProblemInstance& inst, const PerDeviceQTable& table, std::size_t state,
                     int granted_u) {
  const double f0 = device_target(inst, table, state, granted_u, 0);
  const double f1 = device_target(inst, table, state, granted_u, 1);
  return f1 < f0 ? 1 : 0;
}

int controller_sampling(SamplingRule rule, const ProblemInstance& inst, const PerDeviceQTable& table,
                        std::size_t state, int granted_u) {
  return rule == SamplingRule::zero_wait ? granted_u : sampling_control(inst, table, state, granted_u);
}

void LearningSchedule::validate() const {
  if (!(q_exponent > 0.5 && q_exponent <= 1.0)) throw ValidationError("q_exponent must lie in (0.5, 1]");
  if (!(lambda_gain > 0.0)) throw ValidationError("lambda_gain must be positive");
  if (!(lambda_exponent > q_exponent && lambda_exponent <= 1.0))
    throw ValidationError("lambda_exponent must lie in (q_exponent, 1]");
  if (!(explore_scale >= 0.0)) throw ValidationError("explore_scale must be non-negative");
  if (!(explore_exponent >= 0.0)) throw ValidationError("explore_exponent must be non-negative");
  if (!(initial_lambda >= 0.0)) throw ValidationError("initial_lambda must be non-negative");
}

double LearningSchedule::q_step(std::uint64_t visits) const {
  return std::pow(static_cast<double>(std::max<std::uint64_t>(visits, 1)), -q_exponent);
}

double LearningSchedule::lambda_step(std::uint64_t t) const {
  return lambda_gain * std::pow(static_cast<double>(std::max<std::uint64_t>(t, 1)), -lambda_exponent);
}

double LearningSchedule::explore_probability(std::uint64_t t) const {
  if (explore_scale == 0.0) return 0.0;
  return std::min(1.0, explore_scale * std::pow(static_cast<double>(std::max<std::uint64_t>(t, 1)),
                                                -explore_exponent));
}

void q_learning_update(PerDeviceQTable& table, const ProblemInstance& inst, std::size_t state,
                       int u, SamplingRule rule, const LearningSchedule& schedule,
                       ReferenceCache& ref) {
  const std::size_t idx = 2 * state + u;
  const double step = schedule.q_step(++table.visits[idx]);
  const double target = device_target(inst, table, state, u, controller_sampling(rule, inst, table, state, u));
  double ref_target;
  if (schedule.reference == ReferenceMode::current) {
    const int s_ref = controller_sampling(rule, inst, table, kQReferenceState, kQReferenceU);
    ref_target = device_target(inst, table, kQReferenceState, kQReferenceU, s_ref);
  } else {
    if (state == kQReferenceState && u == kQReferenceU) {
      ref.value = target;
      ref.visited = true;
    }
    ref_target = ref.value;
  }
  table.q[idx] += step * (target - ref_target - table.q[idx]);
}

double lambda_update(double lambda, double energy, double c_max, std::uint64_t t,
                     const LearningSchedule& schedule) {
  return std::max(0.0, lambda + schedule.lambda_step(t) * (energy - c_max));
}

std::vector<Action> zero_wait_policy(std::span<const std::array<double, 2>> reported) {
  std::vector<Action> out(reported.size(), kIdle);
  if (const auto g = updating_control(reported)) out[*g] = kSampleUpdate;
  return out;
}

DeterministicPolicy semi_distributed_policy(const ProblemInstance& inst, const PerDeviceQTable& table) {
  const StateSpace& sp = table.space;
  DeterministicPolicy pol(sp, kIdle);
  for (std::size_t s = 0; s < sp.num_states(); ++s) {
    const int u = table.at(s, 1) < table.at(s, 0) ? 1 : 0;
    pol.set(s, Action{sampling_control(inst, table, s, u) != 0, u != 0});
  }
  return pol;
}

JointSpace::JointSpace(const FleetInstance& fleet, std::size_t limit) {
  fleet.validate();
  for (const auto& d : fleet.devices) {
    spaces_.emplace_back(d);
    aoi_stride_.push_back(num_aoi_);
    h_stride_.push_back(num_channels_);
    num_aoi_ *= spaces_.back().num_aoi();
    num_channels_ *= spaces_.back().num_channels();
    if (num_aoi_ * num_channels_ > limit) {
      std::ostringstream msg;
      msg << "joint state space exceeds the limit of " << limit << " states";
      throw ValidationError(msg.str());
    }
  }
  channel_prob_.assign(num_channels_, 1.0);
  for (std::size_t jh = 0; jh < num_channels_; ++jh)
    for (std::size_t k = 0; k < spaces_.size(); ++k)
      channel_prob_[jh] *= fleet.devices[k].channel.prob(channel_of(jh, k));
}

std::size_t JointSpace::device_state(std::size_t joint, std::size_t k) const {
  return aoi_of(joint / num_channels_, k) * spaces_[k].num_channels() + channel_of(joint % num_channels_, k);
}

CentralizedSolution centralized_oracle(const FleetInstance& fleet, std::span<const double> lambdas,
                                       const FixedPointOptions& opts) {
  const JointSpace js(fleet);
  const std::size_t K = js.num_devices();
  if (lambdas.size() != K) throw ValidationError("one multiplier per device is required");
  for (double l : lambdas)
    if (!(l >= 0.0)) throw ValidationError("multipliers must be non-negative");
  if (K > 16) throw ValidationError("centralized oracle supports at most 16 devices");
  std::vector<kernels::StageCost> costs;
  for (std::size_t k = 0; k < K; ++k) costs.push_back(device_stage_cost(fleet.devices[k], lambdas[k]));

  const std::size_t nu = K + 1, n = js.size(), nh = js.num_channels();
  std::vector<double> q(n * nu, 0.0), tq(n * nu), w(js.num_aoi());
  const std::size_t num_s = std::size_t{1} << K;
  double span = std::numeric_limits<double>::infinity();
  for (std::size_t it = 0; it < opts.max_iterations; ++it) {
    for (std::size_t a = 0; a < js.num_aoi(); ++a) {
      double acc = 0.0;
      for (std::size_t h = 0; h < nh; ++h) {
        const double* row = q.data() + (a * nh + h) * nu;
        acc += js.channel_prob(h) * *std::min_element(row, row + nu);
      }
      w[a] = acc;
    }
#pragma omp parallel for schedule(static) if (n >= kernels::kParallelThreshold)
    for (std::size_t x = 0; x < n; ++x) {
      const std::size_t a = x / nh, h = x % nh;
      for (std::size_t u = 0; u < nu; ++u) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t sv = 0; sv < num_s; ++sv) {
          double c = 0.0;
          std::size_t next = 0;
          for (std::size_t k = 0; k < K; ++k) {
            const StateSpace& sp = js.device(k);
            const std::size_t ak = js.aoi_of(a, k);
            const Action wk{((sv >> k) & 1) != 0, u == k + 1};
            c += costs[k](sp.aoi_state(ak).a_r, js.channel_of(h, k), wk.index());
            next += sp.next_aoi(ak, wk) * js.aoi_stride(k);
          }
          best = std::min(best, c + w[next]);
        }
        tq[x * nu + u] = best;
      }
    }
    const auto r = kernels::difference_range(kernels::Exec::serial, tq, q);
    span = r.span();
    if (span < opts.tolerance) return CentralizedSolution{0.5 * (r.lo + r.hi), std::move(q)};
    for (std::size_t i = 0; i < q.size(); ++i) q[i] += opts.damping * (tq[i] - q[i]);
    const double shift = q[0];
    for (double& v : q) v -= shift;
  }
  std::ostringstream msg;
  msg << "centralized Q iteration did not converge (last span " << span << ")";
  throw NumericalError(msg.str());
}

double semi_distributed_lagrange_cost(const FleetInstance& fleet,
                                      std::span<const PerDeviceQTable> tables) {
  const JointSpace js(fleet);
  const std::size_t K = js.num_devices();
  if (tables.size() != K) throw ValidationError("one Q table per device is required");
  const std::size_t n = js.size(), nh = js.num_channels();
  SparseChain chain(n);
  std::vector<double> cost(n, 0.0);
  std::vector<std::array<double, 2>> reported(K);
  for (std::size_t x = 0; x < n; ++x) {
    const std::size_t a = x / nh;
    for (std::size_t k = 0; k < K; ++k) {
      const std::size_t s = js.device_state(x, k);
      reported[k] = {tables[k].at(s, 0), tables[k].at(s, 1)};
    }
    const auto grant = updating_control(reported);
    std::size_t next = 0;
    for (std::size_t k = 0; k < K; ++k) {
      const ProblemInstance& inst = fleet.devices[k];
      const std::size_t s = js.device_state(x, k);
      const int u = grant == k ? 1 : 0;
      const Action wk{sampling_control(inst, tables[k], s, u) != 0, u != 0};
      const std::size_t ak = js.aoi_of(a, k);
      cost[x] += device_stage_cost(inst, tables[k].lambda)(js.device(k).aoi_state(ak).a_r,
                                                           s % inst.channel.size(), wk.index());
      next += js.device(k).next_aoi(ak, wk) * js.aoi_stride(k);
    }
    for (std::size_t h = 0; h < nh; ++h)
      chain.add(static_cast<std::uint32_t>(next * nh + h), js.channel_prob(h));
    chain.end_row();
  }
  // Average over the initial channel draw with every device at (1, 1).
  const auto sol = solve_multichain(chain, cost);
  double g = 0.0;
  for (std::size_t h = 0; h < nh; ++h) g += js.channel_prob(h) * sol.gain[h];
  return g;
}

}  // namespace aoi
