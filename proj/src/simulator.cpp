#include "aoi/simulator.hpp"

#include <algorithm>
#include <cmath>

namespace aoi {

void SimConfig::validate() const {
  if (horizon == 0) throw ValidationError("horizon must be positive");
  if (burn_in >= horizon) throw ValidationError("burn_in must be smaller than the horizon");
  if (replications == 0) throw ValidationError("replications must be positive");
}

BatchMeans::BatchMeans(std::uint64_t expected_count, std::size_t batches)
    : batch_len_(std::max<std::uint64_t>(1, expected_count / std::max<std::size_t>(batches, 1))),
      batch_sums_(std::max<std::size_t>(batches, 1), 0.0) {}

void BatchMeans::add(double x) {
  const std::uint64_t b = count_ / batch_len_;
  if (b < batch_sums_.size()) batch_sums_[b] += x;
  sum_ += x;
  ++count_;
}

double BatchMeans::standard_error() const {
  const std::size_t full = std::min<std::size_t>(batch_sums_.size(), count_ / batch_len_);
  if (full < 2) return 0.0;
  double mean = 0.0;
  for (std::size_t b = 0; b < full; ++b) mean += batch_sums_[b] / static_cast<double>(batch_len_);
  mean /= static_cast<double>(full);
  double var = 0.0;
  for (std::size_t b = 0; b < full; ++b) {
    const double d = batch_sums_[b] / static_cast<double>(batch_len_) - mean;
    var += d * d;
  }
  var /= static_cast<double>(full - 1);
  return std::sqrt(var / static_cast<double>(full));
}

namespace {

std::vector<double> cumulative(std::span<const double> pmf) {
  std::vector<double> cdf(pmf.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < pmf.size(); ++i) cdf[i] = acc += pmf[i];
  return cdf;
}

DeviceMetrics simulate_policy(const ProblemInstance& inst, const DeterministicPolicy& policy,
                              const SimConfig& cfg, Rng channel_rng) {
  const StateSpace& sp = policy.space();
  const auto cdf = cumulative(inst.channel.pmf());
  const std::uint64_t measured = cfg.horizon - cfg.burn_in;
  BatchMeans aoi(measured), energy(measured);
  AoiState a{1, 1};
  for (std::uint64_t t = 0; t < cfg.horizon; ++t) {
    const std::size_t h = channel_rng.categorical(cdf);
    const Action w = policy.at(sp.index(a, h));
    if (t >= cfg.burn_in) {
      aoi.add(a.a_r);
      energy.add(energy_cost(w, h, inst.costs));
    }
    a = transition(a, w, inst);
  }
  return DeviceMetrics{aoi.mean(), aoi.standard_error(), energy.mean(), energy.standard_error(), measured};
}

}  // namespace

SingleRunResult run_single(const ProblemInstance& inst, const SinglePolicy& policy,
                           const SimConfig& config) {
  inst.validate();
  config.validate();
  const StateSpace expected(inst);
  const Rng root(config.seed);
  const std::size_t reps = config.replications;
  SingleRunResult res;
  res.replications.resize(reps);
  const auto* mix = std::get_if<MixturePolicy>(&policy);
  if (mix) res.mixture_choice.resize(reps);

  for (std::size_t r = 0; r < reps; ++r) {
    const DeterministicPolicy* chosen = std::get_if<DeterministicPolicy>(&policy);
    if (mix) {
      Rng coin = root.substream(r, Purpose::mixture);
      const bool first = coin.uniform() < mix->alpha;
      res.mixture_choice[r] = first ? 1 : 2;
      chosen = first ? &mix->pi_1 : &mix->pi_2;
    }
    if (chosen->space().num_states() != expected.num_states())
      throw ValidationError("policy does not match the instance");
  }

#pragma omp parallel for schedule(dynamic)
  for (std::size_t r = 0; r < reps; ++r) {
    const DeterministicPolicy& chosen =
        mix ? (res.mixture_choice[r] == 1 ? mix->pi_1 : mix->pi_2) : std::get<DeterministicPolicy>(policy);
    res.replications[r] = simulate_policy(inst, chosen, config, root.substream(r, Purpose::channel));
  }

  DeviceMetrics& p = res.pooled;
  for (const auto& m : res.replications) {
    p.avg_aoi += m.avg_aoi / static_cast<double>(reps);
    p.avg_energy += m.avg_energy / static_cast<double>(reps);
    p.slots += m.slots;
  }
  if (reps == 1) {
    p.se_aoi = res.replications[0].se_aoi;
    p.se_energy = res.replications[0].se_energy;
  } else {
    double va = 0.0, ve = 0.0;
    for (const auto& m : res.replications) {
      va += (m.avg_aoi - p.avg_aoi) * (m.avg_aoi - p.avg_aoi);
      ve += (m.avg_energy - p.avg_energy) * (m.avg_energy - p.avg_energy);
    }
    const double n = static_cast<double>(reps);
    p.se_aoi = std::sqrt(va / (n - 1) / n);
    p.se_energy = std::sqrt(ve / (n - 1) / n);
  }
  return res;
}

FleetRunResult run_fleet(const FleetInstance& fleet, const FleetRunConfig& config) {
  fleet.validate();
  config.sim.validate();
  config.schedule.validate();
  if (config.window == 0) throw ValidationError("window must be positive");
  const std::size_t K = fleet.size();
  const auto& sched = config.schedule;
  const SamplingRule rule =
      config.controller == Controller::zero_wait ? SamplingRule::zero_wait : SamplingRule::optimized;

  FleetRunResult res;
  if (config.initial_tables.empty()) {
    for (const auto& d : fleet.devices) res.tables.emplace_back(StateSpace(d), sched.initial_lambda);
  } else {
    if (config.initial_tables.size() != K) throw ValidationError("one initial Q table per device is required");
    res.tables = config.initial_tables;
    for (std::size_t k = 0; k < K; ++k)
      if (res.tables[k].space.num_states() != StateSpace(fleet.devices[k]).num_states())
        throw ValidationError("initial Q table does not match its device");
  }

  const Rng root(config.sim.seed);
  std::vector<Rng> channel_rng, sample_rng;
  std::vector<std::vector<double>> cdf;
  for (std::size_t k = 0; k < K; ++k) {
    channel_rng.push_back(root.substream(k, Purpose::channel));
    sample_rng.push_back(root.substream(k, Purpose::sampling_exploration));
    cdf.push_back(cumulative(fleet.devices[k].channel.pmf()));
  }
  Rng grant_rng = root.substream(0, Purpose::exploration);

  const std::uint64_t measured = config.sim.horizon - config.sim.burn_in;
  std::vector<BatchMeans> aoi_acc(K, BatchMeans(measured)), energy_acc(K, BatchMeans(measured));
  std::vector<ReferenceCache> refs(K);
  std::vector<AoiState> ages(K, AoiState{1, 1});
  std::vector<std::size_t> h(K), state(K);
  std::vector<std::array<double, 2>> reported(K);
  std::vector<PerDeviceQTable> snapshot = res.tables;
  double window_aoi = 0.0, window_energy = 0.0;

  for (std::uint64_t t = 1; t <= config.sim.horizon; ++t) {
    for (std::size_t k = 0; k < K; ++k) {
      h[k] = channel_rng[k].categorical(cdf[k]);
      state[k] = res.tables[k].space.index(ages[k], h[k]);
      reported[k] = {res.tables[k].at(state[k], 0), res.tables[k].at(state[k], 1)};
    }

    const double explore = config.learn ? sched.explore_probability(t) : 0.0;
    std::optional<std::size_t> grant;
    if (explore > 0.0 && grant_rng.bernoulli(explore)) {
      const std::uint64_t pick = grant_rng.below(K + 1);
      if (pick > 0) grant = pick - 1;
    } else {
      grant = updating_control(reported);
    }

    int updates = 0;
    for (std::size_t k = 0; k < K; ++k) {
      const ProblemInstance& inst = fleet.devices[k];
      PerDeviceQTable& table = res.tables[k];
      const int u = grant == k ? 1 : 0;
      updates += u;
      int s;
      if (rule == SamplingRule::optimized && explore > 0.0 && sample_rng[k].bernoulli(explore))
        s = sample_rng[k].bernoulli(0.5) ? 1 : 0;
      else
        s = controller_sampling(rule, inst, table, state[k], u);
      const Action w{s != 0, u != 0};
      const double e = energy_cost(w, h[k], inst.costs);

      if (t > config.sim.burn_in) {
        aoi_acc[k].add(ages[k].a_r);
        energy_acc[k].add(e);
      }
      window_aoi += ages[k].a_r;
      window_energy += e;
      if (config.trace_every && (t - 1) % config.trace_every == 0)
        res.trace.push_back({t, static_cast<std::uint32_t>(k), ages[k].a_l, ages[k].a_r,
                             static_cast<std::uint32_t>(h[k]), w.s, w.u, e, table.lambda});
      if (config.learn) {
        q_learning_update(table, inst, state[k], u, rule, sched, refs[k]);
        table.lambda = lambda_update(table.lambda, e, inst.costs.c_max, t, sched);
      }
      ages[k] = transition(ages[k], w, inst);
    }
    if (updates > 1) ++res.collisions;

    if (t % config.window == 0) {
      WindowRecord rec{t / config.window, t, 0.0, 0.0, 0.0, 0.0};
      for (std::size_t k = 0; k < K; ++k) {
        const auto& now = res.tables[k].q;
        const auto& before = snapshot[k].q;
        for (std::size_t i = 0; i < now.size(); ++i)
          rec.max_dq = std::max(rec.max_dq, std::abs(now[i] - before[i]));
        rec.max_dlambda = std::max(rec.max_dlambda, std::abs(res.tables[k].lambda - snapshot[k].lambda));
        snapshot[k].q = now;
        snapshot[k].lambda = res.tables[k].lambda;
      }
      const double denom = static_cast<double>(K * config.window);
      rec.avg_aoi = window_aoi / denom;
      rec.avg_energy = window_energy / denom;
      window_aoi = window_energy = 0.0;
      res.convergence.push_back(rec);
    }
  }

  for (std::size_t k = 0; k < K; ++k)
    res.metrics.push_back(DeviceMetrics{aoi_acc[k].mean(), aoi_acc[k].standard_error(),
                                        energy_acc[k].mean(), energy_acc[k].standard_error(), measured});
  return res;
}

std::optional<std::uint64_t> convergence_slot(const std::vector<WindowRecord>& windows,
                                              double dq_tol, double dlambda_tol) {
  std::optional<std::uint64_t> settled;
  for (const auto& w : windows) {
    if (w.max_dq < dq_tol && w.max_dlambda < dlambda_tol) {
      if (!settled) settled = w.end_slot;
    } else {
      settled.reset();
    }
  }
  return settled;
}

}  // namespace aoi
