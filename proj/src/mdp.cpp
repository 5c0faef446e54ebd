#include "aoi/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

namespace aoi {

namespace {

kernels::StageCost stage_cost(const ProblemInstance& inst, double lambda) {
  return kernels::StageCost{inst.costs.c_s, inst.costs.c_u, lambda, 0.0};
}

void check_lambda(double lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw ValidationError("Lagrange multiplier must be finite and non-negative");
}

std::vector<double> expected_next(const StateSpace& space, const ChannelModel& ch,
                                  const std::vector<double>& values, kernels::Exec exec) {
  std::vector<double> w(space.num_aoi());
  kernels::channel_average(exec, values, ch.pmf(), w);
  return w;
}

}  // namespace

DeterministicPolicy::DeterministicPolicy(StateSpace space, Action fill)
    : space_(std::move(space)),
      actions_(space_.num_states(), static_cast<std::uint8_t>(fill.index())) {}

DeterministicPolicy::DeterministicPolicy(StateSpace space, std::vector<std::uint8_t> actions)
    : space_(std::move(space)), actions_(std::move(actions)) {
  if (actions_.size() != space_.num_states()) throw ValidationError("policy: size mismatch");
  for (auto a : actions_)
    if (a >= kNumActions) throw ValidationError("policy: action index out of range");
}

ValueTable relative_value_iteration(const ProblemInstance& inst, double lambda,
                                    const SolverOptions& opts) {
  inst.validate();
  check_lambda(lambda);
  if (!(opts.tolerance > 0.0)) throw ValidationError("RVI tolerance must be positive");
  const StateSpace space(inst);
  const std::size_t n = space.num_states();
  const kernels::Exec exec = opts.exec.value_or(kernels::choose_exec(n));
  const auto cost = stage_cost(inst, lambda);
  const double tau = opts.damping;

  std::vector<double> v(n, 0.0), tv(n), w(space.num_aoi());
  double last_span = std::numeric_limits<double>::infinity();
  for (std::size_t it = 0; it < opts.max_iterations; ++it) {
    kernels::channel_average(exec, v, inst.channel.pmf(), w);
    kernels::bellman_min(exec, space, cost, w, tv, {});
    const auto r = kernels::difference_range(exec, tv, v);
    last_span = r.span();
    if (last_span < opts.tolerance) {
      return ValueTable{space, std::move(v), lambda, 0.5 * (r.lo + r.hi)};
    }
    for (std::size_t s = 0; s < n; ++s) v[s] += tau * (tv[s] - v[s]);
    const double shift = v[kReferenceState];
    for (double& x : v) x -= shift;
  }
  std::ostringstream msg;
  msg << "relative value iteration did not converge in " << opts.max_iterations
      << " iterations (last span " << last_span << ")";
  throw NumericalError(msg.str());
}

std::array<double, kNumActions> state_action_costs(const ProblemInstance& inst,
                                                   const ValueTable& vt, double lambda,
                                                   std::size_t state) {
  const StateSpace& space = vt.space;
  const std::size_t nh = space.num_channels();
  const std::size_t a = state / nh;
  const std::size_t h = state % nh;
  const Age a_r = space.aoi_state(a).a_r;
  const auto cost = stage_cost(inst, lambda);
  const auto pmf = inst.channel.pmf();
  std::array<double, kNumActions> j{};
  for (int w = 0; w < kNumActions; ++w) {
    const std::size_t nx = space.next_aoi()[a * kNumActions + w];
    double e = 0.0;
    for (std::size_t hp = 0; hp < nh; ++hp) e += pmf[hp] * vt.values[nx * nh + hp];
    j[w] = cost(a_r, h, w) + e;
  }
  return j;
}

double StateActionCost::min_at(std::size_t state) const {
  const double* p = j.data() + state * kNumActions;
  return *std::min_element(p, p + kNumActions);
}

StateActionCost state_action_cost(const ProblemInstance& inst, const ValueTable& vt,
                                  double lambda) {
  check_lambda(lambda);
  StateActionCost out{vt.space, std::vector<double>(vt.space.num_states() * kNumActions)};
  const auto w = expected_next(vt.space, inst.channel, vt.values, kernels::Exec::serial);
  const auto cost = stage_cost(inst, lambda);
  const std::size_t nh = vt.space.num_channels();
  for (std::size_t s = 0; s < vt.space.num_states(); ++s) {
    const std::size_t a = s / nh;
    const Age a_r = vt.space.aoi_state(a).a_r;
    for (int wi = 0; wi < kNumActions; ++wi)
      out.j[s * kNumActions + wi] = cost(a_r, s % nh, wi) + w[vt.space.next_aoi()[a * kNumActions + wi]];
  }
  return out;
}

SparseChain induced_chain(const ProblemInstance& inst, const DeterministicPolicy& policy) {
  const StateSpace& space = policy.space();
  const std::size_t nh = space.num_channels();
  const auto pmf = inst.channel.pmf();
  SparseChain chain(space.num_states());
  for (std::size_t s = 0; s < space.num_states(); ++s) {
    const std::size_t nx = space.next_aoi(s / nh, policy.at(s));
    for (std::size_t hp = 0; hp < nh; ++hp)
      chain.add(static_cast<std::uint32_t>(nx * nh + hp), pmf[hp]);
    chain.end_row();
  }
  return chain;
}

PolicyValue policy_evaluation(const ProblemInstance& inst, const DeterministicPolicy& policy,
                              double lambda, std::size_t reference) {
  inst.validate();
  check_lambda(lambda);
  const StateSpace& space = policy.space();
  if (space.num_states() != StateSpace(inst).num_states())
    throw ValidationError("policy does not match the instance");
  const auto cost = stage_cost(inst, lambda);
  const std::size_t nh = space.num_channels();
  std::vector<double> c(space.num_states());
  for (std::size_t s = 0; s < c.size(); ++s)
    c[s] = cost(space.aoi_state(s / nh).a_r, s % nh, policy.at(s).index());
  auto sol = solve_poisson(induced_chain(inst, policy), c, reference);
  return PolicyValue{sol.gain, ValueTable{space, std::move(sol.bias), lambda, sol.gain}};
}

DeterministicPolicy extract_greedy_policy(const ProblemInstance& inst, const ValueTable& vt,
                                          double lambda) {
  check_lambda(lambda);
  const StateSpace& space = vt.space;
  const auto w = expected_next(space, inst.channel, vt.values, kernels::Exec::serial);
  std::vector<double> out(space.num_states());
  std::vector<std::uint8_t> actions(space.num_states());
  kernels::bellman_min(kernels::choose_exec(space.num_states()), space, stage_cost(inst, lambda), w,
                       out, actions);
  return DeterministicPolicy(space, std::move(actions));
}

double bellman_residual(const ProblemInstance& inst, const ValueTable& vt, double lambda) {
  const StateSpace& space = vt.space;
  const auto w = expected_next(space, inst.channel, vt.values, kernels::Exec::serial);
  std::vector<double> tv(space.num_states());
  kernels::bellman_min(kernels::Exec::serial, space, stage_cost(inst, lambda), w, tv, {});
  double res = 0.0;
  for (std::size_t s = 0; s < tv.size(); ++s)
    res = std::max(res, std::abs(vt.theta + vt.values[s] - tv[s]));
  return res;
}

namespace {

bool within(double x, double best) { return x <= best + 1e-10 * std::max(1.0, std::abs(best)); }

// Two-stage improvement of a possibly multichain evaluation: minimize the
// expected next gain first, then J over the gain-minimizing actions. The
// incumbent is kept whenever it is within round-off of the best.
int improve(const std::array<double, kNumActions>& gain_next, const std::array<double, kNumActions>& j,
            int incumbent) {
  const double gmin = *std::min_element(gain_next.begin(), gain_next.end());
  int best = -1;
  for (int w = 0; w < kNumActions; ++w)
    if (within(gain_next[w], gmin) && (best < 0 || j[w] < j[best])) best = w;
  if (within(gain_next[incumbent], gmin) && within(j[incumbent], j[best])) return incumbent;
  return best;
}

struct Evaluation {
  std::vector<double> gain;
  std::vector<double> bias;
  std::size_t num_classes = 0;
};

Evaluation evaluate_any(const ProblemInstance& inst, const DeterministicPolicy& policy,
                        const kernels::StageCost& cost) {
  const StateSpace& space = policy.space();
  const std::size_t nh = space.num_channels();
  std::vector<double> c(space.num_states());
  for (std::size_t s = 0; s < c.size(); ++s)
    c[s] = cost(space.aoi_state(s / nh).a_r, s % nh, policy.at(s).index());
  auto ms = solve_multichain(induced_chain(inst, policy), c);
  return Evaluation{std::move(ms.gain), std::move(ms.bias), ms.num_classes};
}

}  // namespace

PolicyIterationResult structure_aware_policy_iteration(
    const ProblemInstance& inst, double lambda, const std::optional<DeterministicPolicy>& warm_start) {
  inst.validate();
  check_lambda(lambda);
  const StateSpace space(inst);
  const std::size_t nh = space.num_channels();
  const auto cost = stage_cost(inst, lambda);
  const auto next_aoi = space.next_aoi();

  PolicyIterationResult res;
  res.policy = warm_start.value_or(DeterministicPolicy(space, kIdle));
  if (res.policy.space().num_states() != space.num_states())
    throw ValidationError("warm-start policy does not match the instance");

  std::set<std::vector<std::uint8_t>> seen;
  constexpr int kMaxIterations = 10'000;
  bool structured = true;

  for (; res.iterations < kMaxIterations; ++res.iterations) {
    const Evaluation ev = evaluate_any(inst, res.policy, cost);
    const auto wg = expected_next(space, inst.channel, ev.gain, kernels::Exec::serial);
    const auto wh = expected_next(space, inst.channel, ev.bias, kernels::Exec::serial);
    auto plain_choice = [&](std::size_t s, int incumbent) {
      const std::size_t a = s / nh;
      const Age a_r = space.aoi_state(a).a_r;
      std::array<double, kNumActions> g{}, j{};
      for (int w = 0; w < kNumActions; ++w) {
        g[w] = wg[next_aoi[a * kNumActions + w]];
        j[w] = cost(a_r, s % nh, w) + wh[next_aoi[a * kNumActions + w]];
      }
      return improve(g, j, incumbent);
    };

    // Neighbors are settled first: sweep in increasing (a_l, a_r).
    DeterministicPolicy next = res.policy;
    for (std::size_t h = 0; h < nh; ++h) {
      for (Age a_l = 1; a_l <= space.cap_l(); ++a_l) {
        for (Age a_r = 1; a_r <= space.cap_r(); ++a_r) {
          const std::size_t s = space.index(a_l, a_r, h);
          if (structured) {
            const std::optional<Action> below =
                a_r > 1 ? std::optional(next.at(a_l, a_r - 1, h)) : std::nullopt;
            const std::optional<Action> left =
                a_l > 1 ? std::optional(next.at(a_l - 1, a_r, h)) : std::nullopt;
            std::optional<Action> implied;
            if (below == kUpdate)
              implied = kUpdate;
            else if (left == kSample)
              implied = kSample;
            else if (below == kSampleUpdate)
              implied = kSampleUpdate;
            if (implied) {
              next.set(s, *implied);
              ++res.shortcut_decisions;
              continue;
            }
          }
          next.set(s, Action::from_index(plain_choice(s, res.policy.at(s).index())));
        }
      }
    }

    bool stable = next == res.policy;
    if (stable && structured) {
      // The shortcuts may hold a non-greedy action in place; confirm the
      // policy is its own plain improvement before stopping.
      for (std::size_t s = 0; s < space.num_states() && stable; ++s)
        stable = plain_choice(s, res.policy.at(s).index()) == res.policy.at(s).index();
      if (!stable) {
        structured = false;
        res.fallback_used = true;
        seen.clear();
        continue;
      }
    }
    if (stable) {
      if (ev.num_classes == 1) {
        auto pv = policy_evaluation(inst, res.policy, lambda);
        res.theta = pv.theta;
        res.values = std::move(pv.values);
        return res;
      }
      const auto [lo, hi] = std::minmax_element(ev.gain.begin(), ev.gain.end());
      if (*hi - *lo > 1e-9 * std::max(1.0, std::abs(*hi)))
        throw NumericalError("policy iteration stopped at a policy with non-constant gain");
      std::vector<double> v = ev.bias;
      const double shift = v[kReferenceState];
      for (double& x : v) x -= shift;
      res.theta = *hi;
      res.values = ValueTable{space, std::move(v), lambda, *hi};
      return res;
    }
    if (!seen.insert(std::vector<std::uint8_t>(next.raw().begin(), next.raw().end())).second) {
      if (!structured) throw NumericalError("policy iteration is cycling");
      structured = false;
      res.fallback_used = true;
      seen.clear();
    }
    res.policy = std::move(next);
  }
  throw NumericalError("policy iteration exceeded its iteration limit");
}

}  // namespace aoi
