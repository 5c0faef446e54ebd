#include "aoi/cmdp.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>

namespace aoi {

PolicyMetrics exact_policy_metrics(const ProblemInstance& inst, const DeterministicPolicy& policy) {
  inst.validate();
  const StateSpace& space = policy.space();
  const auto pi = stationary_distribution(induced_chain(inst, policy));
  const std::size_t nh = space.num_channels();
  PolicyMetrics m;
  for (std::size_t s = 0; s < pi.size(); ++s) {
    if (pi[s] == 0.0) continue;
    m.avg_aoi += pi[s] * space.aoi_state(s / nh).a_r;
    m.avg_energy += pi[s] * energy_cost(policy.at(s), s % nh, inst.costs);
  }
  return m;
}

PolicyMetrics policy_metrics_from_start(const ProblemInstance& inst, const DeterministicPolicy& policy) {
  inst.validate();
  const StateSpace& space = policy.space();
  const std::size_t nh = space.num_channels();
  const auto chain = induced_chain(inst, policy);
  std::vector<double> aoi(space.num_states()), energy(space.num_states());
  for (std::size_t s = 0; s < aoi.size(); ++s) {
    aoi[s] = space.aoi_state(s / nh).a_r;
    energy[s] = energy_cost(policy.at(s), s % nh, inst.costs);
  }
  const auto ga = solve_multichain(chain, aoi).gain;
  const auto ge = solve_multichain(chain, energy).gain;
  PolicyMetrics m;
  for (std::size_t h = 0; h < nh; ++h) {
    const std::size_t s = space.index(1, 1, h);
    m.avg_aoi += inst.channel.prob(h) * ga[s];
    m.avg_energy += inst.channel.prob(h) * ge[s];
  }
  return m;
}

LagrangianSolver::LagrangianSolver(ProblemInstance inst) : inst_(std::move(inst)) {
  inst_.validate();
}

LagrangianSolution LagrangianSolver::solve(double lambda) {
  std::optional<DeterministicPolicy> warm;
  if (!policies_.empty()) {
    auto hi = policies_.lower_bound(lambda);
    if (hi == policies_.end()) {
      warm = std::prev(hi)->second;
    } else if (hi == policies_.begin()) {
      warm = hi->second;
    } else {
      auto lo = std::prev(hi);
      warm = (lambda - lo->first <= hi->first - lambda) ? lo->second : hi->second;
    }
  }
  auto pi = structure_aware_policy_iteration(inst_, lambda, warm);
  ++solves_;
  std::vector<std::uint8_t> key(pi.policy.raw().begin(), pi.policy.raw().end());
  auto it = metrics_.find(key);
  if (it == metrics_.end()) it = metrics_.emplace(key, exact_policy_metrics(inst_, pi.policy)).first;
  policies_.insert_or_assign(lambda, pi.policy);
  return LagrangianSolution{lambda, std::move(pi.policy), pi.theta, it->second};
}

namespace {

double first_feasible_power_of_two(LagrangianSolver& solver, double c_max) {
  double lambda = 1.0;
  for (int k = 0; k < 200; ++k, lambda *= 2.0)
    if (solver.solve(lambda).metrics.avg_energy <= c_max) return lambda;
  throw NumericalError("no multiplier meets the energy budget");
}

}  // namespace

RobbinsMonroResult robbins_monro_lambda(LagrangianSolver& solver, double c_max,
                                        const RobbinsMonroOptions& opts) {
  if (!(c_max > 0.0)) throw ValidationError("Robbins-Monro needs c_max > 0");
  double lambda = opts.initial_lambda.value_or(100.0 * solver.instance().cap_r / c_max);
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw ValidationError("initial multiplier must be finite and non-negative");
  const double gain = opts.gain.value_or(std::max(lambda, 1.0) / c_max);
  if (!(gain > 0.0)) throw ValidationError("step gain must be positive");

  RobbinsMonroResult res;
  int sign_changes = 0;
  int last_sign = 0;
  for (std::size_t m = 1; m <= opts.max_steps; ++m) {
    const auto sol = solver.solve(lambda);
    res.trace.push_back({static_cast<int>(m), lambda, sol.metrics.avg_energy, sol.theta});
    const double g = sol.metrics.avg_energy - c_max;
    const int sign = (g > 0.0) - (g < 0.0);
    if (sign != 0 && last_sign != 0 && sign != last_sign) ++sign_changes;
    if (sign != 0) last_sign = sign;
    const double eps = opts.rule == StepRule::harmonic ? 1.0 / static_cast<double>(m)
                                                        : std::ldexp(gain, -sign_changes);
    const double next = std::max(0.0, lambda + eps * g);
    const double change = std::abs(next - lambda);
    lambda = next;
    if (change < opts.stop_tolerance) {
      res.converged = true;
      break;
    }
  }
  res.lambda_star = lambda;
  return res;
}

double bisection_lambda(LagrangianSolver& solver, double c_max, double tolerance) {
  if (!(c_max >= 0.0)) throw ValidationError("c_max must be non-negative");
  if (solver.solve(0.0).metrics.avg_energy <= c_max) return 0.0;
  double hi = first_feasible_power_of_two(solver, c_max);
  double lo = hi > 1.0 ? hi / 2.0 : 0.0;
  while (hi - lo > tolerance) {
    const double mid = 0.5 * (lo + hi);
    if (solver.solve(mid).metrics.avg_energy <= c_max)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

MixturePolicy build_mixture(LagrangianSolver& solver, double lambda_star, double eta,
                            double c_max) {
  if (!(eta > 0.0)) throw ValidationError("eta must be positive");
  if (!(lambda_star >= 0.0)) throw ValidationError("lambda* must be non-negative");
  MixturePolicy mix;

  const auto at_zero = solver.solve(0.0);
  if (at_zero.metrics.avg_energy <= c_max) {
    // Constraint inactive: a single deterministic policy.
    mix.pi_1 = mix.pi_2 = at_zero.policy;
    mix.metrics_1 = mix.metrics_2 = at_zero.metrics;
    mix.alpha = 1.0;
    mix.eta = eta;
    return mix;
  }

  for (int attempt = 0; attempt < 8; ++attempt, eta *= 10.0) {
    const double l1 = std::max(0.0, lambda_star - eta);
    const double l2 = lambda_star + eta;
    const auto s1 = solver.solve(l1);
    const auto s2 = solver.solve(l2);
    const double c1 = s1.metrics.avg_energy;
    const double c2 = s2.metrics.avg_energy;
    mix.pi_1 = s1.policy;
    mix.pi_2 = s2.policy;
    mix.metrics_1 = s1.metrics;
    mix.metrics_2 = s2.metrics;
    mix.lambda_1 = l1;
    mix.lambda_2 = l2;
    mix.eta = eta;
    if (c1 == c2) {
      if (c1 == c_max) {
        mix.alpha = 1.0;
        return mix;
      }
      continue;
    }
    if (c1 < c_max || c2 > c_max) continue;  // lambda* not bracketed at this eta
    mix.alpha = std::clamp((c_max - c2) / (c1 - c2), 0.0, 1.0);
    return mix;
  }
  throw NumericalError("could not bracket the energy budget with two multipliers");
}

PolicyMetrics mixture_metrics(const MixturePolicy& mix) {
  const double a = mix.alpha;
  return PolicyMetrics{a * mix.metrics_1.avg_aoi + (1.0 - a) * mix.metrics_2.avg_aoi,
                       a * mix.metrics_1.avg_energy + (1.0 - a) * mix.metrics_2.avg_energy};
}

CmdpSolution solve_cmdp(LagrangianSolver& solver, double c_max, MultiplierSearch search,
                        double eta) {
  CmdpSolution sol;
  sol.lambda_star = search == MultiplierSearch::bisection
                        ? bisection_lambda(solver, c_max)
                        : robbins_monro_lambda(solver, c_max).lambda_star;
  sol.mixture = build_mixture(solver, sol.lambda_star, eta, c_max);
  sol.metrics = mixture_metrics(sol.mixture);
  return sol;
}

}  // namespace aoi
