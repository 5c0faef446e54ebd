#include "aoi/dominance.hpp"

#include <algorithm>
#include <cmath>

namespace aoi {

namespace {

constexpr double kEps = 1e-12;

void require_same_alphabet(const ChannelModel& a, const ChannelModel& b) {
  if (a.size() != b.size() || !std::equal(a.gains().begin(), a.gains().end(), b.gains().begin()))
    throw ValidationError("distributions must share the same gain alphabet");
}

std::vector<double> cdf(const ChannelModel& d) {
  std::vector<double> f(d.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) f[i] = acc += d.prob(i);
  return f;
}

}  // namespace

bool first_order_dominates(const ChannelModel& dist_i, const ChannelModel& dist_j) {
  require_same_alphabet(dist_i, dist_j);
  const auto fi = cdf(dist_i), fj = cdf(dist_j);
  for (std::size_t k = 0; k < fi.size(); ++k)
    if (fi[k] > fj[k] + kEps) return false;
  return true;
}

bool second_order_dominates(const ChannelModel& dist_i, const ChannelModel& dist_j) {
  require_same_alphabet(dist_i, dist_j);
  const auto fi = cdf(dist_i), fj = cdf(dist_j);
  const auto g = dist_i.gains();
  double si = 0.0, sj = 0.0;
  for (std::size_t k = 0; k + 1 < g.size(); ++k) {
    si += fi[k] * (g[k + 1] - g[k]);
    sj += fj[k] * (g[k + 1] - g[k]);
    if (si > sj + kEps) return false;
  }
  return true;
}

DominanceVerdict classify(const ChannelModel& dist_i, const ChannelModel& dist_j) {
  auto direction = [](bool ij, bool ji) {
    if (ij && ji) return Direction::equivalent;
    if (ij) return Direction::i_over_j;
    if (ji) return Direction::j_over_i;
    return Direction::incomparable;
  };
  const bool f_ij = first_order_dominates(dist_i, dist_j);
  const bool f_ji = first_order_dominates(dist_j, dist_i);
  if (f_ij || f_ji) return {Relation::first_order, direction(f_ij, f_ji)};
  const bool s_ij = second_order_dominates(dist_i, dist_j);
  const bool s_ji = second_order_dominates(dist_j, dist_i);
  if (s_ij || s_ji) return {Relation::second_order, direction(s_ij, s_ji)};
  return {};
}

std::string to_string(Relation r) {
  switch (r) {
    case Relation::first_order: return "first-order";
    case Relation::second_order: return "second-order";
    case Relation::none: break;
  }
  return "none";
}

std::string to_string(Direction d) {
  switch (d) {
    case Direction::i_over_j: return "I over J";
    case Direction::j_over_i: return "J over I";
    case Direction::equivalent: return "equivalent";
    case Direction::incomparable: break;
  }
  return "incomparable";
}

bool updating_cost_decreasing(const ChannelModel& channel, const CostModel& costs) {
  for (std::size_t k = 0; k + 1 < channel.size(); ++k)
    if (costs.c_u.at(k + 1) > costs.c_u.at(k) + kEps) return false;
  return true;
}

bool updating_cost_convex(const ChannelModel& channel, const CostModel& costs) {
  const auto g = channel.gains();
  for (std::size_t k = 0; k + 2 < g.size(); ++k) {
    const double s0 = (costs.c_u.at(k + 1) - costs.c_u.at(k)) / (g[k + 1] - g[k]);
    const double s1 = (costs.c_u.at(k + 2) - costs.c_u.at(k + 1)) / (g[k + 2] - g[k + 1]);
    if (s1 - s0 < -kEps) return false;
  }
  return true;
}

AoiComparison compare_optimal_aoi(const ProblemInstance& instance_template,
                                  const ChannelModel& dist_i, const ChannelModel& dist_j,
                                  double c_max) {
  require_same_alphabet(dist_i, dist_j);
  require_same_alphabet(instance_template.channel, dist_i);
  auto solve = [&](const ChannelModel& d) {
    ProblemInstance inst = instance_template;
    inst.channel = d;
    inst.costs.c_max = c_max;
    LagrangianSolver solver(inst);
    return solve_cmdp(solver, c_max).metrics.avg_aoi;
  };
  AoiComparison cmp;
  cmp.verdict = classify(dist_i, dist_j);
  cmp.aoi_i = solve(dist_i);
  cmp.aoi_j = solve(dist_j);
  const auto& ch = instance_template.channel;
  const auto& costs = instance_template.costs;
  cmp.asserted = cmp.verdict.relation == Relation::first_order ||
                 (cmp.verdict.relation == Relation::second_order &&
                  updating_cost_decreasing(ch, costs) && updating_cost_convex(ch, costs));
  if (cmp.asserted) {
    constexpr double tol = 1e-6;
    switch (cmp.verdict.direction) {
      case Direction::i_over_j: cmp.holds = cmp.aoi_i <= cmp.aoi_j + tol; break;
      case Direction::j_over_i: cmp.holds = cmp.aoi_j <= cmp.aoi_i + tol; break;
      case Direction::equivalent: cmp.holds = std::abs(cmp.aoi_i - cmp.aoi_j) <= tol; break;
      case Direction::incomparable: break;
    }
  }
  return cmp;
}

}  // namespace aoi
