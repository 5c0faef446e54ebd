#pragma once

// Stochastic orderings of channel distributions on a shared gain alphabet and
// the optimal-AoI comparison they predict.

#include "aoi/cmdp.hpp"

namespace aoi {

/// CDF of I pointwise <= CDF of J.
bool first_order_dominates(const ChannelModel& dist_i, const ChannelModel& dist_j);

/// Integrated CDF of I pointwise <= that of J. The integral runs over gain,
/// so each CDF step is weighted by the spacing to the next gain.
bool second_order_dominates(const ChannelModel& dist_i, const ChannelModel& dist_j);

enum class Relation { first_order, second_order, none };
enum class Direction { i_over_j, j_over_i, equivalent, incomparable };

struct DominanceVerdict {
  Relation relation = Relation::none;
  Direction direction = Direction::incomparable;
};

/// Strongest relation that holds in either direction.
DominanceVerdict classify(const ChannelModel& dist_i, const ChannelModel& dist_j);

std::string to_string(Relation r);
std::string to_string(Direction d);

/// Discrete convexity of c_u over the gain alphabet: slopes between
/// consecutive gains are non-decreasing (tolerance 1e-12).
bool updating_cost_convex(const ChannelModel& channel, const CostModel& costs);
bool updating_cost_decreasing(const ChannelModel& channel, const CostModel& costs);

struct AoiComparison {
  double aoi_i = 0.0;
  double aoi_j = 0.0;
  DominanceVerdict verdict;
  bool asserted = false;  // the ordering is predicted for this pair
  bool holds = true;      // aoi_i <= aoi_j + 1e-6 whenever asserted (mirrored for j over i)
};

/// Solves the constrained problem under each distribution with the template's
/// caps and costs. The ordering is asserted for first-order pairs, and for
/// second-order pairs only when c_u is decreasing and convex.
AoiComparison compare_optimal_aoi(const ProblemInstance& instance_template,
                                  const ChannelModel& dist_i, const ChannelModel& dist_j,
                                  double c_max);

}  // namespace aoi
