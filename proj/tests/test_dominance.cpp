#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <aoi/dominance.hpp>

#include "fixtures.hpp"

using namespace aoi;

namespace {

ChannelModel on_fading(std::vector<double> weights) {
  return ChannelModel::from_weights(fixtures::kFadingGains, weights);
}

}  // namespace

TEST_CASE("first-order dominance compares CDFs pointwise") {
  const auto g = std::vector<double>{1, 2, 3};
  const ChannelModel low(g, {0.5, 0.3, 0.2}), high(g, {0.2, 0.3, 0.5});
  CHECK(first_order_dominates(high, low));
  CHECK_FALSE(first_order_dominates(low, high));
  CHECK(first_order_dominates(low, low));
  const auto v = classify(high, low);
  CHECK(v.relation == Relation::first_order);
  CHECK(v.direction == Direction::i_over_j);
  CHECK(classify(low, high).direction == Direction::j_over_i);
  CHECK(classify(low, low).direction == Direction::equivalent);
}

TEST_CASE("second-order dominance integrates the CDF over gain") {
  // same mean 2: point mass at 2 against a spread on {1, 3}
  const auto g = std::vector<double>{1, 2, 3};
  const ChannelModel point(g, {0.0, 1.0, 0.0}), spread(g, {0.5, 0.0, 0.5});
  CHECK(second_order_dominates(point, spread));
  CHECK_FALSE(second_order_dominates(spread, point));
  CHECK_FALSE(first_order_dominates(point, spread));
  CHECK_FALSE(first_order_dominates(spread, point));
  const auto v = classify(point, spread);
  CHECK(v.relation == Relation::second_order);
  CHECK(v.direction == Direction::i_over_j);

  // uneven spacing: each CDF step is weighted by the gap to the next gain.
  // Integrated CDFs at 9 and 10: I 1.6, 2.1; J 2.4, 2.75. Unweighted partial
  // sums (0.2, 0.7 against 0.3, 0.65) would reject the ordering.
  const auto u = std::vector<double>{1, 9, 10};
  const ChannelModel i(u, {0.2, 0.3, 0.5}), j(u, {0.3, 0.05, 0.65});
  CHECK(classify(i, j).relation == Relation::second_order);
  CHECK(second_order_dominates(i, j));
  CHECK_FALSE(second_order_dominates(j, i));
}

TEST_CASE("incomparable distributions") {
  const auto g = std::vector<double>{1, 2, 3};
  // I has more mass on both tails than J, with a higher mean
  const ChannelModel i(g, {0.4, 0.0, 0.6}), j(g, {0.0, 1.0, 0.0});
  CHECK(classify(i, j).relation == Relation::none);
  CHECK(to_string(Relation::none) == "none");
  CHECK(to_string(Direction::incomparable) == "incomparable");
}

TEST_CASE("updating-cost shape checks") {
  const auto ch = fixtures::fading_channel();
  const auto inverse = CostModel::inverse_gain(0.2, 0.2, ch, 0.3);
  CHECK(updating_cost_decreasing(ch, inverse));
  CHECK(updating_cost_convex(ch, inverse));
  CostModel linear = inverse;
  for (std::size_t k = 0; k < ch.size(); ++k) linear.c_u[k] = 10.0 - ch.gain(k);
  CHECK(updating_cost_convex(ch, linear));
  CostModel concave = inverse;
  for (std::size_t k = 0; k < ch.size(); ++k) concave.c_u[k] = 1.0 - ch.gain(k) * ch.gain(k);
  CHECK_FALSE(updating_cost_convex(ch, concave));
  CHECK(updating_cost_decreasing(ch, concave));
}

TEST_CASE("mismatched alphabets are rejected") {
  const ChannelModel a({1, 2}, {0.5, 0.5}), b({1, 3}, {0.5, 0.5}), c({1, 2, 3}, {0.2, 0.3, 0.5});
  CHECK_THROWS_AS(first_order_dominates(a, b), ValidationError);
  CHECK_THROWS_AS(second_order_dominates(a, c), ValidationError);
  CHECK_THROWS_AS(compare_optimal_aoi(fixtures::single_device(), a, a, 0.3), ValidationError);
}

TEST_CASE("a first-order better channel gives a lower optimal AoI") {
  const auto base = fixtures::single_device();
  const auto better = on_fading({0, 1, 1, 2, 3, 3, 2, 2});
  for (double c_max : {0.3, 0.5}) {
    const auto cmp = compare_optimal_aoi(base, better, base.channel, c_max);
    CHECK(cmp.verdict.relation == Relation::first_order);
    CHECK(cmp.asserted);
    CHECK(cmp.holds);
    CHECK(cmp.aoi_i < cmp.aoi_j);
  }
  const auto same = compare_optimal_aoi(base, base.channel, base.channel, 0.3);
  CHECK(same.verdict.direction == Direction::equivalent);
  CHECK(same.aoi_i == same.aoi_j);
  CHECK(same.holds);
}

TEST_CASE("the verdict reports an asserted ordering that fails") {
  // Equal-mean contraction with convex decreasing c_u: the point mass is
  // second-order preferred, yet the spread law lets the device wait for the
  // cheaper good channel and ends with a lower optimal AoI.
  const auto base = fixtures::single_device();
  const auto point = on_fading({0, 0, 0, 1, 0, 0, 0, 0});
  const auto spread = on_fading({0, 504, 0, 0, 739, 0, 0, 0});
  CHECK(point.mean() == doctest::Approx(spread.mean()).epsilon(1e-3));
  const auto cmp = compare_optimal_aoi(base, point, spread, 0.3);
  CHECK(cmp.verdict.relation == Relation::second_order);
  CHECK(cmp.verdict.direction == Direction::i_over_j);
  CHECK(cmp.asserted);
  CHECK(cmp.aoi_i > cmp.aoi_j + 0.1);
  CHECK_FALSE(cmp.holds);
}
