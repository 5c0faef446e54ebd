#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <aoi/structure.hpp>

#include "fixtures.hpp"

using namespace aoi;

TEST_CASE("value and dominance-delta monotonicity across the multiplier grid") {
  for (const auto& inst : {fixtures::single_device(), fixtures::two_state()}) {
    for (double lambda : {0.0, 0.01, 0.1, 1.0, 10.0}) {
      const auto vt = relative_value_iteration(inst, lambda);
      const auto mono = certify_value_monotonicity(vt);
      const auto deltas = certify_dominance_deltas(inst, vt, lambda);
      CHECK(mono.pass());
      CHECK(deltas.pass());
      CHECK(mono.checked == 2 * 9 * 10 * inst.channel.size());
      CHECK(deltas.checked > 0);
    }
  }
}

TEST_CASE("threshold structure A-D certified on the optimal policy") {
  for (const auto& inst : {fixtures::single_device(), fixtures::two_state()}) {
    for (double lambda : {0.01, 0.1, 1.0}) {
      const auto vt = relative_value_iteration(inst, lambda);
      const auto pol = extract_greedy_policy(inst, vt, lambda);
      const auto cert = certify_threshold_structure(inst, pol, vt, lambda);
      CHECK(cert.pass());
      CHECK(cert.idle_region.checked + cert.update_region.checked + cert.sample_region.checked > 0);
    }
  }
}

TEST_CASE("region map of the two-state instance") {
  const auto inst = fixtures::two_state();
  const auto vt = relative_value_iteration(inst, 1.0);
  const auto pol = extract_greedy_policy(inst, vt, 1.0);
  for (std::size_t h = 0; h < 2; ++h) {
    CHECK(pol.at(1, 1, h) == kIdle);           // idle block at small ages
    CHECK(pol.at(1, 10, h).u);                 // fresh packet and stale destination: update
    CHECK(pol.at(10, 1, h) == kIdle);          // destination fresh: nothing to gain yet
    CHECK(pol.at(10, 5, h) == kSample);        // stale packet, aging destination: sample
  }
}

TEST_CASE("corrupted policies and values are caught") {
  const auto inst = fixtures::two_state();
  const double lambda = 1.0;
  auto vt = relative_value_iteration(inst, lambda);
  auto pol = extract_greedy_policy(inst, vt, lambda);
  const std::size_t s = vt.space.index(1, 1, 0);
  REQUIRE(pol.at(s) == kIdle);
  pol.set(s, kSampleUpdate);
  const auto cert = certify_threshold_structure(inst, pol, vt, lambda);
  CHECK_FALSE(cert.pass());
  CHECK_FALSE(cert.idle_region.pass());
  CHECK(cert.idle_region.worst() > 0.0);

  vt.values[vt.space.index(5, 5, 1)] += 100.0;
  const auto mono = certify_value_monotonicity(vt);
  CHECK_FALSE(mono.pass());
  CHECK(mono.worst() == doctest::Approx(100.0).epsilon(0.5));
}

TEST_CASE("threshold report sentinels and dominance deltas") {
  const auto inst = fixtures::two_state();
  const auto vt = relative_value_iteration(inst, 1.0);
  const ThresholdReport thr(inst, vt, 1.0);
  const auto table = state_action_cost(inst, vt, 1.0);
  const std::size_t s = vt.space.index(3, 4, 1);
  CHECK(dominance_delta(inst, vt, s, kIdle, kUpdate, 1.0) ==
        doctest::Approx(table.at(s, kIdle) - table.at(s, kUpdate)));
  CHECK(dominance_delta(inst, vt, s, kSample, kSample, 1.0) == 0.0);
  for (std::size_t h = 0; h < 2; ++h)
    for (Age a = 1; a <= 10; ++a)
      for (int w = 0; w < kNumActions; ++w) {
        const Action act = Action::from_index(w);
        const int lo = thr.phi_minus(act, a, h), hi = thr.phi_plus(act, a, h);
        if (lo == kPlusInfinity) {
          CHECK(hi == kMinusInfinity);
        } else {
          CHECK(lo <= hi);
          CHECK(thr.dominant(vt.space.index(lo, a, h), act));
        }
      }
  CHECK(thr.in_idle_region(1, 1, 0));
}

TEST_CASE("threshold sweeps are monotone in the swept cost") {
  const auto inst = fixtures::single_device();
  const auto by_cs = threshold_monotonicity_sweep(inst, SweepParameter::sampling_cost, {40, 1, 5, 10, 20}, 0.1, 1);
  CHECK(by_cs.monotonicity.pass());
  REQUIRE(by_cs.points.size() == 5);
  CHECK(by_cs.points.front().value == 1.0);
  CHECK(by_cs.points.front().threshold.size() == 10);
  const auto by_cu = threshold_monotonicity_sweep(inst, SweepParameter::updating_cost, {0.2, 0.5, 1, 2, 4}, 0.1, 3);
  CHECK(by_cu.monotonicity.pass());
  // at least one threshold moves across the grid
  CHECK(by_cu.points.front().threshold != by_cu.points.back().threshold);

  CHECK_THROWS_AS(threshold_monotonicity_sweep(inst, SweepParameter::sampling_cost, {}, 0.1, 1), ValidationError);
  CHECK_THROWS_AS(threshold_monotonicity_sweep(inst, SweepParameter::sampling_cost, {1.0}, 0.1, 8), ValidationError);
  CHECK_THROWS_AS(threshold_monotonicity_sweep(inst, SweepParameter::updating_cost, {-1.0}, 0.1, 1), ValidationError);
}

TEST_CASE("updating channels form an up-set of the gain alphabet") {
  const auto inst = fixtures::single_device();
  const auto vt = relative_value_iteration(inst, 0.1);
  const auto pol = extract_greedy_policy(inst, vt, 0.1);
  const auto rep = certify_channel_upset(inst, pol, vt, 0.1);
  CHECK(rep.pass());
  CHECK(rep.checked == 100);
  CHECK(certify_channel_upset(inst, pol, vt, 0.1, {4, 5}).checked == 20);
  CHECK_THROWS_AS(certify_channel_upset(inst, pol, vt, 0.1, {11}), ValidationError);

  // updating on the worst channel only is not an up-set and not optimal
  auto bad = pol;
  for (std::size_t h = 0; h < 8; ++h) bad.set(vt.space.index(4, 10, h), h == 0 ? kUpdate : kIdle);
  CHECK_FALSE(certify_channel_upset(inst, bad, vt, 0.1, {4}).pass());
}
