#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <aoi/fleet.hpp>

#include "fixtures.hpp"

using namespace aoi;

namespace {

// Joint average Lagrange cost of a small fleet by damped relative value
// iteration over (ages, channels) with every joint action that updates at
// most one device. Written against the restated dynamics only.
double joint_oracle(const std::vector<oracle::Tiny>& devs, const std::vector<double>& lambdas,
                    const std::vector<double>& c_max) {
  const std::size_t k = devs.size();
  std::vector<int> radix;
  for (const auto& d : devs) radix.push_back(d.num_states());
  int n = 1;
  for (int r : radix) n *= r;
  auto decode = [&](int joint, std::vector<int>& st) {
    for (std::size_t i = 0; i < k; ++i) {
      st[i] = joint % radix[i];
      joint /= radix[i];
    }
  };
  std::vector<double> v(n, 0.0), tv(n);
  std::vector<int> st(k), act(k);
  for (int it = 0; it < 200000; ++it) {
    double lo = 1e300, hi = -1e300;
    for (int j = 0; j < n; ++j) {
      decode(j, st);
      double best = 1e300;
      // grant g = k means nobody updates; sampling bits enumerated as a mask
      for (std::size_t g = 0; g <= k; ++g)
        for (int mask = 0; mask < (1 << k); ++mask) {
          double cost = 0.0;
          for (std::size_t i = 0; i < k; ++i) {
            act[i] = ((mask >> i) & 1) * 2 + (g == i ? 1 : 0);
            const auto& d = devs[i];
            cost += d.a_r_of(st[i]) + lambdas[i] * (d.energy(d.h_of(st[i]), act[i]) - c_max[i]);
          }
          // expectation over the independent next channels
          double expect = 0.0;
          std::vector<int> base(k);
          for (std::size_t i = 0; i < k; ++i) {
            const auto& d = devs[i];
            const int al = d.a_l_of(st[i]), ar = d.a_r_of(st[i]);
            base[i] = d.index(d.next_a_l(al, act[i]), d.next_a_r(al, ar, act[i]), 0);
          }
          int hcount = 1;
          for (const auto& d : devs) hcount *= d.num_h();
          for (int hj = 0; hj < hcount; ++hj) {
            int rest = hj, joint = 0, stride = 1;
            double p = 1.0;
            for (std::size_t i = 0; i < k; ++i) {
              const int h = rest % devs[i].num_h();
              rest /= devs[i].num_h();
              p *= devs[i].pmf[h];
              joint += (base[i] + h) * stride;
              stride *= radix[i];
            }
            expect += p * v[joint];
          }
          best = std::min(best, cost + expect);
        }
      tv[j] = best;
      lo = std::min(lo, best - v[j]);
      hi = std::max(hi, best - v[j]);
    }
    if (hi - lo < 1e-10) return 0.5 * (lo + hi);
    for (int j = 0; j < n; ++j) v[j] += 0.5 * (tv[j] - v[j]);
    const double shift = v[0];
    for (double& x : v) x -= shift;
  }
  throw std::runtime_error("joint oracle did not converge");
}

ProblemInstance small_device(double c_s, double scale, Age cap = 3, double c_max = 0.5) {
  const auto ch = ChannelModel::uniform({0.5, 1.5});
  return ProblemInstance{cap, cap, ch, CostModel::inverse_gain(c_s, scale, ch, c_max)};
}

}  // namespace

TEST_CASE("random cost draws are reproducible and in range") {
  const auto ch = fixtures::fading_channel();
  const auto a = FleetInstance::random_costs(5, 20, ch, 0.3, Rng(3));
  const auto b = FleetInstance::random_costs(5, 20, ch, 0.3, Rng(3));
  const auto six = FleetInstance::random_costs(6, 20, ch, 0.3, Rng(3));
  REQUIRE(a.size() == 5);
  for (std::size_t k = 0; k < 5; ++k) {
    CHECK(a.devices[k].costs.c_s == b.devices[k].costs.c_s);
    CHECK(a.devices[k].costs.c_s == six.devices[k].costs.c_s);  // adding a device keeps the others
    CHECK(a.devices[k].costs.c_s >= 0.2);
    CHECK(a.devices[k].costs.c_s <= 0.3);
    const double scale = a.devices[k].costs.c_u[0] * ch.gain(0);
    CHECK(scale >= 0.2);
    CHECK(scale <= 0.3);
    CHECK(a.devices[k].costs.c_max == 0.3);
  }
  CHECK(a.devices[0].costs.c_s != a.devices[1].costs.c_s);
  CHECK_THROWS_AS(FleetInstance::random_costs(2, 5, ch, 0.3, Rng(1), 0.5, 0.1), ValidationError);
  CHECK_THROWS_AS(FleetInstance{}.validate(), ValidationError);
}

TEST_CASE("per-device fixed point reproduces the single-device Lagrangian optimum") {
  const auto inst = fixtures::single_device();
  for (double lambda : {0.1, 1.0, 6.0}) {
    const auto table = per_device_fixed_point(inst, lambda);
    const auto vt = relative_value_iteration(inst, lambda);
    CHECK(table.theta == doctest::Approx(vt.theta - lambda * inst.costs.c_max).epsilon(1e-8));
    CHECK(table.at(kQReferenceState, kQReferenceU) == 0.0);
    // fixed point: Q(s, u) = min_s' F(s, u, s') - theta
    for (std::size_t s = 0; s < table.space.num_states(); s += 53)
      for (int u = 0; u < 2; ++u) {
        const double f = std::min(device_target(inst, table, s, u, 0), device_target(inst, table, s, u, 1));
        CHECK(table.at(s, u) == doctest::Approx(f - table.theta).epsilon(1e-7));
      }
    const auto pol = semi_distributed_policy(inst, table);
    CHECK(policy_evaluation(inst, pol, lambda).theta == doctest::Approx(vt.theta).epsilon(1e-8));
  }
}

TEST_CASE("grant rule: the most negative Q(1) - Q(0) wins, ties favor idle then low index") {
  const std::vector<std::array<double, 2>> none{{1.0, 2.0}, {0.0, 0.0}};
  CHECK_FALSE(updating_control(none).has_value());
  const std::vector<std::array<double, 2>> two{{1.0, 0.5}, {3.0, 1.0}, {0.0, -2.0}};
  CHECK(updating_control(two) == std::optional<std::size_t>(1));
  const std::vector<std::array<double, 2>> tie{{1.0, 0.0}, {2.0, 1.0}};
  CHECK(updating_control(tie) == std::optional<std::size_t>(0));
  const auto zw = zero_wait_policy(two);
  CHECK(zw[0] == kIdle);
  CHECK(zw[1] == kSampleUpdate);
  CHECK(zw[2] == kIdle);
}

TEST_CASE("sampling control minimizes the device target") {
  const auto inst = fixtures::single_device();
  const auto table = per_device_fixed_point(inst, 1.0);
  for (std::size_t s = 0; s < table.space.num_states(); s += 17)
    for (int u = 0; u < 2; ++u) {
      const int pick = sampling_control(inst, table, s, u);
      CHECK(device_target(inst, table, s, u, pick) <= device_target(inst, table, s, u, 1 - pick));
      CHECK(controller_sampling(SamplingRule::zero_wait, inst, table, s, u) == u);
    }
  // all-zero table: both sampling choices give the same target up to the cost, idle wins the tie
  const PerDeviceQTable zeros(StateSpace(inst), 0.0);
  CHECK(sampling_control(inst, zeros, 0, 0) == 0);
}

TEST_CASE("a Q-learning step touches only the visited entry") {
  const auto inst = fixtures::single_device(0.3, 4);
  PerDeviceQTable table(StateSpace(inst), 1.0);
  for (std::size_t i = 0; i < table.q.size(); ++i) table.q[i] = 0.01 * static_cast<double>(i % 7);
  const auto before = table;
  LearningSchedule sched;
  ReferenceCache ref;
  const std::size_t s = table.space.index(2, 3, 4);
  const double target = device_target(inst, table, s, 1, sampling_control(inst, table, s, 1));
  const double ref_target = device_target(inst, table, 0, 0, sampling_control(inst, table, 0, 0));
  q_learning_update(table, inst, s, 1, SamplingRule::optimized, sched, ref);
  for (std::size_t i = 0; i < table.q.size(); ++i) {
    if (i == 2 * s + 1) continue;
    CHECK(table.q[i] == before.q[i]);
    CHECK(table.visits[i] == 0);
  }
  CHECK(table.visits[2 * s + 1] == 1);
  // first visit: step 1, so Q becomes the relative target
  CHECK(table.q[2 * s + 1] == doctest::Approx(target - ref_target));

  LearningSchedule cached = sched;
  cached.reference = ReferenceMode::cached;
  ReferenceCache cache;
  auto t2 = before;
  q_learning_update(t2, inst, s, 1, SamplingRule::optimized, cached, cache);
  CHECK_FALSE(cache.visited);
  CHECK(t2.q[2 * s + 1] == doctest::Approx(target));
  q_learning_update(t2, inst, 0, 0, SamplingRule::optimized, cached, cache);
  CHECK(cache.visited);
}

TEST_CASE("learning schedule steps and validation") {
  LearningSchedule s;
  CHECK_NOTHROW(s.validate());
  CHECK(s.q_step(1) == 1.0);
  CHECK(s.q_step(0) == 1.0);
  CHECK(s.q_step(100) == doctest::Approx(std::pow(100.0, -0.51)));
  CHECK(s.lambda_step(16) == doctest::Approx(1.5 * std::pow(16.0, -0.75)));
  CHECK(s.explore_probability(1) == 0.5);
  // multiplier on the slower timescale: the step ratio vanishes
  CHECK(s.lambda_step(1000000) / s.q_step(1000000) < 0.5 * s.lambda_step(1000) / s.q_step(1000));
  CHECK(lambda_update(0.1, 0.0, 0.3, 1, s) == 0.0);   // projected at zero
  CHECK(lambda_update(1.0, 0.5, 0.3, 1, s) == doctest::Approx(1.3));

  auto bad = s;
  bad.q_exponent = 0.5;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = s;
  bad.lambda_exponent = 0.5;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = s;
  bad.lambda_gain = 0.0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = s;
  bad.explore_scale = -1.0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("centralized oracle agrees with an independent joint value iteration") {
  FleetInstance fleet{{small_device(0.2, 0.3, 2), small_device(0.3, 0.2, 2)}};
  const std::vector<double> lambdas{0.7, 1.3};
  const auto orc = centralized_oracle(fleet, lambdas);
  std::vector<oracle::Tiny> tiny;
  for (const auto& d : fleet.devices) tiny.push_back(fixtures::to_tiny(d));
  CHECK(orc.theta == doctest::Approx(joint_oracle(tiny, lambdas, {0.5, 0.5})).epsilon(1e-8));
}

TEST_CASE("one-device oracle equals the single-device Lagrangian optimum") {
  const auto inst = small_device(0.2, 0.3, 3);
  const std::vector<double> lambdas{1.0};
  const auto orc = centralized_oracle(FleetInstance{{inst}}, lambdas);
  const auto vt = relative_value_iteration(inst, 1.0);
  CHECK(orc.theta == doctest::Approx(vt.theta - 1.0 * inst.costs.c_max).epsilon(1e-8));
}

TEST_CASE("semi-distributed cost is bounded below by the joint optimum") {
  FleetInstance fleet{{small_device(0.2, 0.3), small_device(0.25, 0.25)}};
  const std::vector<double> lambdas{0.5, 0.8};
  const auto orc = centralized_oracle(fleet, lambdas);
  std::vector<PerDeviceQTable> tables;
  for (std::size_t k = 0; k < 2; ++k) tables.push_back(per_device_fixed_point(fleet.devices[k], lambdas[k]));
  const double semi = semi_distributed_lagrange_cost(fleet, tables);
  CHECK(semi >= orc.theta - 1e-8);
  CHECK(semi <= orc.theta + 0.15 * std::abs(orc.theta));
}

TEST_CASE("joint space indexing and limits") {
  FleetInstance fleet{{small_device(0.2, 0.3, 2), small_device(0.2, 0.3, 3)}};
  const JointSpace js(fleet);
  CHECK(js.num_aoi() == 4 * 9);
  CHECK(js.num_channels() == 4);
  double total = 0.0;
  for (std::size_t h = 0; h < js.num_channels(); ++h) total += js.channel_prob(h);
  CHECK(total == doctest::Approx(1.0));
  const std::size_t joint = (3 + 4 * 7) * 4 + 2;  // device0 aoi 3, device1 aoi 7, h0 = 0, h1 = 1
  CHECK(js.device_state(joint, 0) == 3 * 2 + 0);
  CHECK(js.device_state(joint, 1) == 7 * 2 + 1);
  CHECK_THROWS_AS(JointSpace(fleet, 100), ValidationError);
  const std::vector<double> one{1.0};
  CHECK_THROWS_AS(centralized_oracle(fleet, one), ValidationError);
}
