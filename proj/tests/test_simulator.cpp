#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <aoi/simulator.hpp>

#include "fixtures.hpp"

using namespace aoi;

TEST_CASE("simulated averages lie within three standard errors of the exact ones") {
  const auto inst = fixtures::single_device();
  LagrangianSolver solver(inst);
  for (double lambda : {0.1, 1.0, 10.0}) {
    const auto sol = solver.solve(lambda);
    SimConfig cfg;
    cfg.horizon = 200000;
    cfg.seed = 5;
    const auto run = run_single(inst, sol.policy, cfg);
    CHECK(run.pooled.se_aoi > 0.0);
    CHECK(std::abs(run.pooled.avg_aoi - sol.metrics.avg_aoi) <= 3.0 * run.pooled.se_aoi);
    CHECK(std::abs(run.pooled.avg_energy - sol.metrics.avg_energy) <= 3.0 * run.pooled.se_energy);
    CHECK(run.pooled.slots == 200000);
  }
}

TEST_CASE("replications pool their means and keep a replication SE") {
  const auto inst = fixtures::single_device();
  const auto pol = structure_aware_policy_iteration(inst, 1.0).policy;
  const auto exact = exact_policy_metrics(inst, pol);
  SimConfig cfg;
  cfg.horizon = 50000;
  cfg.burn_in = 1000;
  cfg.replications = 6;
  const auto run = run_single(inst, pol, cfg);
  REQUIRE(run.replications.size() == 6);
  double mean = 0.0;
  for (const auto& r : run.replications) mean += r.avg_aoi / 6.0;
  CHECK(run.pooled.avg_aoi == doctest::Approx(mean));
  CHECK(run.pooled.slots == 6 * 49000);
  CHECK(std::abs(run.pooled.avg_aoi - exact.avg_aoi) <= 3.0 * run.pooled.se_aoi);
  CHECK(run.mixture_choice.empty());
}

TEST_CASE("mixture policies flip one coin per replication") {
  const auto inst = fixtures::single_device();
  LagrangianSolver solver(inst);
  const auto cmdp = solve_cmdp(solver, 0.3);
  SimConfig cfg;
  cfg.horizon = 2000;
  cfg.replications = 400;
  const auto run = run_single(inst, cmdp.mixture, cfg);
  REQUIRE(run.mixture_choice.size() == 400);
  double ones = 0.0;
  for (int c : run.mixture_choice) {
    CHECK((c == 1 || c == 2));
    ones += c == 1;
  }
  const double alpha = cmdp.mixture.alpha;
  CHECK(std::abs(ones / 400.0 - alpha) <= 4.0 * std::sqrt(alpha * (1 - alpha) / 400.0) + 1e-12);
}

TEST_CASE("runs are reproducible from the seed") {
  const auto inst = fixtures::single_device();
  const auto pol = structure_aware_policy_iteration(inst, 1.0).policy;
  SimConfig cfg;
  cfg.horizon = 20000;
  cfg.seed = 9;
  cfg.replications = 3;
  const auto a = run_single(inst, pol, cfg);
  const auto b = run_single(inst, pol, cfg);
  CHECK(a.pooled.avg_aoi == b.pooled.avg_aoi);
  CHECK(a.pooled.se_aoi == b.pooled.se_aoi);
  cfg.seed = 10;
  CHECK(run_single(inst, pol, cfg).pooled.avg_aoi != a.pooled.avg_aoi);

  const auto fleet = FleetInstance::random_costs(3, 10, fixtures::fading_channel(), 0.3, Rng(2));
  FleetRunConfig fc;
  fc.sim.horizon = 20000;
  fc.sim.seed = 4;
  fc.trace_every = 100;
  const auto f1 = run_fleet(fleet, fc);
  const auto f2 = run_fleet(fleet, fc);
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(f1.metrics[k].avg_aoi == f2.metrics[k].avg_aoi);
    CHECK(f1.tables[k].q == f2.tables[k].q);
    CHECK(f1.tables[k].lambda == f2.tables[k].lambda);
  }
  CHECK(f1.trace.size() == 3 * 200);
  CHECK(f1.convergence.size() == 20);
}

TEST_CASE("the shared channel never carries two updates") {
  const auto fleet = FleetInstance::random_costs(4, 10, fixtures::fading_channel(), 0.3, Rng(8));
  for (Controller c : {Controller::learned, Controller::zero_wait}) {
    FleetRunConfig fc;
    fc.sim.horizon = 20000;
    fc.controller = c;
    fc.trace_every = 1;
    const auto run = run_fleet(fleet, fc);
    CHECK(run.collisions == 0);
    std::vector<int> per_slot(20001, 0);
    for (const auto& r : run.trace) per_slot[r.slot] += r.u;
    CHECK(*std::max_element(per_slot.begin(), per_slot.end()) <= 1);
    if (c == Controller::zero_wait)
      for (const auto& r : run.trace) CHECK(r.s == r.u);
  }
}

TEST_CASE("a frozen fleet matches the exact semi-distributed Lagrange cost") {
  const auto ch = ChannelModel::uniform({0.0753, 0.2343});
  const auto fleet = FleetInstance::random_costs(2, 4, ch, 0.3, Rng(1));
  std::vector<PerDeviceQTable> tables;
  for (const auto& d : fleet.devices) tables.push_back(per_device_fixed_point(d, 2.0));
  const double exact = semi_distributed_lagrange_cost(fleet, tables);

  FleetRunConfig fc;
  fc.sim.horizon = 300000;
  fc.sim.seed = 3;
  fc.initial_tables = tables;
  fc.learn = false;
  const auto run = run_fleet(fleet, fc);
  double sim = 0.0, se = 0.0;
  for (std::size_t k = 0; k < 2; ++k) {
    sim += run.metrics[k].avg_aoi + 2.0 * (run.metrics[k].avg_energy - 0.3);
    se += run.metrics[k].se_aoi + 2.0 * run.metrics[k].se_energy;
  }
  CHECK(std::abs(sim - exact) <= 3.0 * se);
  for (std::size_t k = 0; k < 2; ++k) CHECK(run.tables[k].q == tables[k].q);
}

TEST_CASE("a learning single device approaches the constrained optimum") {
  const auto inst = fixtures::single_device();
  FleetRunConfig fc;
  fc.sim.horizon = 100000;
  fc.sim.burn_in = 20000;
  fc.sim.seed = 2;
  const auto run = run_fleet(FleetInstance{{inst}}, fc);
  LagrangianSolver solver(inst);
  const double opt = solve_cmdp(solver, 0.3).metrics.avg_aoi;
  CHECK(run.metrics[0].avg_aoi < 1.25 * opt);
  CHECK(run.metrics[0].avg_energy < 0.3 * 1.1);
  CHECK(run.tables[0].lambda > 0.0);
}

TEST_CASE("convergence slot is the start of the final settled stretch") {
  std::vector<WindowRecord> w;
  const double dq[] = {1.0, 1e-4, 1e-4, 0.5, 1e-4, 1e-5};
  for (int i = 0; i < 6; ++i) w.push_back({static_cast<std::uint64_t>(i + 1), 1000u * (i + 1), dq[i], 1e-6, 0, 0});
  CHECK(convergence_slot(w, 1e-3, 1e-4) == std::optional<std::uint64_t>(5000));
  w.back().max_dlambda = 1.0;
  CHECK_FALSE(convergence_slot(w, 1e-3, 1e-4).has_value());
  CHECK_FALSE(convergence_slot({}, 1e-3, 1e-4).has_value());
}

TEST_CASE("batch means standard error") {
  BatchMeans constant(1000);
  for (int i = 0; i < 1000; ++i) constant.add(3.0);
  CHECK(constant.mean() == 3.0);
  CHECK(constant.standard_error() == 0.0);
  BatchMeans alternating(1000, 10);
  for (int i = 0; i < 1000; ++i) alternating.add(i < 500 ? 0.0 : 1.0);
  CHECK(alternating.mean() == 0.5);
  // batch means 0,0,0,0,0,1,1,1,1,1: sd sqrt(10/36), se sqrt(10/36/10)
  CHECK(alternating.standard_error() == doctest::Approx(std::sqrt(1.0 / 36.0)));
}

TEST_CASE("simulation inputs are validated") {
  const auto inst = fixtures::two_state();
  const DeterministicPolicy pol(StateSpace(inst), kIdle);
  SimConfig cfg;
  cfg.horizon = 0;
  CHECK_THROWS_AS(run_single(inst, pol, cfg), ValidationError);
  cfg.horizon = 10;
  cfg.burn_in = 10;
  CHECK_THROWS_AS(run_single(inst, pol, cfg), ValidationError);
  cfg.burn_in = 0;
  cfg.replications = 0;
  CHECK_THROWS_AS(run_single(inst, pol, cfg), ValidationError);
  cfg.replications = 1;
  const DeterministicPolicy wrong(StateSpace(2, 2, 2), kIdle);
  CHECK_THROWS_AS(run_single(inst, wrong, cfg), ValidationError);

  FleetRunConfig fc;
  fc.sim.horizon = 100;
  fc.window = 0;
  CHECK_THROWS_AS(run_fleet(FleetInstance{{inst}}, fc), ValidationError);
  fc.window = 10;
  fc.initial_tables.resize(2);
  CHECK_THROWS_AS(run_fleet(FleetInstance{{inst}}, fc), ValidationError);
}
