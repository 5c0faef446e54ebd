// Serial reference kernels against their OpenMP versions on square age grids
// of the eight-level channel, plus one full RVI solve per execution mode.
//
//   aoi_bench --benchmark_filter=BellmanMin

#include <benchmark/benchmark.h>

#include <aoi/mdp.hpp>

using namespace aoi;
using namespace aoi::kernels;

namespace {

ProblemInstance grid(Age cap) {
  const auto ch = ChannelModel::from_weights({0.0131, 0.0418, 0.0753, 0.1157, 0.1661, 0.2343, 0.3407, 0.6200},
                                             std::vector<double>{1, 1, 2, 3, 3, 2, 1, 1});
  return ProblemInstance{cap, cap, ch, CostModel::inverse_gain(0.2, 0.2, ch, 0.3)};
}

struct Setup {
  ProblemInstance inst;
  StateSpace space;
  StageCost cost;
  std::vector<double> values, expected, out;
  std::vector<std::uint8_t> actions;

  explicit Setup(Age cap)
      : inst(grid(cap)), space(inst), cost{inst.costs.c_s, inst.costs.c_u, 1.0, 0.0},
        values(space.num_states()), expected(space.num_aoi()), out(space.num_states()),
        actions(space.num_states()) {
    for (std::size_t i = 0; i < values.size(); ++i) values[i] = static_cast<double>(i % 97) * 0.37;
    for (std::size_t i = 0; i < expected.size(); ++i) expected[i] = static_cast<double>(i % 89) * 0.41;
  }
};

template <Exec E>
void BM_BellmanMin(benchmark::State& state) {
  Setup s(static_cast<Age>(state.range(0)));
  for (auto _ : state) {
    bellman_min(E, s.space, s.cost, s.expected, s.out, s.actions);
    benchmark::DoNotOptimize(s.out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(s.space.num_states()));
}

template <Exec E>
void BM_ChannelAverage(benchmark::State& state) {
  Setup s(static_cast<Age>(state.range(0)));
  std::vector<double> w(s.space.num_aoi());
  for (auto _ : state) {
    channel_average(E, s.values, s.inst.channel.pmf(), w);
    benchmark::DoNotOptimize(w.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(s.space.num_states()));
}

template <Exec E>
void BM_QBackup(benchmark::State& state) {
  Setup s(static_cast<Age>(state.range(0)));
  std::vector<double> q(2 * s.space.num_states());
  for (auto _ : state) {
    q_backup(E, s.space, s.cost, s.expected, q);
    benchmark::DoNotOptimize(q.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(s.space.num_states()));
}

template <Exec E>
void BM_DifferenceRange(benchmark::State& state) {
  Setup s(static_cast<Age>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(difference_range(E, s.values, s.out));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(s.space.num_states()));
}

template <Exec E>
void BM_RviSolve(benchmark::State& state) {
  const auto inst = grid(static_cast<Age>(state.range(0)));
  SolverOptions opts;
  opts.exec = E;
  for (auto _ : state) benchmark::DoNotOptimize(relative_value_iteration(inst, 1.0, opts).theta);
}

}  // namespace

BENCHMARK(BM_BellmanMin<Exec::serial>)->Arg(10)->Arg(50)->Arg(200);
BENCHMARK(BM_BellmanMin<Exec::parallel>)->Arg(10)->Arg(50)->Arg(200);
BENCHMARK(BM_ChannelAverage<Exec::serial>)->Arg(50)->Arg(200);
BENCHMARK(BM_ChannelAverage<Exec::parallel>)->Arg(50)->Arg(200);
BENCHMARK(BM_QBackup<Exec::serial>)->Arg(50)->Arg(200);
BENCHMARK(BM_QBackup<Exec::parallel>)->Arg(50)->Arg(200);
BENCHMARK(BM_DifferenceRange<Exec::serial>)->Arg(50)->Arg(200);
BENCHMARK(BM_DifferenceRange<Exec::parallel>)->Arg(50)->Arg(200);
BENCHMARK(BM_RviSolve<Exec::serial>)->Arg(30)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RviSolve<Exec::parallel>)->Arg(30)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
