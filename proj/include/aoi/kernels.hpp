#pragma once

// Dense Bellman-sweep kernels over the (a_l, a_r, h) grid.
//
// Every kernel comes as a serial reference and an OpenMP version. Each output
// entry is computed independently with the same floating-point operation
// order in both, so the two produce bit-identical results for any thread count.

#include <cstdint>
#include <span>

#include "aoi/model.hpp"

namespace aoi::kernels {

enum class Exec { serial, parallel };

/// Per-slot cost a_r + lambda * (s * c_s + u * c_u[h]) + offset.
struct StageCost {
  double c_s = 0.0;
  std::span<const double> c_u;
  double lambda = 0.0;
  double offset = 0.0;

  double operator()(Age a_r, std::size_t h, int action_index) const {
    const Action w = Action::from_index(action_index);
    return static_cast<double>(a_r) + lambda * ((w.s ? c_s : 0.0) + (w.u ? c_u[h] : 0.0)) + offset;
  }
};

/// out[a] = sum_h pmf[h] * values[a * |H| + h]
void channel_average_serial(std::span<const double> values, std::span<const double> pmf,
                            std::span<double> out);
void channel_average_omp(std::span<const double> values, std::span<const double> pmf,
                         std::span<double> out);

/// out[s] = min_w cost(s, w) + expected[next(a, w)], argmin in fixed action order.
/// `actions` may be empty when the argmin is not needed.
void bellman_min_serial(const StateSpace& space, const StageCost& cost,
                        std::span<const double> expected, std::span<double> out,
                        std::span<std::uint8_t> actions);
void bellman_min_omp(const StateSpace& space, const StageCost& cost,
                     std::span<const double> expected, std::span<double> out,
                     std::span<std::uint8_t> actions);

/// out[s] = cost(s, policy[s]) + expected[next(a, policy[s])]
void policy_backup_serial(const StateSpace& space, const StageCost& cost,
                          std::span<const double> expected, std::span<const std::uint8_t> policy,
                          std::span<double> out);
void policy_backup_omp(const StateSpace& space, const StageCost& cost,
                       std::span<const double> expected, std::span<const std::uint8_t> policy,
                       std::span<double> out);

/// Per-device Q backup over (state, u):
/// out[2s + u] = min_{s'} cost(s, (s', u)) + expected[next(a, (s', u))]
void q_backup_serial(const StateSpace& space, const StageCost& cost,
                     std::span<const double> expected, std::span<double> out);
void q_backup_omp(const StateSpace& space, const StageCost& cost,
                  std::span<const double> expected, std::span<double> out);

/// out[a] = sum_h pmf[h] * min(q[2(a|H|+h)], q[2(a|H|+h)+1])
void q_channel_min_average_serial(std::span<const double> q, std::span<const double> pmf,
                                  std::span<double> out);
void q_channel_min_average_omp(std::span<const double> q, std::span<const double> pmf,
                               std::span<double> out);

/// (min, max) of a[i] - b[i].
struct Range {
  double lo;
  double hi;
  double span() const { return hi - lo; }
};
Range difference_range_serial(std::span<const double> a, std::span<const double> b);
Range difference_range_omp(std::span<const double> a, std::span<const double> b);

// Dispatchers used by the solvers.
void channel_average(Exec e, std::span<const double> values, std::span<const double> pmf,
                     std::span<double> out);
void bellman_min(Exec e, const StateSpace& space, const StageCost& cost,
                 std::span<const double> expected, std::span<double> out,
                 std::span<std::uint8_t> actions);
void policy_backup(Exec e, const StateSpace& space, const StageCost& cost,
                   std::span<const double> expected, std::span<const std::uint8_t> policy,
                   std::span<double> out);
void q_backup(Exec e, const StateSpace& space, const StageCost& cost,
              std::span<const double> expected, std::span<double> out);
void q_channel_min_average(Exec e, std::span<const double> q, std::span<const double> pmf,
                           std::span<double> out);
Range difference_range(Exec e, std::span<const double> a, std::span<const double> b);

/// Parallel execution only pays off above this many states.
inline constexpr std::size_t kParallelThreshold = 4096;
inline Exec choose_exec(std::size_t num_states) {
  return num_states >= kParallelThreshold ? Exec::parallel : Exec::serial;
}

}  // namespace aoi::kernels
