#include <algorithm>
#include <limits>

#include "aoi/kernels.hpp"

namespace aoi::kernels {

void channel_average_serial(std::span<const double> values, std::span<const double> pmf,
                            std::span<double> out) {
  const std::size_t nh = pmf.size();
  for (std::size_t a = 0; a < out.size(); ++a) {
    double acc = 0.0;
    for (std::size_t h = 0; h < nh; ++h) acc += pmf[h] * values[a * nh + h];
    out[a] = acc;
  }
}

void bellman_min_serial(const StateSpace& space, const StageCost& cost,
                        std::span<const double> expected, std::span<double> out,
                        std::span<std::uint8_t> actions) {
  const std::size_t nh = space.num_channels();
  const auto next = space.next_aoi();
  for (std::size_t a = 0; a < space.num_aoi(); ++a) {
    const Age a_r = space.aoi_state(a).a_r;
    for (std::size_t h = 0; h < nh; ++h) {
      double best = std::numeric_limits<double>::infinity();
      int arg = 0;
      for (int w = 0; w < kNumActions; ++w) {
        const double j = cost(a_r, h, w) + expected[next[a * kNumActions + w]];
        if (j < best) {
          best = j;
          arg = w;
        }
      }
      out[a * nh + h] = best;
      if (!actions.empty()) actions[a * nh + h] = static_cast<std::uint8_t>(arg);
    }
  }
}

void policy_backup_serial(const StateSpace& space, const StageCost& cost,
                          std::span<const double> expected, std::span<const std::uint8_t> policy,
                          std::span<double> out) {
  const std::size_t nh = space.num_channels();
  const auto next = space.next_aoi();
  for (std::size_t a = 0; a < space.num_aoi(); ++a) {
    const Age a_r = space.aoi_state(a).a_r;
    for (std::size_t h = 0; h < nh; ++h) {
      const int w = policy[a * nh + h];
      out[a * nh + h] = cost(a_r, h, w) + expected[next[a * kNumActions + w]];
    }
  }
}

void q_backup_serial(const StateSpace& space, const StageCost& cost,
                     std::span<const double> expected, std::span<double> out) {
  const std::size_t nh = space.num_channels();
  const auto next = space.next_aoi();
  for (std::size_t a = 0; a < space.num_aoi(); ++a) {
    const Age a_r = space.aoi_state(a).a_r;
    for (std::size_t h = 0; h < nh; ++h) {
      for (int u = 0; u < 2; ++u) {
        const double j0 = cost(a_r, h, u) + expected[next[a * kNumActions + u]];
        const double j1 = cost(a_r, h, 2 + u) + expected[next[a * kNumActions + 2 + u]];
        out[2 * (a * nh + h) + u] = std::min(j0, j1);
      }
    }
  }
}

void q_channel_min_average_serial(std::span<const double> q, std::span<const double> pmf,
                                  std::span<double> out) {
  const std::size_t nh = pmf.size();
  for (std::size_t a = 0; a < out.size(); ++a) {
    double acc = 0.0;
    for (std::size_t h = 0; h < nh; ++h) {
      const std::size_t s = a * nh + h;
      acc += pmf[h] * std::min(q[2 * s], q[2 * s + 1]);
    }
    out[a] = acc;
  }
}

Range difference_range_serial(std::span<const double> a, std::span<const double> b) {
  Range r{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    r.lo = std::min(r.lo, d);
    r.hi = std::max(r.hi, d);
  }
  return r;
}

void channel_average(Exec e, std::span<const double> values, std::span<const double> pmf,
                     std::span<double> out) {
  e == Exec::parallel ? channel_average_omp(values, pmf, out)
                      : channel_average_serial(values, pmf, out);
}

void bellman_min(Exec e, const StateSpace& space, const StageCost& cost,
                 std::span<const double> expected, std::span<double> out,
                 std::span<std::uint8_t> actions) {
  e == Exec::parallel ? bellman_min_omp(space, cost, expected, out, actions)
                      : bellman_min_serial(space, cost, expected, out, actions);
}

void policy_backup(Exec e, const StateSpace& space, const StageCost& cost,
                   std::span<const double> expected, std::span<const std::uint8_t> policy,
                   std::span<double> out) {
  e == Exec::parallel ? policy_backup_omp(space, cost, expected, policy, out)
                      : policy_backup_serial(space, cost, expected, policy, out);
}

void q_backup(Exec e, const StateSpace& space, const StageCost& cost,
              std::span<const double> expected, std::span<double> out) {
  e == Exec::parallel ? q_backup_omp(space, cost, expected, out)
                      : q_backup_serial(space, cost, expected, out);
}

void q_channel_min_average(Exec e, std::span<const double> q, std::span<const double> pmf,
                           std::span<double> out) {
  e == Exec::parallel ? q_channel_min_average_omp(q, pmf, out)
                      : q_channel_min_average_serial(q, pmf, out);
}

Range difference_range(Exec e, std::span<const double> a, std::span<const double> b) {
  return e == Exec::parallel ? difference_range_omp(a, b) : difference_range_serial(a, b);
}

}  // namespace aoi::kernels
