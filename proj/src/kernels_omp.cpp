#include <algorithm>
#include <cstdint>
#include <limits>

#include "aoi/kernels.hpp"

namespace aoi::kernels {

void channel_average_omp(std::span<const double> values, std::span<const double> pmf,
                         std::span<double> out) {
  const std::int64_t n = static_cast<std::int64_t>(out.size());
  const std::size_t nh = pmf.size();
#pragma omp parallel for schedule(static)
  for (std::int64_t a = 0; a < n; ++a) {
    double acc = 0.0;
    for (std::size_t h = 0; h < nh; ++h) acc += pmf[h] * values[a * nh + h];
    out[a] = acc;
  }
}

void bellman_min_omp(const StateSpace& space, const StageCost& cost,
                     std::span<const double> expected, std::span<double> out,
                     std::span<std::uint8_t> actions) {
  const std::size_t nh = space.num_channels();
  const auto next = space.next_aoi();
  const std::int64_t n = static_cast<std::int64_t>(space.num_aoi());
  const bool want_actions = !actions.empty();
#pragma omp parallel for schedule(static)
  for (std::int64_t a = 0; a < n; ++a) {
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
      if (want_actions) actions[a * nh + h] = static_cast<std::uint8_t>(arg);
    }
  }
}

void policy_backup_omp(const StateSpace& space, const StageCost& cost,
                       std::span<const double> expected, std::span<const std::uint8_t> policy,
                       std::span<double> out) {
  const std::size_t nh = space.num_channels();
  const auto next = space.next_aoi();
  const std::int64_t n = static_cast<std::int64_t>(space.num_aoi());
#pragma omp parallel for schedule(static)
  for (std::int64_t a = 0; a < n; ++a) {
    const Age a_r = space.aoi_state(a).a_r;
    for (std::size_t h = 0; h < nh; ++h) {
      const int w = policy[a * nh + h];
      out[a * nh + h] = cost(a_r, h, w) + expected[next[a * kNumActions + w]];
    }
  }
}

void q_backup_omp(const StateSpace& space, const StageCost& cost,
                  std::span<const double> expected, std::span<double> out) {
  const std::size_t nh = space.num_channels();
  const auto next = space.next_aoi();
  const std::int64_t n = static_cast<std::int64_t>(space.num_aoi());
#pragma omp parallel for schedule(static)
  for (std::int64_t a = 0; a < n; ++a) {
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

void q_channel_min_average_omp(std::span<const double> q, std::span<const double> pmf,
                               std::span<double> out) {
  const std::size_t nh = pmf.size();
  const std::int64_t n = static_cast<std::int64_t>(out.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t a = 0; a < n; ++a) {
    double acc = 0.0;
    for (std::size_t h = 0; h < nh; ++h) {
      const std::size_t s = a * nh + h;
      acc += pmf[h] * std::min(q[2 * s], q[2 * s + 1]);
    }
    out[a] = acc;
  }
}

Range difference_range_omp(std::span<const double> a, std::span<const double> b) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  const std::int64_t n = static_cast<std::int64_t>(a.size());
#pragma omp parallel for schedule(static) reduction(min : lo) reduction(max : hi)
  for (std::int64_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    lo = std::min(lo, d);
    hi = std::max(hi, d);
  }
  return Range{lo, hi};
}

}  // namespace aoi::kernels
