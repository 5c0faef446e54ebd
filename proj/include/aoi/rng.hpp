#pragma once

// Counter-based SplitMix64 streams. A stream is a 64-bit key; draw n of a
// stream is mix(key + n * golden). Substreams are keyed by hashing the parent
// key with (device, purpose), so adding devices never shifts existing draws.

#include <cstdint>
#include <span>

namespace aoi {

enum class Purpose : std::uint64_t {
  channel = 1,
  exploration = 2,
  mixture = 3,
  costs = 4,
  sampling_exploration = 5,
};

class Rng {
 public:
  static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

  explicit Rng(std::uint64_t key) : key_(key) {}

  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  Rng substream(std::uint64_t index, Purpose purpose) const {
    return Rng(mix(mix(key_ ^ (index * kGolden + 1)) + static_cast<std::uint64_t>(purpose)));
  }
  Rng substream(std::uint64_t index) const { return Rng(mix(key_ ^ (index * kGolden + 1))); }

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

  std::uint64_t next_u64() { return mix(key_ + (++counter_) * kGolden); }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
  bool bernoulli(double p) { return uniform() < p; }
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return static_cast<std::uint64_t>(uniform() * static_cast<double>(n)); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Index drawn from a cumulative distribution (last entry treated as 1).
  std::size_t categorical(std::span<const double> cdf) {
    const double x = uniform();
    for (std::size_t i = 0; i + 1 < cdf.size(); ++i)
      if (x < cdf[i]) return i;
    return cdf.size() - 1;
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace aoi
