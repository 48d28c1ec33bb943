#pragma once

#include <cstdint>

namespace ringswarm {

/// Counter-based generator: every draw is a pure function of
/// (seed, stream, counter), so results never depend on call order.
class CounterRng {
 public:
  explicit constexpr CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
      : key_(mix(seed ^ mix(stream + 0x632BE59BD9B4E019ull))) {}

  constexpr std::uint64_t bits(std::uint64_t counter) const {
    return mix(key_ + 0x9E3779B97F4A7C15ull * (counter + 1));
  }

  /// Uniform on [0, 1).
  constexpr double uniform(std::uint64_t counter) const {
    return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
  }

 private:
  // splitmix64 finalizer
  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
};

}  // namespace ringswarm
