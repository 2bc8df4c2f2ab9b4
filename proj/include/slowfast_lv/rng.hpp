#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace slowfast {

/// SplitMix64 output function; used for seeding and stream derivation.
std::uint64_t splitmix64(std::uint64_t& state);

/// Seed of the independent stream number `index` under master seed `seed`.
std::uint64_t derive_stream_seed(std::uint64_t seed, std::uint64_t index);

/// xoshiro256** (Blackman & Vigna), seeded through SplitMix64.
///
/// Satisfies UniformRandomBitGenerator. The sampling helpers below are
/// written out explicitly so that draws do not depend on the standard
/// library's distribution implementations.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed = 0);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()();

  /// Uniform on the open interval (0, 1).
  double uniform();
  /// Exponential with the given rate (> 0).
  double exponential(double rate);
  /// Standard normal, Marsaglia polar method with a cached second draw.
  double normal();

 private:
  std::array<std::uint64_t, 4> s_{};
  double cached_normal_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace slowfast
