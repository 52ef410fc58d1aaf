#pragma once

#include <cstdint>
#include <random>

namespace collide1d {

using Engine = std::mt19937_64;

/// Identifies one reproducible random stream: the stream of trial `trial_index`
/// under experiment seed `base_seed`.
struct SeedSpec {
  std::uint64_t base_seed = 0;
  std::uint64_t trial_index = 0;

  friend bool operator==(const SeedSpec&, const SeedSpec&) = default;
};

/// Independent substreams carved out of one trial's seed.
enum class Substream : std::uint64_t {
  Positions = 0,
  Velocities = 1,
  Selection = 2,
  Bootstrap = 3,
  Generic = 4,
};

// splitmix64 finalizer
std::uint64_t mix64(std::uint64_t x) noexcept;

std::uint64_t stream_key(SeedSpec seed, std::uint64_t substream) noexcept;

Engine make_stream(SeedSpec seed, std::uint64_t substream = 0);

inline Engine make_stream(SeedSpec seed, Substream sub) {
  return make_stream(seed, static_cast<std::uint64_t>(sub));
}

/// Uniform double strictly inside (0, 1).
inline double open_unit(Engine& eng) {
  return (static_cast<double>(eng() >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace collide1d
