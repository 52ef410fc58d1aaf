#include "collide1d/rng.hpp"

namespace collide1d {

std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t stream_key(SeedSpec seed, std::uint64_t substream) noexcept {
  std::uint64_t h = mix64(seed.base_seed);
  h = mix64(h ^ seed.trial_index);
  h = mix64(h ^ (substream * 0xD1B54A32D192ED03ULL + 1));
  return h;
}

Engine make_stream(SeedSpec seed, std::uint64_t substream) {
  return Engine(stream_key(seed, substream));
}

}  // namespace collide1d
