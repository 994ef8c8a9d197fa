#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace conjauth {

// Seeded PRNG used for every random choice in the library. Bounded draws use
// rejection sampling on raw 64-bit output so streams are identical across
// standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, bound). bound must be nonzero.
  std::uint64_t below(std::uint64_t bound);

  // Uniform in [lo, hi], inclusive.
  std::int64_t uniform(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo) + 1));
  }

  // Uniform size-`count` subset of {0, ..., universe-1}, ascending.
  std::vector<std::uint32_t> subset(std::uint32_t universe, std::uint32_t count);

  // Independent stream for trial `index` of an experiment seeded with `seed`.
  static Rng derive(std::uint64_t seed, std::uint64_t index);

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace conjauth
