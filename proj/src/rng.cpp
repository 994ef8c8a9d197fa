#include "conjauth/rng.hpp"

#include <algorithm>
#include <numeric>

namespace conjauth {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t Rng::below(std::uint64_t bound) {
  if (bound == 0) return 0;
  // Largest multiple of bound that fits, minus one.
  const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound + 1) % bound;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x > limit);
  return x % bound;
}

std::vector<std::uint32_t> Rng::subset(std::uint32_t universe, std::uint32_t count) {
  std::vector<std::uint32_t> pool(universe);
  std::iota(pool.begin(), pool.end(), 0U);
  count = std::min(count, universe);
  for (std::uint32_t i = 0; i < count; ++i) {
    auto j = i + static_cast<std::uint32_t>(below(universe - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(count);
  std::sort(pool.begin(), pool.end());
  return pool;
}

Rng Rng::derive(std::uint64_t seed, std::uint64_t index) {
  return Rng(splitmix64(splitmix64(seed) ^ (index * 0xd1342543de82ef95ULL + 1)));
}

}  // namespace conjauth
