#pragma once

// Coefficient accumulators for the polynomial kernels. Not part of the
// public interface.

#include <cstdint>
#include <span>
#include <vector>

#include "conjauth/poly.hpp"

namespace conjauth::detail {

// Grids above this many index bits fall back to hashing.
inline constexpr std::uint32_t kMaxGridBits = 24;

// Variables that occur in any of the given key lists.
std::vector<std::uint32_t> active_variables(const Ring& ring, std::initializer_list<std::span<const MonoKey>> lists);

// Bijection between monomials over a fixed variable subset and small
// integers: each variable gets one digit, the first variable the most
// significant, so index order within one degree is graded-lex order and
// index(a*b) = index(a) + index(b) while the degree stays below N.
class CompactIndex {
 public:
  CompactIndex(const Ring& ring, std::vector<std::uint32_t> vars);

  bool fits() const { return ring_.digit_bits() * vars_.size() <= kMaxGridBits; }
  std::size_t cells() const { return std::size_t{1} << (ring_.digit_bits() * vars_.size()); }
  const std::vector<std::uint32_t>& vars() const { return vars_; }

  std::uint32_t index(MonoKey key) const {
    std::uint32_t packed = 0;
    for (std::uint32_t v : vars_) packed = (packed << bits_) | ring_.exponent(key, v);
    return packed;
  }
  std::uint32_t degree(std::uint32_t index) const;
  MonoKey key(std::uint32_t index) const;

 private:
  const Ring& ring_;
  std::vector<std::uint32_t> vars_;
  std::uint32_t bits_;
};

// Dense accumulation grid over a CompactIndex. Cells hold unreduced sums of
// values below the modulus; callers must keep the number of additions per
// cell below 2^24.
class GridAccumulator {
 public:
  GridAccumulator(const RingPtr& ring, const CompactIndex& index, std::size_t expected_terms);
  ~GridAccumulator();
  GridAccumulator(const GridAccumulator&) = delete;
  GridAccumulator& operator=(const GridAccumulator&) = delete;

  void add(std::uint32_t cell, std::uint32_t value) {
    std::uint32_t& slot = grid_[cell];
    if (track_ && slot == 0) touched_.push_back(cell);
    slot += value;
  }
  std::uint32_t* data() { return grid_; }
  bool tracking() const { return track_; }
  std::vector<std::uint32_t>& touched() { return touched_; }

  // Emits the canonical polynomial and clears the grid.
  TruncatedPoly finish();

 private:
  RingPtr ring_;
  const CompactIndex& index_;
  std::uint32_t* grid_;
  bool track_;
  bool finished_ = false;
  std::vector<std::uint32_t> touched_;
};

// Open-addressing map from packed monomial to an unreduced coefficient sum.
class HashAccumulator {
 public:
  explicit HashAccumulator(std::size_t expected);

  void add(MonoKey key, std::uint32_t value) {
    if ((used_ + 1) * 2 > keys_.size()) grow();
    std::size_t slot = hash(key) & mask_;
    while (true) {
      if (keys_[slot] == kEmpty) {
        keys_[slot] = key;
        values_[slot] = value;
        ++used_;
        return;
      }
      if (keys_[slot] == key) {
        values_[slot] += value;
        if (values_[slot] >= kReduceAt) values_[slot] %= modulus_hint_;
        return;
      }
      slot = (slot + 1) & mask_;
    }
  }

  void set_modulus(std::uint32_t p) { modulus_hint_ = p; }

  TruncatedPoly finish(const RingPtr& ring);

 private:
  static constexpr MonoKey kEmpty = ~MonoKey{0};
  static constexpr std::uint32_t kReduceAt = 1U << 30;

  static std::size_t hash(MonoKey key) {
    auto lo = static_cast<std::uint64_t>(key);
    auto hi = static_cast<std::uint64_t>(key >> 64);
    std::uint64_t h = (lo ^ (hi * 0x9e3779b97f4a7c15ULL)) * 0xff51afd7ed558ccdULL;
    return static_cast<std::size_t>(h ^ (h >> 29));
  }
  void grow();

  std::vector<MonoKey> keys_;
  std::vector<std::uint32_t> values_;
  std::size_t mask_ = 0;
  std::size_t used_ = 0;
  std::uint32_t modulus_hint_ = 1U << 30;
};

// a*b keeping only monomials of degree < limit (limit <= N).
TruncatedPoly mul_truncated(const TruncatedPoly& a, const TruncatedPoly& b, std::uint32_t limit);

// Terms of a with degree < limit.
TruncatedPoly truncate_below(const TruncatedPoly& a, std::uint32_t limit);

}  // namespace conjauth::detail
