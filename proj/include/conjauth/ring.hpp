#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

namespace conjauth {

// Packed monomial. Exponents are stored as fixed-width digits with the total
// degree in the most significant digit and x1 next, so integer order is
// graded-lex order and multiplying monomials is integer addition.
using MonoKey = unsigned __int128;

struct RingParams {
  std::uint32_t modulus = 11;
  std::uint32_t k = 10;   // variable count
  std::uint32_t N = 1000; // monomials of total degree >= N vanish
  std::uint32_t max_gen_degree = 8;

  // Defaults for a ring of the given shape, with the generation cap
  // clamped to N-1.
  static RingParams make(std::uint32_t modulus, std::uint32_t k, std::uint32_t N);

  // Throws InvalidParameter when an invariant is broken.
  void validate() const;

  // Arithmetic identity: two params describe the same ring when modulus, k
  // and N agree. max_gen_degree only steers sampling.
  bool same_ring(const RingParams& other) const {
    return modulus == other.modulus && k == other.k && N == other.N;
  }
  friend bool operator==(const RingParams&, const RingParams&) = default;
};

bool is_prime(std::uint32_t value);

class Ring;
using RingPtr = std::shared_ptr<const Ring>;

// Shared arithmetic context for one ring: monomial packing and Z_p tables.
class Ring {
 public:
  static RingPtr create(const RingParams& params);

  const RingParams& params() const { return params_; }
  std::uint32_t modulus() const { return params_.modulus; }
  std::uint32_t k() const { return params_.k; }
  std::uint32_t N() const { return params_.N; }
  std::uint32_t digit_bits() const { return bits_; }
  bool same_ring(const Ring& other) const { return this == &other || params_.same_ring(other.params_); }

  // Throws InvalidParameter for the wrong length or a degree >= N.
  MonoKey pack(std::span<const std::uint32_t> exponents) const;
  std::vector<std::uint32_t> unpack(MonoKey key) const;

  std::uint32_t degree(MonoKey key) const { return static_cast<std::uint32_t>(key >> degree_shift_); }
  std::uint32_t exponent(MonoKey key, std::uint32_t var) const {
    return static_cast<std::uint32_t>(key >> ((params_.k - 1 - var) * bits_)) & digit_mask_;
  }
  // Key with the degree digit removed; orders monomials lexicographically.
  MonoKey lex_part(MonoKey key) const { return key & lex_mask_; }
  // True when the key is a well-formed monomial of degree < N.
  bool well_formed(MonoKey key) const;

  std::uint8_t add(std::uint32_t a, std::uint32_t b) const {
    return static_cast<std::uint8_t>((a + b) % params_.modulus);
  }
  std::uint8_t sub(std::uint32_t a, std::uint32_t b) const {
    return static_cast<std::uint8_t>((a + params_.modulus - b) % params_.modulus);
  }
  std::uint8_t mul(std::uint32_t a, std::uint32_t b) const { return mul_table_[a * params_.modulus + b]; }
  std::uint8_t neg(std::uint32_t a) const { return sub(0, a); }
  // Throws InvalidParameter on zero.
  std::uint8_t inv(std::uint32_t a) const;
  const std::uint8_t* mul_row(std::uint32_t a) const { return mul_table_.data() + a * params_.modulus; }

 private:
  explicit Ring(const RingParams& params);

  RingParams params_;
  std::uint32_t bits_ = 1;
  std::uint32_t digit_mask_ = 1;
  std::uint32_t degree_shift_ = 0;
  MonoKey lex_mask_ = 0;
  std::vector<std::uint8_t> mul_table_;
  std::vector<std::uint8_t> inv_table_;
};

}  // namespace conjauth
