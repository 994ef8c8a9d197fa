#include "conjauth/ring.hpp"

#include <algorithm>
#include <bit>
#include <string>

#include "conjauth/error.hpp"

namespace conjauth {

bool is_prime(std::uint32_t value) {
  if (value < 2) return false;
  for (std::uint32_t d = 2; d * d <= value; ++d) {
    if (value % d == 0) return false;
  }
  return true;
}

RingParams RingParams::make(std::uint32_t modulus, std::uint32_t k, std::uint32_t N) {
  RingParams params;
  params.modulus = modulus;
  params.k = k;
  params.N = N;
  params.max_gen_degree = std::max<std::uint32_t>(1, std::min<std::uint32_t>(8, N > 0 ? N - 1 : 0));
  return params;
}

void RingParams::validate() const {
  if (!is_prime(modulus) || modulus >= 256) {
    throw InvalidParameter("modulus must be a prime below 256, got " + std::to_string(modulus));
  }
  if (k < 1) throw InvalidParameter("k must be at least 1");
  if (N < 1) throw InvalidParameter("N must be at least 1");
  if (max_gen_degree < 1 || max_gen_degree + 1 > N) {
    throw InvalidParameter("max_gen_degree must lie in [1, N-1], got " + std::to_string(max_gen_degree));
  }
  const std::uint32_t bits = std::max<std::uint32_t>(1, std::bit_width(N - 1));
  // One spare bit above the degree digit absorbs the sum of two degrees.
  if (static_cast<std::uint64_t>(bits) * (k + 1) + 1 > 128) {
    throw InvalidParameter("ring too large for packed monomials: need bit_width(N-1)*(k+1) < 128");
  }
}

bool Ring::well_formed(MonoKey key) const {
  std::uint32_t total = 0;
  for (std::uint32_t v = 0; v < params_.k; ++v) total += exponent(key, v);
  return degree(key) == total && total < params_.N;
}

RingPtr Ring::create(const RingParams& params) {
  params.validate();
  return RingPtr(new Ring(params));
}

Ring::Ring(const RingParams& params) : params_(params) {
  bits_ = std::max<std::uint32_t>(1, std::bit_width(params.N - 1));
  digit_mask_ = (1U << bits_) - 1;
  degree_shift_ = params.k * bits_;
  lex_mask_ = (MonoKey{1} << degree_shift_) - 1;
  const std::uint32_t p = params.modulus;
  mul_table_.resize(static_cast<std::size_t>(p) * p);
  inv_table_.assign(p, 0);
  for (std::uint32_t a = 0; a < p; ++a) {
    for (std::uint32_t b = 0; b < p; ++b) {
      const auto prod = static_cast<std::uint8_t>((a * b) % p);
      mul_table_[a * p + b] = prod;
      if (prod == 1) inv_table_[a] = static_cast<std::uint8_t>(b);
    }
  }
}

MonoKey Ring::pack(std::span<const std::uint32_t> exponents) const {
  if (exponents.size() != params_.k) {
    throw InvalidParameter("monomial needs " + std::to_string(params_.k) + " exponents");
  }
  std::uint64_t total = 0;
  MonoKey key = 0;
  for (std::uint32_t e : exponents) {
    total += e;
    if (total >= params_.N) throw InvalidParameter("monomial degree must be below N");
    key = (key << bits_) | e;
  }
  return key | (MonoKey{total} << degree_shift_);
}

std::vector<std::uint32_t> Ring::unpack(MonoKey key) const {
  std::vector<std::uint32_t> out(params_.k);
  for (std::uint32_t v = 0; v < params_.k; ++v) out[v] = exponent(key, v);
  return out;
}

std::uint8_t Ring::inv(std::uint32_t a) const {
  if (a % params_.modulus == 0) throw InvalidParameter("zero has no inverse");
  return inv_table_[a % params_.modulus];
}

}  // namespace conjauth
