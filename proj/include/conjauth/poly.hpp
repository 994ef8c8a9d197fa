#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "conjauth/ring.hpp"
#include "conjauth/rng.hpp"

namespace conjauth {

// Element of Z_p[x1..xk] / (monomials of degree >= N), stored as a sparse
// term list in strictly ascending graded-lex order with nonzero
// coefficients. Equal polynomials have identical term lists.
class TruncatedPoly {
 public:
  explicit TruncatedPoly(RingPtr ring) : ring_(std::move(ring)) {}

  static TruncatedPoly constant(RingPtr ring, std::uint32_t c);
  static TruncatedPoly variable(RingPtr ring, std::uint32_t var, std::uint32_t coeff = 1);
  static TruncatedPoly monomial(RingPtr ring, std::span<const std::uint32_t> exponents,
                                std::uint32_t coeff = 1);
  // Accepts terms in any order with repeats; merges, reduces mod p and drops
  // zero coefficients and monomials of degree >= N.
  static TruncatedPoly from_terms(RingPtr ring, std::vector<std::pair<MonoKey, std::uint32_t>> terms);
  // Takes already-canonical storage. Caller guarantees the invariants.
  static TruncatedPoly from_canonical(RingPtr ring, std::vector<MonoKey> keys,
                                      std::vector<std::uint8_t> coeffs);

  const RingPtr& ring() const { return ring_; }
  std::size_t size() const { return keys_.size(); }
  bool is_zero() const { return keys_.empty(); }
  std::span<const MonoKey> keys() const { return keys_; }
  std::span<const std::uint8_t> coeffs() const { return coeffs_; }

  std::uint8_t coeff(MonoKey key) const;
  std::uint8_t constant_term() const {
    return !keys_.empty() && keys_.front() == 0 ? coeffs_.front() : 0;
  }
  // Highest and lowest total degree present; 0 for the zero polynomial.
  std::uint32_t degree() const;
  std::uint32_t min_degree() const;

  // True when terms are strictly ascending with coefficients in [1, p).
  bool is_canonical() const;

  std::string to_string() const;

  friend bool operator==(const TruncatedPoly& a, const TruncatedPoly& b);

  TruncatedPoly operator-() const;
  friend TruncatedPoly operator+(const TruncatedPoly& a, const TruncatedPoly& b);
  friend TruncatedPoly operator-(const TruncatedPoly& a, const TruncatedPoly& b);
  friend TruncatedPoly operator*(const TruncatedPoly& a, const TruncatedPoly& b);

 private:
  RingPtr ring_;
  std::vector<MonoKey> keys_;
  std::vector<std::uint8_t> coeffs_;
};

// Throws ParameterMismatch when the operands live in different rings.
void require_same_ring(const TruncatedPoly& a, const TruncatedPoly& b);

TruncatedPoly poly_add(const TruncatedPoly& a, const TruncatedPoly& b);
TruncatedPoly poly_sub(const TruncatedPoly& a, const TruncatedPoly& b);
TruncatedPoly poly_mul(const TruncatedPoly& a, const TruncatedPoly& b);
TruncatedPoly poly_scalar_mul(std::uint32_t c, const TruncatedPoly& a);
// a + c*b in one pass.
TruncatedPoly poly_axpy(const TruncatedPoly& a, std::uint32_t c, const TruncatedPoly& b);
TruncatedPoly poly_pow(const TruncatedPoly& a, std::uint32_t e);

// The truncation ideal is nilpotent, so a is a unit iff its constant term is
// nonzero.
bool is_unit(const TruncatedPoly& a);
// Inverse of a unit via the finite geometric series; throws InvalidParameter
// for non-units.
TruncatedPoly poly_inverse(const TruncatedPoly& a);

// Up to `sparsity` random monomials (repeats merge, first draw wins) with
// total degree uniform in [0 or 1, max_degree] and a uniform weak
// composition over the allowed variables; coefficients uniform in [1, p).
// `max_degree` 0 means the ring's max_gen_degree; an empty `variables`
// means all of them.
TruncatedPoly random_sparse_poly(const RingPtr& ring, std::uint32_t sparsity, bool allow_constant,
                                 Rng& rng, std::uint32_t max_degree = 0,
                                 std::span<const std::uint32_t> variables = {});

// Sum of c_i * p_i over a batch, sharing one accumulator.
TruncatedPoly poly_linear_combination(const RingPtr& ring,
                                      std::span<const std::pair<std::uint32_t, const TruncatedPoly*>> items);

}  // namespace conjauth
