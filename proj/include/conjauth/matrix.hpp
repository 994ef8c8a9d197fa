#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "conjauth/endomorphism.hpp"
#include "conjauth/poly.hpp"

namespace conjauth {

// n x n matrix over the truncated polynomial ring, row-major.
class MatrixR {
 public:
  // Zero matrix.
  MatrixR(RingPtr ring, std::uint32_t n);

  static MatrixR identity(RingPtr ring, std::uint32_t n);
  // Throws DimensionMismatch unless entries.size() == n*n, ParameterMismatch
  // when entries disagree on the ring.
  static MatrixR from_entries(RingPtr ring, std::uint32_t n, std::vector<TruncatedPoly> entries);

  const RingPtr& ring() const { return ring_; }
  std::uint32_t n() const { return n_; }
  const TruncatedPoly& at(std::uint32_t i, std::uint32_t j) const { return entries_[i * n_ + j]; }
  TruncatedPoly& at(std::uint32_t i, std::uint32_t j) { return entries_[i * n_ + j]; }
  const std::vector<TruncatedPoly>& entries() const { return entries_; }

  bool is_zero() const;
  // Largest term count over all entries.
  std::size_t max_terms() const;
  std::size_t total_terms() const;
  std::string to_string() const;

  friend bool operator==(const MatrixR& a, const MatrixR& b) {
    return a.n_ == b.n_ && a.entries_ == b.entries_;
  }

 private:
  RingPtr ring_;
  std::uint32_t n_;
  std::vector<TruncatedPoly> entries_;
};

MatrixR mat_add(const MatrixR& a, const MatrixR& b);
MatrixR mat_sub(const MatrixR& a, const MatrixR& b);
MatrixR mat_mul(const MatrixR& a, const MatrixR& b);
MatrixR mat_scalar_mul(std::uint32_t c, const MatrixR& a);
// Naive repeated product; e >= 1.
MatrixR mat_pow(const MatrixR& a, std::uint32_t e);

TruncatedPoly trace(const MatrixR& m);
// trace(a*b) without forming the product.
TruncatedPoly trace_of_product(const MatrixR& a, const MatrixR& b);
// Cofactor expansion; throws UnsupportedDimension for n > 4.
TruncatedPoly determinant(const MatrixR& m);
// The ring is local, so M is invertible iff its matrix of constant terms is
// invertible over Z_p.
bool is_invertible(const MatrixR& m);

MatrixR endo_apply_matrix(const Endomorphism& phi, const MatrixR& m);

// Matrix whose entries are independent random_sparse_poly draws.
MatrixR random_matrix(const RingPtr& ring, std::uint32_t n, std::uint32_t sparsity, bool allow_constant, Rng& rng);

}  // namespace conjauth
