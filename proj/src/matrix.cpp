#include "conjauth/matrix.hpp"

#include <algorithm>
#include <sstream>

#include "conjauth/error.hpp"

namespace conjauth {

namespace {

void require_compatible(const MatrixR& a, const MatrixR& b) {
  if (a.n() != b.n()) throw DimensionMismatch("matrix dimensions differ");
  if (!a.ring()->same_ring(*b.ring())) throw ParameterMismatch("matrices belong to different rings");
}

}  // namespace

MatrixR::MatrixR(RingPtr ring, std::uint32_t n)
    : ring_(std::move(ring)), n_(n), entries_(static_cast<std::size_t>(n) * n, TruncatedPoly(ring_)) {}

MatrixR MatrixR::identity(RingPtr ring, std::uint32_t n) {
  MatrixR out(ring, n);
  for (std::uint32_t i = 0; i < n; ++i) out.at(i, i) = TruncatedPoly::constant(ring, 1);
  return out;
}

MatrixR MatrixR::from_entries(RingPtr ring, std::uint32_t n, std::vector<TruncatedPoly> entries) {
  if (entries.size() != static_cast<std::size_t>(n) * n) throw DimensionMismatch("need n*n entries");
  for (const auto& e : entries) {
    if (!e.ring()->same_ring(*ring)) throw ParameterMismatch("matrix entry belongs to a different ring");
  }
  MatrixR out(std::move(ring), n);
  out.entries_ = std::move(entries);
  return out;
}

bool MatrixR::is_zero() const {
  return std::all_of(entries_.begin(), entries_.end(), [](const auto& e) { return e.is_zero(); });
}

std::size_t MatrixR::max_terms() const {
  std::size_t best = 0;
  for (const auto& e : entries_) best = std::max(best, e.size());
  return best;
}

std::size_t MatrixR::total_terms() const {
  std::size_t total = 0;
  for (const auto& e : entries_) total += e.size();
  return total;
}

std::string MatrixR::to_string() const {
  std::ostringstream out;
  out << '[';
  for (std::uint32_t i = 0; i < n_; ++i) {
    out << (i ? ", [" : "[");
    for (std::uint32_t j = 0; j < n_; ++j) out << (j ? ", " : "") << at(i, j).to_string();
    out << ']';
  }
  out << ']';
  return out.str();
}

MatrixR mat_add(const MatrixR& a, const MatrixR& b) {
  require_compatible(a, b);
  MatrixR out(a.ring(), a.n());
  for (std::uint32_t i = 0; i < a.n(); ++i)
    for (std::uint32_t j = 0; j < a.n(); ++j) out.at(i, j) = poly_add(a.at(i, j), b.at(i, j));
  return out;
}

MatrixR mat_sub(const MatrixR& a, const MatrixR& b) {
  require_compatible(a, b);
  MatrixR out(a.ring(), a.n());
  for (std::uint32_t i = 0; i < a.n(); ++i)
    for (std::uint32_t j = 0; j < a.n(); ++j) out.at(i, j) = poly_sub(a.at(i, j), b.at(i, j));
  return out;
}

MatrixR mat_scalar_mul(std::uint32_t c, const MatrixR& a) {
  MatrixR out(a.ring(), a.n());
  for (std::uint32_t i = 0; i < a.n(); ++i)
    for (std::uint32_t j = 0; j < a.n(); ++j) out.at(i, j) = poly_scalar_mul(c, a.at(i, j));
  return out;
}

MatrixR mat_mul(const MatrixR& a, const MatrixR& b) {
  require_compatible(a, b);
  const std::uint32_t n = a.n();
  MatrixR out(a.ring(), n);
  std::vector<TruncatedPoly> parts;
  std::vector<std::pair<std::uint32_t, const TruncatedPoly*>> items;
  for (std::uint32_t i = 0; i < n; ++i) {
    for (std::uint32_t j = 0; j < n; ++j) {
      parts.clear();
      for (std::uint32_t l = 0; l < n; ++l) {
        if (a.at(i, l).is_zero() || b.at(l, j).is_zero()) continue;
        parts.push_back(poly_mul(a.at(i, l), b.at(l, j)));
      }
      if (parts.empty()) continue;
      if (parts.size() == 1) {
        out.at(i, j) = std::move(parts.front());
        continue;
      }
      items.clear();
      for (const auto& part : parts) items.emplace_back(1, &part);
      out.at(i, j) = poly_linear_combination(a.ring(), items);
    }
  }
  return out;
}

MatrixR mat_pow(const MatrixR& a, std::uint32_t e) {
  if (e < 1) throw InvalidParameter("matrix exponent must be positive");
  MatrixR out = a;
  for (std::uint32_t i = 1; i < e; ++i) out = mat_mul(out, a);
  return out;
}

TruncatedPoly trace(const MatrixR& m) {
  TruncatedPoly sum(m.ring());
  for (std::uint32_t i = 0; i < m.n(); ++i) sum = poly_add(sum, m.at(i, i));
  return sum;
}

TruncatedPoly trace_of_product(const MatrixR& a, const MatrixR& b) {
  require_compatible(a, b);
  std::vector<TruncatedPoly> parts;
  for (std::uint32_t i = 0; i < a.n(); ++i)
    for (std::uint32_t l = 0; l < a.n(); ++l) {
      if (a.at(i, l).is_zero() || b.at(l, i).is_zero()) continue;
      parts.push_back(poly_mul(a.at(i, l), b.at(l, i)));
    }
  std::vector<std::pair<std::uint32_t, const TruncatedPoly*>> items;
  for (const auto& part : parts) items.emplace_back(1, &part);
  return poly_linear_combination(a.ring(), items);
}

namespace {

// Laplace expansion along the first of the remaining rows.
TruncatedPoly minor_det(const MatrixR& m, std::uint32_t row, std::vector<std::uint32_t>& cols) {
  if (cols.size() == 1) return m.at(row, cols[0]);
  TruncatedPoly sum(m.ring());
  for (std::size_t c = 0; c < cols.size(); ++c) {
    const std::uint32_t col = cols[c];
    if (m.at(row, col).is_zero()) continue;
    std::vector<std::uint32_t> rest;
    for (std::size_t d = 0; d < cols.size(); ++d)
      if (d != c) rest.push_back(cols[d]);
    TruncatedPoly term = poly_mul(m.at(row, col), minor_det(m, row + 1, rest));
    sum = (c % 2 == 0) ? poly_add(sum, term) : poly_sub(sum, term);
  }
  return sum;
}

}  // namespace

TruncatedPoly determinant(const MatrixR& m) {
  if (m.n() > 4) throw UnsupportedDimension("determinant supports n <= 4");
  if (m.n() == 0) return TruncatedPoly::constant(m.ring(), 1);
  std::vector<std::uint32_t> cols(m.n());
  for (std::uint32_t j = 0; j < m.n(); ++j) cols[j] = j;
  return minor_det(m, 0, cols);
}

bool is_invertible(const MatrixR& m) {
  std::vector<std::vector<std::uint8_t>> constants(m.n(), std::vector<std::uint8_t>(m.n()));
  for (std::uint32_t i = 0; i < m.n(); ++i)
    for (std::uint32_t j = 0; j < m.n(); ++j) constants[i][j] = m.at(i, j).constant_term();
  return rank_mod_p(std::move(constants), *m.ring()) == m.n();
}

MatrixR endo_apply_matrix(const Endomorphism& phi, const MatrixR& m) {
  if (!phi.ring()->same_ring(*m.ring())) throw ParameterMismatch("endomorphism and matrix rings differ");
  EndoEvaluator evaluator(phi);
  MatrixR out(m.ring(), m.n());
  for (std::uint32_t i = 0; i < m.n(); ++i)
    for (std::uint32_t j = 0; j < m.n(); ++j) out.at(i, j) = evaluator.apply(m.at(i, j));
  return out;
}

MatrixR random_matrix(const RingPtr& ring, std::uint32_t n, std::uint32_t sparsity, bool allow_constant, Rng& rng) {
  MatrixR out(ring, n);
  for (std::uint32_t i = 0; i < n; ++i)
    for (std::uint32_t j = 0; j < n; ++j) out.at(i, j) = random_sparse_poly(ring, sparsity, allow_constant, rng);
  return out;
}

}  // namespace conjauth
