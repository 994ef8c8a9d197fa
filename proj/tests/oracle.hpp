#pragma once

// Naive reference arithmetic used as a test oracle. Polynomials are ordered
// maps from exponent vectors to coefficients, multiplied term by term with
// no packing, grids or Horner schemes.

#include <cstdint>
#include <map>
#include <vector>

#include "conjauth/key.hpp"

namespace oracle {

using Exps = std::vector<std::uint32_t>;

struct Poly {
  std::uint32_t p = 11;
  std::uint32_t k = 1;
  std::uint32_t N = 1;
  std::map<Exps, std::uint32_t> terms;

  static Poly zero(std::uint32_t p, std::uint32_t k, std::uint32_t N) { return {p, k, N, {}}; }
  static Poly constant(std::uint32_t p, std::uint32_t k, std::uint32_t N, std::uint32_t c) {
    Poly out = zero(p, k, N);
    out.add_term(Exps(k, 0), c);
    return out;
  }

  void add_term(const Exps& e, std::uint64_t c) {
    std::uint32_t deg = 0;
    for (auto x : e) deg += x;
    if (deg >= N) return;
    const auto v = static_cast<std::uint32_t>((terms[e] + c) % p);
    if (v == 0) terms.erase(e);
    else terms[e] = v;
  }
};

inline Poly from(const conjauth::TruncatedPoly& a) {
  const auto& ring = *a.ring();
  Poly out = Poly::zero(ring.modulus(), ring.k(), ring.N());
  for (std::size_t t = 0; t < a.size(); ++t) out.add_term(ring.unpack(a.keys()[t]), a.coeffs()[t]);
  return out;
}

inline conjauth::TruncatedPoly to(const conjauth::RingPtr& ring, const Poly& a) {
  std::vector<std::pair<conjauth::MonoKey, std::uint32_t>> terms;
  for (const auto& [e, c] : a.terms) terms.emplace_back(ring->pack(e), c);
  return conjauth::TruncatedPoly::from_terms(ring, std::move(terms));
}

inline Poly add(const Poly& a, const Poly& b) {
  Poly out = a;
  for (const auto& [e, c] : b.terms) out.add_term(e, c);
  return out;
}

inline Poly scale(const Poly& a, std::uint32_t c) {
  Poly out = Poly::zero(a.p, a.k, a.N);
  for (const auto& [e, v] : a.terms) out.add_term(e, std::uint64_t{v} * c);
  return out;
}

inline Poly mul(const Poly& a, const Poly& b) {
  Poly out = Poly::zero(a.p, a.k, a.N);
  for (const auto& [ea, ca] : a.terms) {
    for (const auto& [eb, cb] : b.terms) {
      Exps e(a.k);
      for (std::uint32_t i = 0; i < a.k; ++i) e[i] = ea[i] + eb[i];
      out.add_term(e, std::uint64_t{ca} * cb);
    }
  }
  return out;
}

inline Poly power(const Poly& a, std::uint32_t e) {
  Poly out = Poly::constant(a.p, a.k, a.N, 1);
  for (std::uint32_t i = 0; i < e; ++i) out = mul(out, a);
  return out;
}

// Substitutes x_j -> images[j] monomial by monomial.
inline Poly substitute(const Poly& a, const std::vector<Poly>& images) {
  Poly out = Poly::zero(a.p, a.k, a.N);
  for (const auto& [e, c] : a.terms) {
    Poly term = Poly::constant(a.p, a.k, a.N, c);
    for (std::uint32_t j = 0; j < a.k; ++j) term = mul(term, power(images[j], e[j]));
    out = add(out, term);
  }
  return out;
}

using Matrix = std::vector<std::vector<Poly>>;

inline Matrix from(const conjauth::MatrixR& m) {
  Matrix out(m.n(), std::vector<Poly>(m.n()));
  for (std::uint32_t i = 0; i < m.n(); ++i)
    for (std::uint32_t j = 0; j < m.n(); ++j) out[i][j] = from(m.at(i, j));
  return out;
}

inline conjauth::MatrixR to(const conjauth::RingPtr& ring, const Matrix& m) {
  const auto n = static_cast<std::uint32_t>(m.size());
  conjauth::MatrixR out(ring, n);
  for (std::uint32_t i = 0; i < n; ++i)
    for (std::uint32_t j = 0; j < n; ++j) out.at(i, j) = to(ring, m[i][j]);
  return out;
}

inline Matrix mul(const Matrix& a, const Matrix& b) {
  const std::size_t n = a.size();
  const Poly& z = a[0][0];
  Matrix out(n, std::vector<Poly>(n, Poly::zero(z.p, z.k, z.N)));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t s = 0; s < n; ++s) out[i][j] = add(out[i][j], mul(a[i][s], b[s][j]));
  return out;
}

inline Matrix identity(std::size_t n, std::uint32_t p, std::uint32_t k, std::uint32_t N) {
  Matrix out(n, std::vector<Poly>(n, Poly::zero(p, k, N)));
  for (std::size_t i = 0; i < n; ++i) out[i][i] = Poly::constant(p, k, N, 1);
  return out;
}

// Explicit product of elementary matrices, and of their inverses reversed.
inline Matrix expand(const conjauth::FactoredInvertible& key, bool inverse) {
  const auto& ring = *key.ring();
  Matrix out = identity(key.n(), ring.modulus(), ring.k(), ring.N());
  const auto& fs = key.factors();
  for (std::size_t t = 0; t < fs.size(); ++t) {
    const auto& f = inverse ? fs[fs.size() - 1 - t] : fs[t];
    Matrix e = identity(key.n(), ring.modulus(), ring.k(), ring.N());
    e[f.i][f.j] = inverse ? scale(from(f.u), ring.modulus() - 1) : from(f.u);
    out = mul(out, e);
  }
  return out;
}

}  // namespace oracle
