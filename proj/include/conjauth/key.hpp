#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "conjauth/matrix.hpp"

namespace conjauth {

// E_ij(u): the identity plus u at (i, j), i != j. Indices are zero-based.
struct ElementaryFactor {
  std::uint32_t i = 0;
  std::uint32_t j = 1;
  TruncatedPoly u;

  friend bool operator==(const ElementaryFactor&, const ElementaryFactor&) = default;
};

// X = E_1 * E_2 * ... * E_m kept in factored form; X^-1 is the reversed
// product with every u negated.
class FactoredInvertible {
 public:
  // Throws InvalidParameter for an empty list, i == j, an index >= n, or a
  // zero u.
  FactoredInvertible(RingPtr ring, std::uint32_t n, std::vector<ElementaryFactor> factors);

  const RingPtr& ring() const { return ring_; }
  std::uint32_t n() const { return n_; }
  std::size_t m() const { return factors_.size(); }
  const std::vector<ElementaryFactor>& factors() const { return factors_; }

  MatrixR expand() const;
  MatrixR expand_inverse() const;

  friend bool operator==(const FactoredInvertible& a, const FactoredInvertible& b) {
    return a.n_ == b.n_ && a.factors_ == b.factors_;
  }

 private:
  RingPtr ring_;
  std::uint32_t n_;
  std::vector<ElementaryFactor> factors_;
};

// m factors, each with (i, j) uniform over ordered pairs with i != j and u a
// sparse polynomial that may carry a constant term.
FactoredInvertible gen_private_key(const RingPtr& ring, std::uint32_t n, std::uint32_t m, std::uint32_t sparsity,
                                   Rng& rng);

// X^-1 * A * X by row and column operations, one pair per factor.
MatrixR conjugate(const FactoredInvertible& key, const MatrixR& a);
MatrixR conjugate(std::span<const ElementaryFactor> factors, const MatrixR& a);

// phi applied factor by factor: phi(E_ij(u)) = E_ij(phi(u)). Factors whose
// image vanishes are the identity and are dropped.
std::vector<ElementaryFactor> endo_apply_factors(const Endomorphism& phi, const FactoredInvertible& key);

enum class Letter : std::uint8_t { X = 0, Y = 1 };

// Positive word in two letters. Valid words have length >= 2 and use both
// letters.
class Word {
 public:
  Word() = default;
  explicit Word(std::vector<Letter> letters) : letters_(std::move(letters)) {}
  // Parses "xyyx"; throws InvalidParameter on other characters.
  static Word parse(const std::string& text);

  const std::vector<Letter>& letters() const { return letters_; }
  std::size_t size() const { return letters_.size(); }
  std::size_t count(Letter letter) const;
  bool is_valid() const;
  std::string to_string() const;

  friend bool operator==(const Word&, const Word&) = default;

 private:
  std::vector<Letter> letters_;
};

// Uniform over length-L words containing both letters. Throws
// InvalidParameter for L < 2.
Word random_word(std::uint32_t length, Rng& rng);

// Left-to-right product, Mx for each X and My for each Y. Throws
// InvalidParameter for an empty word.
MatrixR evaluate_word(const Word& w, const MatrixR& mx, const MatrixR& my);
// trace(evaluate_word(w, mx, my)) with the final product skipped.
TruncatedPoly evaluate_word_trace(const Word& w, const MatrixR& mx, const MatrixR& my);

struct SparsityTrial {
  std::uint32_t m = 0;
  std::size_t max_terms = 0;
  std::size_t longest_chain = 0;
};

struct SparsityReport {
  std::uint32_t n = 0;
  std::uint32_t m = 0;
  std::uint32_t sparsity = 0;
  std::vector<SparsityTrial> trials;
  std::size_t max_terms = 0;
  double mean_max_terms = 0;
  double mean_longest_chain = 0;
  // d^(m/n) with d = sparsity^2.
  double model_terms = 0;
  // Number of monomials of degree < N; no entry can exceed it.
  double monomial_cap = 0;
};

// Longest subsequence of factors E_{a b}, E_{b c}, E_{c d}, ... in product
// order.
std::size_t longest_matching_chain(std::span<const ElementaryFactor> factors);

SparsityReport measure_sparsity_growth(const RingPtr& ring, std::uint32_t n, std::uint32_t m, std::uint32_t sparsity,
                                       std::uint32_t trials, Rng& rng);

}  // namespace conjauth
