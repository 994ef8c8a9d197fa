#include "conjauth/key.hpp"

#include <algorithm>
#include <cmath>

#include "conjauth/error.hpp"

namespace conjauth {

FactoredInvertible::FactoredInvertible(RingPtr ring, std::uint32_t n, std::vector<ElementaryFactor> factors)
    : ring_(std::move(ring)), n_(n), factors_(std::move(factors)) {
  if (factors_.empty()) throw InvalidParameter("a factored key needs at least one factor");
  for (const auto& f : factors_) {
    if (f.i == f.j || f.i >= n_ || f.j >= n_) throw InvalidParameter("elementary factor needs distinct indices < n");
    if (f.u.is_zero()) throw InvalidParameter("elementary factor entry must be nonzero");
    if (!f.u.ring()->same_ring(*ring_)) throw ParameterMismatch("elementary factor belongs to a different ring");
  }
}

namespace {

// col j += c * u * col i
void add_column_multiple(MatrixR& m, std::uint32_t i, std::uint32_t j, std::uint32_t c, const TruncatedPoly& u) {
  for (std::uint32_t r = 0; r < m.n(); ++r) {
    if (m.at(r, i).is_zero()) continue;
    m.at(r, j) = poly_axpy(m.at(r, j), c, poly_mul(u, m.at(r, i)));
  }
}

// row i += c * u * row j
void add_row_multiple(MatrixR& m, std::uint32_t i, std::uint32_t j, std::uint32_t c, const TruncatedPoly& u) {
  for (std::uint32_t col = 0; col < m.n(); ++col) {
    if (m.at(j, col).is_zero()) continue;
    m.at(i, col) = poly_axpy(m.at(i, col), c, poly_mul(u, m.at(j, col)));
  }
}

}  // namespace

MatrixR FactoredInvertible::expand() const {
  MatrixR out = MatrixR::identity(ring_, n_);
  for (const auto& f : factors_) add_column_multiple(out, f.i, f.j, 1, f.u);
  return out;
}

MatrixR FactoredInvertible::expand_inverse() const {
  MatrixR out = MatrixR::identity(ring_, n_);
  const std::uint32_t minus_one = ring_->modulus() - 1;
  for (auto it = factors_.rbegin(); it != factors_.rend(); ++it) add_column_multiple(out, it->i, it->j, minus_one, it->u);
  return out;
}

FactoredInvertible gen_private_key(const RingPtr& ring, std::uint32_t n, std::uint32_t m, std::uint32_t sparsity,
                                   Rng& rng) {
  if (n < 2) throw InvalidParameter("elementary factors need n >= 2");
  if (m < 1) throw InvalidParameter("a factored key needs at least one factor");
  std::vector<ElementaryFactor> factors;
  factors.reserve(m);
  for (std::uint32_t t = 0; t < m; ++t) {
    const auto i = static_cast<std::uint32_t>(rng.below(n));
    auto j = static_cast<std::uint32_t>(rng.below(n - 1));
    if (j >= i) ++j;
    factors.push_back({i, j, random_sparse_poly(ring, sparsity, true, rng)});
  }
  return FactoredInvertible(ring, n, std::move(factors));
}

MatrixR conjugate(std::span<const ElementaryFactor> factors, const MatrixR& a) {
  MatrixR out = a;
  const std::uint32_t minus_one = a.ring()->modulus() - 1;
  for (const auto& f : factors) {
    if (f.i >= a.n() || f.j >= a.n()) throw DimensionMismatch("factor index exceeds matrix dimension");
    if (!f.u.ring()->same_ring(*a.ring())) throw ParameterMismatch("key and matrix rings differ");
    // E_ij(-u) on the left, E_ij(u) on the right.
    add_row_multiple(out, f.i, f.j, minus_one, f.u);
    add_column_multiple(out, f.i, f.j, 1, f.u);
  }
  return out;
}

MatrixR conjugate(const FactoredInvertible& key, const MatrixR& a) {
  if (key.n() != a.n()) throw DimensionMismatch("key and matrix dimensions differ");
  return conjugate(key.factors(), a);
}

std::vector<ElementaryFactor> endo_apply_factors(const Endomorphism& phi, const FactoredInvertible& key) {
  EndoEvaluator evaluator(phi);
  std::vector<ElementaryFactor> out;
  out.reserve(key.m());
  for (const auto& f : key.factors()) {
    TruncatedPoly image = evaluator.apply(f.u);
    if (!image.is_zero()) out.push_back({f.i, f.j, std::move(image)});
  }
  return out;
}

Word Word::parse(const std::string& text) {
  std::vector<Letter> letters;
  letters.reserve(text.size());
  for (char ch : text) {
    if (ch == 'x' || ch == 'X') {
      letters.push_back(Letter::X);
    } else if (ch == 'y' || ch == 'Y') {
      letters.push_back(Letter::Y);
    } else {
      throw InvalidParameter(std::string("word letters must be x or y, got '") + ch + "'");
    }
  }
  return Word(std::move(letters));
}

std::size_t Word::count(Letter letter) const {
  return static_cast<std::size_t>(std::count(letters_.begin(), letters_.end(), letter));
}

bool Word::is_valid() const { return letters_.size() >= 2 && count(Letter::X) > 0 && count(Letter::Y) > 0; }

std::string Word::to_string() const {
  std::string out;
  for (Letter l : letters_) out += (l == Letter::X ? 'x' : 'y');
  return out;
}

Word random_word(std::uint32_t length, Rng& rng) {
  if (length < 2) throw InvalidParameter("word length must be at least 2");
  while (true) {
    std::vector<Letter> letters(length);
    for (auto& l : letters) l = (rng.next() >> 63) ? Letter::Y : Letter::X;
    Word w(std::move(letters));
    if (w.is_valid()) return w;
  }
}

MatrixR evaluate_word(const Word& w, const MatrixR& mx, const MatrixR& my) {
  if (w.size() == 0) throw InvalidParameter("cannot evaluate an empty word");
  if (mx.n() != my.n()) throw DimensionMismatch("word operands differ in dimension");
  auto pick = [&](Letter l) -> const MatrixR& { return l == Letter::X ? mx : my; };
  MatrixR out = pick(w.letters()[0]);
  for (std::size_t t = 1; t < w.size(); ++t) out = mat_mul(out, pick(w.letters()[t]));
  return out;
}

TruncatedPoly evaluate_word_trace(const Word& w, const MatrixR& mx, const MatrixR& my) {
  if (w.size() == 0) throw InvalidParameter("cannot evaluate an empty word");
  if (mx.n() != my.n()) throw DimensionMismatch("word operands differ in dimension");
  auto pick = [&](Letter l) -> const MatrixR& { return l == Letter::X ? mx : my; };
  if (w.size() == 1) return trace(pick(w.letters()[0]));
  MatrixR prefix = pick(w.letters()[0]);
  for (std::size_t t = 1; t + 1 < w.size(); ++t) prefix = mat_mul(prefix, pick(w.letters()[t]));
  return trace_of_product(prefix, pick(w.letters().back()));
}

std::size_t longest_matching_chain(std::span<const ElementaryFactor> factors) {
  std::uint32_t n = 0;
  for (const auto& f : factors) n = std::max({n, f.i + 1, f.j + 1});
  // ending[c]: longest chain so far whose last factor has column index c.
  std::vector<std::size_t> ending(n, 0);
  std::size_t best = 0;
  for (const auto& f : factors) {
    const std::size_t len = ending[f.i] + 1;
    ending[f.j] = std::max(ending[f.j], len);
    best = std::max(best, len);
  }
  return best;
}

SparsityReport measure_sparsity_growth(const RingPtr& ring, std::uint32_t n, std::uint32_t m, std::uint32_t sparsity,
                                       std::uint32_t trials, Rng& rng) {
  if (trials < 1) throw InvalidParameter("trials must be positive");
  SparsityReport report;
  report.n = n;
  report.m = m;
  report.sparsity = sparsity;
  double sum_terms = 0;
  double sum_chain = 0;
  for (std::uint32_t t = 0; t < trials; ++t) {
    const FactoredInvertible key = gen_private_key(ring, n, m, sparsity, rng);
    SparsityTrial trial;
    trial.m = m;
    trial.max_terms = key.expand().max_terms();
    trial.longest_chain = longest_matching_chain(key.factors());
    report.max_terms = std::max(report.max_terms, trial.max_terms);
    sum_terms += static_cast<double>(trial.max_terms);
    sum_chain += static_cast<double>(trial.longest_chain);
    report.trials.push_back(trial);
  }
  report.mean_max_terms = sum_terms / trials;
  report.mean_longest_chain = sum_chain / trials;
  const double d = static_cast<double>(sparsity) * sparsity;
  report.model_terms = std::pow(d, static_cast<double>(m) / n);
  // C(N-1+k, k) monomials of degree < N.
  double cap = 1;
  for (std::uint32_t i = 1; i <= ring->k(); ++i) cap = cap * (ring->N() - 1 + i) / i;
  report.monomial_cap = cap;
  return report;
}

}  // namespace conjauth
