#include "conjauth/endomorphism.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "accumulator.hpp"
#include "conjauth/error.hpp"

namespace conjauth {

Endomorphism::Endomorphism(RingPtr ring, std::vector<TruncatedPoly> images, std::vector<std::uint32_t> omitted)
    : ring_(std::move(ring)), images_(std::move(images)), omitted_(std::move(omitted)) {
  const std::uint32_t k = ring_->k();
  if (images_.size() != k) throw InvalidParameter("endomorphism needs exactly k images");
  if (omitted_.empty() || omitted_.size() >= k) throw InvalidParameter("k0 must satisfy 1 <= k0 < k");
  if (!std::is_sorted(omitted_.begin(), omitted_.end()) ||
      std::adjacent_find(omitted_.begin(), omitted_.end()) != omitted_.end() || omitted_.back() >= k) {
    throw InvalidParameter("omitted variables must be distinct, ascending and below k");
  }
  for (const auto& f : images_) {
    if (!f.ring()->same_ring(*ring_)) throw ParameterMismatch("image lives in a different ring");
    if (f.constant_term() != 0) throw InvalidParameter("endomorphism image has a nonzero constant term");
    for (MonoKey key : f.keys()) {
      for (std::uint32_t v : omitted_) {
        if (ring_->exponent(key, v) != 0) {
          throw InvalidParameter("endomorphism image mentions omitted variable x" + std::to_string(v + 1));
        }
      }
    }
  }
}

std::vector<std::uint32_t> Endomorphism::kept_variables() const {
  std::vector<std::uint32_t> kept;
  for (std::uint32_t v = 0; v < ring_->k(); ++v) {
    if (!std::binary_search(omitted_.begin(), omitted_.end(), v)) kept.push_back(v);
  }
  return kept;
}

Endomorphism endo_generate(const RingPtr& ring, std::uint32_t k0, std::uint32_t sparsity, Rng& rng,
                           std::uint32_t image_degree) {
  const std::uint32_t k = ring->k();
  if (k0 < 1 || k0 >= k) throw InvalidParameter("k0 must satisfy 1 <= k0 < k");
  image_degree = std::max<std::uint32_t>(1, std::min(image_degree, ring->N() - 1));
  auto omitted = rng.subset(k, k0);
  std::vector<std::uint32_t> kept;
  for (std::uint32_t v = 0; v < k; ++v) {
    if (!std::binary_search(omitted.begin(), omitted.end(), v)) kept.push_back(v);
  }
  std::vector<TruncatedPoly> images;
  images.reserve(k);
  for (std::uint32_t j = 0; j < k; ++j) {
    images.push_back(random_sparse_poly(ring, sparsity, false, rng, image_degree, kept));
  }
  return Endomorphism(ring, std::move(images), std::move(omitted));
}

EndoEvaluator::EndoEvaluator(const Endomorphism& phi)
    : phi_(phi),
      ring_(*phi.ring()),
      out_index_(std::make_unique<detail::CompactIndex>(ring_, phi.kept_variables())) {
  const std::uint32_t k = ring_.k();
  const std::uint32_t N = ring_.N();
  min_degree_.resize(k);
  for (std::uint32_t v = 0; v < k; ++v) {
    const auto& f = phi.images()[v];
    min_degree_[v] = f.is_zero() ? N : f.min_degree();
  }
  leaf_vars_ = std::min<std::uint32_t>(k, ring_.digit_bits() * 2 <= 16 ? 2 : 1);
  leaf_start_ = k - leaf_vars_;
  leaf_table_.resize(std::size_t{1} << (ring_.digit_bits() * leaf_vars_));

  dense_ = ring_.digit_bits() * out_index_->vars().size() <= 18;
  if (dense_) {
    const auto cells = static_cast<std::uint32_t>(out_index_->cells());
    std::vector<std::vector<std::uint32_t>> by_degree(N);
    for (std::uint32_t cell = 0; cell < cells; ++cell) {
      const std::uint32_t d = out_index_->degree(cell);
      if (d < N) by_degree[d].push_back(cell);
    }
    degree_start_.assign(N + 1, 0);
    for (std::uint32_t d = 0; d < N; ++d) {
      degree_start_[d + 1] = degree_start_[d] + by_degree[d].size();
      cells_by_degree_.insert(cells_by_degree_.end(), by_degree[d].begin(), by_degree[d].end());
    }
    image_terms_.resize(k);
    for (std::uint32_t v = 0; v < k; ++v) {
      const auto& f = phi.images()[v];
      for (std::size_t i = 0; i < f.size(); ++i) {
        image_terms_[v].push_back({out_index_->index(f.keys()[i]), ring_.degree(f.keys()[i]), f.coeffs()[i]});
      }
    }
  }
}

EndoEvaluator::~EndoEvaluator() = default;

std::uint32_t EndoEvaluator::exponent(std::size_t term, std::uint32_t var) const {
  return ring_.exponent(lex_[term], var);
}

const EndoEvaluator::LeafProduct& EndoEvaluator::leaf_product(std::uint32_t idx) {
  if (leaf_table_[idx]) return *leaf_table_[idx];
  const std::uint32_t bits = ring_.digit_bits();
  const std::uint32_t mask = (1U << bits) - 1;
  auto product = std::make_unique<LeafProduct>(LeafProduct{TruncatedPoly(phi_.ring()), {}, {}, {}});
  if (idx == 0) {
    product->poly = TruncatedPoly::constant(phi_.ring(), 1);
  } else {
    // Peel one power of the last variable with a nonzero exponent.
    std::uint32_t shift = 0;
    std::uint32_t var = ring_.k() - 1;
    while (((idx >> shift) & mask) == 0) {
      shift += bits;
      --var;
    }
    const LeafProduct& prev = leaf_product(idx - (1U << shift));
    product->poly = poly_mul(prev.poly, phi_.images()[var]);
  }
  const auto& poly = product->poly;
  if (out_index_->fits()) {
    product->index.resize(poly.size());
    for (std::size_t i = 0; i < poly.size(); ++i) product->index[i] = out_index_->index(poly.keys()[i]);
  }
  product->degree.resize(poly.size());
  for (std::size_t i = 0; i < poly.size(); ++i) {
    product->degree[i] = static_cast<std::uint16_t>(ring_.degree(poly.keys()[i]));
  }
  product->coeff.assign(poly.coeffs().begin(), poly.coeffs().end());
  leaf_table_[idx] = std::move(product);
  return *leaf_table_[idx];
}

void EndoEvaluator::sort_input(const TruncatedPoly& a) {
  const std::size_t n = a.size();
  lex_.resize(n);
  coeff_.assign(a.coeffs().begin(), a.coeffs().end());
  for (std::size_t i = 0; i < n; ++i) lex_[i] = ring_.lex_part(a.keys()[i]);
  const std::uint32_t width = ring_.k() * ring_.digit_bits();
  constexpr std::uint32_t kDigit = 11;
  if (n < 256 || width > 4 * kDigit) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return lex_[x] < lex_[y]; });
    std::vector<MonoKey> keys(n);
    std::vector<std::uint8_t> coeffs(n);
    for (std::size_t i = 0; i < n; ++i) {
      keys[i] = lex_[order[i]];
      coeffs[i] = coeff_[order[i]];
    }
    lex_.swap(keys);
    coeff_.swap(coeffs);
    return;
  }
  // LSD radix sort on the lexicographic key.
  std::vector<MonoKey> keys(n);
  std::vector<std::uint8_t> coeffs(n);
  std::vector<std::size_t> count((1U << kDigit) + 1);
  for (std::uint32_t shift = 0; shift < width; shift += kDigit) {
    std::fill(count.begin(), count.end(), 0);
    const auto digit = [&](MonoKey key) { return static_cast<std::uint32_t>(key >> shift) & ((1U << kDigit) - 1); };
    for (std::size_t i = 0; i < n; ++i) ++count[digit(lex_[i]) + 1];
    for (std::size_t d = 1; d < count.size(); ++d) count[d] += count[d - 1];
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t at = count[digit(lex_[i])]++;
      keys[at] = lex_[i];
      coeffs[at] = coeff_[i];
    }
    lex_.swap(keys);
    coeff_.swap(coeffs);
  }
}

TruncatedPoly EndoEvaluator::apply(const TruncatedPoly& a) {
  if (!phi_.ring()->same_ring(*a.ring())) throw ParameterMismatch("endomorphism and polynomial rings differ");
  if (a.is_zero()) return a;
  if (a.size() == 1 && a.keys()[0] == 0) return a;
  sort_input(a);
  const std::uint32_t N = ring_.N();
  if (!dense_) return eval(0, lex_.size(), 0, N);

  Buffer out = acquire();
  eval_dense(0, lex_.size(), 0, N, out);
  std::vector<MonoKey> keys;
  std::vector<std::uint8_t> coeffs;
  for (std::uint32_t cell : cells_by_degree_) {
    if (out[cell] == 0) continue;
    keys.push_back(out_index_->key(cell));
    coeffs.push_back(static_cast<std::uint8_t>(out[cell]));
  }
  clear_below(out, N);
  release(std::move(out));
  return TruncatedPoly::from_canonical(phi_.ring(), std::move(keys), std::move(coeffs));
}

EndoEvaluator::Buffer EndoEvaluator::acquire() {
  if (spare_.empty()) return Buffer(out_index_->cells(), 0);
  Buffer buf = std::move(spare_.back());
  spare_.pop_back();
  return buf;
}

// Buffers are returned with every cell zero.
void EndoEvaluator::release(Buffer buf) { spare_.push_back(std::move(buf)); }

void EndoEvaluator::clear_below(Buffer& buf, std::uint32_t limit) const {
  const std::size_t end = degree_start_[std::min(limit, ring_.N())];
  for (std::size_t i = 0; i < end; ++i) buf[cells_by_degree_[i]] = 0;
}

void EndoEvaluator::reduce_below(Buffer& buf, std::uint32_t limit) const {
  const std::uint32_t p = ring_.modulus();
  const std::size_t end = degree_start_[std::min(limit, ring_.N())];
  for (std::size_t i = 0; i < end; ++i) {
    std::uint32_t& cell = buf[cells_by_degree_[i]];
    if (cell >= p) cell %= p;
  }
}

void EndoEvaluator::eval_dense(std::size_t lo, std::size_t hi, std::uint32_t var, std::uint32_t budget,
                               Buffer& out) {
  if (budget == 0 || lo == hi) return;
  if (var == leaf_start_) {
    const std::uint32_t bits = ring_.digit_bits();
    const MonoKey leaf_mask = (MonoKey{1} << (bits * leaf_vars_)) - 1;
    std::size_t pending = 0;
    for (std::size_t t = lo; t < hi; ++t) {
      const LeafProduct& q = leaf_product(static_cast<std::uint32_t>(lex_[t] & leaf_mask));
      const std::uint8_t* row = ring_.mul_row(coeff_[t]);
      const std::size_t n = q.coeff.size();
      for (std::size_t i = 0; i < n && q.degree[i] < budget; ++i) out[q.index[i]] += row[q.coeff[i]];
      // Keep cells far from overflow.
      if (++pending == (std::size_t{1} << 23)) {
        reduce_below(out, budget);
        pending = 0;
      }
    }
    reduce_below(out, budget);
    return;
  }

  struct Group {
    std::uint32_t exponent;
    std::size_t from;
    std::size_t to;
  };
  std::vector<Group> groups;
  for (std::size_t i = lo; i < hi;) {
    const std::uint32_t e = exponent(i, var);
    std::size_t j = i;
    while (j < hi && exponent(j, var) == e) ++j;
    groups.push_back({e, i, j});
    i = j;
  }

  const std::uint32_t p = ring_.modulus();
  const std::uint64_t step = min_degree_[var];
  const auto& f = image_terms_[var];
  Buffer& acc = out;  // zero on entry
  Buffer scratch = acquire();
  bool acc_nonzero = false;
  std::uint32_t acc_limit = 0;  // acc is zero at degree >= acc_limit
  std::size_t g = groups.size();
  for (auto e = static_cast<std::int64_t>(groups.back().exponent); e >= 0; --e) {
    const std::uint64_t drop = step * static_cast<std::uint64_t>(e);
    const std::uint32_t limit = drop >= budget ? 0 : budget - static_cast<std::uint32_t>(drop);
    if (limit == 0) {
      while (g > 0 && groups[g - 1].exponent >= e) --g;
      continue;
    }
    if (acc_nonzero) {
      // scratch = acc * f below limit, then swap into acc.
      const std::size_t end = degree_start_[std::min(acc_limit, limit)];
      for (std::size_t i = 0; i < end; ++i) {
        const std::uint32_t cell = cells_by_degree_[i];
        const std::uint32_t value = acc[cell];
        if (value == 0) continue;
        const std::uint32_t d = out_index_->degree(cell);
        const std::uint8_t* row = ring_.mul_row(value);
        for (const auto& term : f) {
          if (d + term.degree < limit) scratch[cell + term.index] += row[term.coeff];
        }
      }
      clear_below(acc, acc_limit);
      std::swap(acc, scratch);
      reduce_below(acc, limit);
      acc_limit = limit;
    }
    if (g > 0 && groups[g - 1].exponent == static_cast<std::uint32_t>(e)) {
      --g;
      Buffer inner = acquire();
      eval_dense(groups[g].from, groups[g].to, var + 1, limit, inner);
      const std::size_t end = degree_start_[limit];
      for (std::size_t i = 0; i < end; ++i) {
        const std::uint32_t cell = cells_by_degree_[i];
        if (inner[cell] == 0) continue;
        const std::uint32_t sum = acc[cell] + inner[cell];
        acc[cell] = sum >= p ? sum - p : sum;
        inner[cell] = 0;
      }
      release(std::move(inner));
      acc_nonzero = true;
      acc_limit = std::max(acc_limit, limit);
    }
  }
  release(std::move(scratch));
}

TruncatedPoly EndoEvaluator::eval_leaves(std::size_t lo, std::size_t hi, std::uint32_t budget) {
  const std::uint32_t bits = ring_.digit_bits();
  const MonoKey leaf_mask = (MonoKey{1} << (bits * leaf_vars_)) - 1;
  detail::HashAccumulator acc(4 * (hi - lo));
  acc.set_modulus(ring_.modulus());
  for (std::size_t t = lo; t < hi; ++t) {
    const LeafProduct& q = leaf_product(static_cast<std::uint32_t>(lex_[t] & leaf_mask));
    const std::uint8_t* row = ring_.mul_row(coeff_[t]);
    for (std::size_t i = 0; i < q.coeff.size() && q.degree[i] < budget; ++i) {
      acc.add(q.poly.keys()[i], row[q.coeff[i]]);
    }
  }
  return acc.finish(phi_.ring());
}

TruncatedPoly EndoEvaluator::eval(std::size_t lo, std::size_t hi, std::uint32_t var, std::uint32_t budget) {
  if (budget == 0 || lo == hi) return TruncatedPoly(phi_.ring());
  if (var == leaf_start_) return eval_leaves(lo, hi, budget);
  const TruncatedPoly& f = phi_.images()[var];
  const std::uint64_t step = min_degree_[var];

  struct Group {
    std::uint32_t exponent;
    std::size_t from;
    std::size_t to;
  };
  std::vector<Group> groups;
  for (std::size_t i = lo; i < hi;) {
    const std::uint32_t e = exponent(i, var);
    std::size_t j = i;
    while (j < hi && exponent(j, var) == e) ++j;
    groups.push_back({e, i, j});
    i = j;
  }
  // Horner in f from the top exponent down. acc_e only matters below
  // budget - e*mindeg(f) because it is later multiplied by f^e.
  TruncatedPoly acc(phi_.ring());
  std::size_t g = groups.size();
  for (auto e = static_cast<std::int64_t>(groups.back().exponent); e >= 0; --e) {
    const std::uint64_t drop = step * static_cast<std::uint64_t>(e);
    const std::uint32_t limit = drop >= budget ? 0 : budget - static_cast<std::uint32_t>(drop);
    if (limit == 0) {
      while (g > 0 && groups[g - 1].exponent >= e) --g;
      continue;
    }
    if (!acc.is_zero()) acc = detail::mul_truncated(acc, f, limit);
    if (g > 0 && groups[g - 1].exponent == static_cast<std::uint32_t>(e)) {
      --g;
      TruncatedPoly inner = eval(groups[g].from, groups[g].to, var + 1, limit);
      acc = acc.is_zero() ? std::move(inner) : poly_add(acc, inner);
    }
  }
  return acc;
}

TruncatedPoly endo_apply_poly(const Endomorphism& phi, const TruncatedPoly& a) {
  EndoEvaluator evaluator(phi);
  return evaluator.apply(a);
}

std::vector<std::vector<std::uint8_t>> endo_linear_part(const Endomorphism& phi) {
  const Ring& ring = *phi.ring();
  const std::uint32_t k = ring.k();
  std::vector<std::vector<std::uint8_t>> rows(k, std::vector<std::uint8_t>(k, 0));
  std::vector<std::uint32_t> exps(k, 0);
  for (std::uint32_t j = 0; j < k; ++j) {
    for (std::uint32_t v = 0; v < k; ++v) {
      if (ring.N() < 2) continue;
      exps[v] = 1;
      rows[j][v] = phi.images()[j].coeff(ring.pack(exps));
      exps[v] = 0;
    }
  }
  return rows;
}

std::size_t rank_mod_p(std::vector<std::vector<std::uint8_t>> rows, const Ring& ring) {
  std::size_t rank = 0;
  const std::size_t cols = rows.empty() ? 0 : rows.front().size();
  for (std::size_t c = 0; c < cols && rank < rows.size(); ++c) {
    std::size_t pivot = rank;
    while (pivot < rows.size() && rows[pivot][c] == 0) ++pivot;
    if (pivot == rows.size()) continue;
    std::swap(rows[pivot], rows[rank]);
    const std::uint8_t inv = ring.inv(rows[rank][c]);
    for (auto& x : rows[rank]) x = ring.mul(x, inv);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (r == rank || rows[r][c] == 0) continue;
      const std::uint8_t factor = rows[r][c];
      for (std::size_t cc = 0; cc < cols; ++cc) rows[r][cc] = ring.sub(rows[r][cc], ring.mul(factor, rows[rank][cc]));
    }
    ++rank;
  }
  return rank;
}

}  // namespace conjauth
