#include "conjauth/poly.hpp"

#include <algorithm>
#include <bit>
#include <sstream>

#include "accumulator.hpp"
#include "conjauth/error.hpp"

namespace conjauth {

namespace detail {

std::vector<std::uint32_t> active_variables(const Ring& ring, std::initializer_list<std::span<const MonoKey>> lists) {
  MonoKey seen = 0;
  for (auto list : lists)
    for (MonoKey key : list) seen |= key;
  std::vector<std::uint32_t> vars;
  for (std::uint32_t v = 0; v < ring.k(); ++v) {
    if (ring.exponent(seen, v) != 0) vars.push_back(v);
  }
  return vars;
}

CompactIndex::CompactIndex(const Ring& ring, std::vector<std::uint32_t> vars)
    : ring_(ring), vars_(std::move(vars)), bits_(ring.digit_bits()) {}

std::uint32_t CompactIndex::degree(std::uint32_t index) const {
  const std::uint32_t mask = (1U << bits_) - 1;
  std::uint32_t total = 0;
  for (std::size_t t = 0; t < vars_.size(); ++t) total += (index >> (bits_ * t)) & mask;
  return total;
}

MonoKey CompactIndex::key(std::uint32_t index) const {
  const std::uint32_t mask = (1U << bits_) - 1;
  MonoKey key = 0;
  std::uint32_t total = 0;
  for (std::size_t t = vars_.size(); t-- > 0;) {
    const std::uint32_t e = index & mask;
    index >>= bits_;
    total += e;
    key |= MonoKey{e} << ((ring_.k() - 1 - vars_[t]) * bits_);
  }
  return key | (MonoKey{total} << (ring_.k() * bits_));
}

namespace {

// Zeroed buffers reused across calls; one per nesting level.
struct GridPool {
  std::vector<std::vector<std::uint32_t>> buffers;
  std::size_t depth = 0;
};

GridPool& grid_pool() {
  thread_local GridPool pool;
  return pool;
}

}  // namespace

GridAccumulator::GridAccumulator(const RingPtr& ring, const CompactIndex& index, std::size_t expected_terms)
    : ring_(ring), index_(index) {
  auto& pool = grid_pool();
  if (pool.buffers.size() <= pool.depth) pool.buffers.emplace_back();
  auto& buffer = pool.buffers[pool.depth++];
  if (buffer.size() < index.cells()) buffer.assign(index.cells(), 0);
  grid_ = buffer.data();
  track_ = expected_terms * 4 < index.cells();
  if (track_) touched_.reserve(expected_terms);
}

GridAccumulator::~GridAccumulator() {
  if (!finished_) {
    if (track_) {
      for (std::uint32_t cell : touched_) grid_[cell] = 0;
    } else {
      std::fill(grid_, grid_ + index_.cells(), 0U);
    }
  }
  --grid_pool().depth;
}

TruncatedPoly GridAccumulator::finish() {
  finished_ = true;
  const std::uint32_t p = ring_->modulus();
  std::vector<std::pair<std::uint32_t, std::uint8_t>> cells;
  auto take = [&](std::uint32_t cell) {
    const auto c = static_cast<std::uint8_t>(grid_[cell] % p);
    grid_[cell] = 0;
    if (c != 0) cells.emplace_back(cell, c);
  };
  if (track_) {
    std::sort(touched_.begin(), touched_.end());
    cells.reserve(touched_.size());
    for (std::uint32_t cell : touched_) take(cell);
    touched_.clear();
  } else {
    const auto total = static_cast<std::uint32_t>(index_.cells());
    for (std::uint32_t cell = 0; cell < total; ++cell) {
      if (grid_[cell] != 0) take(cell);
    }
  }
  // Stable counting sort by degree turns index order into graded-lex order.
  std::vector<std::uint32_t> degrees(cells.size());
  std::uint32_t max_degree = 0;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    degrees[i] = index_.degree(cells[i].first);
    max_degree = std::max(max_degree, degrees[i]);
  }
  std::vector<std::size_t> offsets(max_degree + 2, 0);
  for (std::uint32_t d : degrees) ++offsets[d + 1];
  for (std::size_t d = 1; d < offsets.size(); ++d) offsets[d] += offsets[d - 1];
  std::vector<MonoKey> keys(cells.size());
  std::vector<std::uint8_t> coeffs(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const std::size_t at = offsets[degrees[i]]++;
    keys[at] = index_.key(cells[i].first);
    coeffs[at] = cells[i].second;
  }
  return TruncatedPoly::from_canonical(ring_, std::move(keys), std::move(coeffs));
}

HashAccumulator::HashAccumulator(std::size_t expected) {
  std::size_t cap = std::bit_ceil(std::max<std::size_t>(16, expected * 2));
  keys_.assign(cap, kEmpty);
  values_.assign(cap, 0);
  mask_ = cap - 1;
}

void HashAccumulator::grow() {
  std::vector<MonoKey> old_keys(keys_.size() * 2, kEmpty);
  std::vector<std::uint32_t> old_values(values_.size() * 2, 0);
  old_keys.swap(keys_);
  old_values.swap(values_);
  mask_ = keys_.size() - 1;
  used_ = 0;
  for (std::size_t i = 0; i < old_keys.size(); ++i) {
    if (old_keys[i] == kEmpty) continue;
    std::size_t slot = hash(old_keys[i]) & mask_;
    while (keys_[slot] != kEmpty) slot = (slot + 1) & mask_;
    keys_[slot] = old_keys[i];
    values_[slot] = old_values[i];
    ++used_;
  }
}

TruncatedPoly HashAccumulator::finish(const RingPtr& ring) {
  const std::uint32_t p = ring->modulus();
  std::vector<std::pair<MonoKey, std::uint8_t>> terms;
  terms.reserve(used_);
  for (std::size_t i = 0; i < keys_.size(); ++i) {
    if (keys_[i] == kEmpty) continue;
    const auto c = static_cast<std::uint8_t>(values_[i] % p);
    if (c != 0) terms.emplace_back(keys_[i], c);
  }
  std::sort(terms.begin(), terms.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
  std::vector<MonoKey> keys(terms.size());
  std::vector<std::uint8_t> coeffs(terms.size());
  for (std::size_t i = 0; i < terms.size(); ++i) {
    keys[i] = terms[i].first;
    coeffs[i] = terms[i].second;
  }
  return TruncatedPoly::from_canonical(ring, std::move(keys), std::move(coeffs));
}

namespace {

TruncatedPoly mul_dense(const TruncatedPoly& a, const TruncatedPoly& b, const CompactIndex& index,
                        std::uint32_t limit) {
  const Ring& ring = *a.ring();
  auto compact = [&](const TruncatedPoly& poly, std::vector<std::uint32_t>& idx, std::vector<std::uint32_t>& deg) {
    idx.resize(poly.size());
    deg.resize(poly.size());
    for (std::size_t i = 0; i < poly.size(); ++i) {
      idx[i] = index.index(poly.keys()[i]);
      deg[i] = ring.degree(poly.keys()[i]);
    }
  };
  std::vector<std::uint32_t> ia, da, ib, db;
  compact(a, ia, da);
  compact(b, ib, db);

  GridAccumulator acc(a.ring(), index, std::min(index.cells(), a.size() * b.size()));
  std::uint32_t* grid = acc.data();
  const auto ca = a.coeffs();
  const auto cb = b.coeffs();
  const std::size_t nb = b.size();
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (da[i] >= limit) break;
    const std::uint32_t room = limit - da[i];
    const std::uint8_t* row = ring.mul_row(ca[i]);
    const std::uint32_t base = ia[i];
    if (acc.tracking()) {
      for (std::size_t j = 0; j < nb && db[j] < room; ++j) acc.add(base + ib[j], row[cb[j]]);
    } else {
      for (std::size_t j = 0; j < nb && db[j] < room; ++j) grid[base + ib[j]] += row[cb[j]];
    }
  }
  return acc.finish();
}

TruncatedPoly mul_hashed(const TruncatedPoly& a, const TruncatedPoly& b, std::uint32_t limit) {
  const Ring& ring = *a.ring();
  std::vector<std::uint32_t> db(b.size());
  for (std::size_t j = 0; j < b.size(); ++j) db[j] = ring.degree(b.keys()[j]);

  HashAccumulator acc(std::min<std::size_t>(a.size() * b.size(), std::size_t{1} << 20));
  acc.set_modulus(ring.modulus());
  const auto ka = a.keys();
  const auto kb = b.keys();
  for (std::size_t i = 0; i < a.size(); ++i) {
    const std::uint32_t da = ring.degree(ka[i]);
    if (da >= limit) break;
    const std::uint32_t room = limit - da;
    const std::uint8_t* row = ring.mul_row(a.coeffs()[i]);
    for (std::size_t j = 0; j < b.size() && db[j] < room; ++j) acc.add(ka[i] + kb[j], row[b.coeffs()[j]]);
  }
  return acc.finish(a.ring());
}

}  // namespace

TruncatedPoly truncate_below(const TruncatedPoly& a, std::uint32_t limit) {
  if (a.is_zero() || a.degree() < limit) return a;
  const Ring& ring = *a.ring();
  std::size_t cut = 0;
  while (cut < a.size() && ring.degree(a.keys()[cut]) < limit) ++cut;
  return TruncatedPoly::from_canonical(a.ring(), {a.keys().begin(), a.keys().begin() + cut},
                                       {a.coeffs().begin(), a.coeffs().begin() + cut});
}

TruncatedPoly mul_truncated(const TruncatedPoly& a, const TruncatedPoly& b, std::uint32_t limit) {
  require_same_ring(a, b);
  limit = std::min(limit, a.ring()->N());
  if (a.is_zero() || b.is_zero() || a.min_degree() + b.min_degree() >= limit) return TruncatedPoly(a.ring());
  if (a.size() == 1 && a.keys()[0] == 0) return truncate_below(poly_scalar_mul(a.coeffs()[0], b), limit);
  if (b.size() == 1 && b.keys()[0] == 0) return truncate_below(poly_scalar_mul(b.coeffs()[0], a), limit);
  const CompactIndex index(*a.ring(), active_variables(*a.ring(), {a.keys(), b.keys()}));
  // The larger operand drives the outer loop; the inner scan exits early on
  // degree.
  const TruncatedPoly& outer = a.size() >= b.size() ? a : b;
  const TruncatedPoly& inner = a.size() >= b.size() ? b : a;
  if (index.fits()) return mul_dense(outer, inner, index, limit);
  return mul_hashed(outer, inner, limit);
}

}  // namespace detail

TruncatedPoly TruncatedPoly::constant(RingPtr ring, std::uint32_t c) {
  TruncatedPoly out(std::move(ring));
  c %= out.ring_->modulus();
  if (c != 0) {
    out.keys_.push_back(0);
    out.coeffs_.push_back(static_cast<std::uint8_t>(c));
  }
  return out;
}

TruncatedPoly TruncatedPoly::variable(RingPtr ring, std::uint32_t var, std::uint32_t coeff) {
  std::vector<std::uint32_t> exps(ring->k(), 0);
  if (var >= ring->k()) throw InvalidParameter("variable index out of range");
  exps[var] = 1;
  return monomial(std::move(ring), exps, coeff);
}

TruncatedPoly TruncatedPoly::monomial(RingPtr ring, std::span<const std::uint32_t> exponents,
                                      std::uint32_t coeff) {
  std::uint64_t total = 0;
  for (std::uint32_t e : exponents) total += e;
  TruncatedPoly out(ring);
  if (exponents.size() != ring->k()) throw InvalidParameter("monomial needs k exponents");
  coeff %= ring->modulus();
  if (coeff == 0 || total >= ring->N()) return out;
  out.keys_.push_back(ring->pack(exponents));
  out.coeffs_.push_back(static_cast<std::uint8_t>(coeff));
  return out;
}

TruncatedPoly TruncatedPoly::from_terms(RingPtr ring, std::vector<std::pair<MonoKey, std::uint32_t>> terms) {
  const std::uint32_t p = ring->modulus();
  std::stable_sort(terms.begin(), terms.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
  TruncatedPoly out(ring);
  for (std::size_t i = 0; i < terms.size();) {
    const MonoKey key = terms[i].first;
    std::uint64_t sum = 0;
    for (; i < terms.size() && terms[i].first == key; ++i) sum += terms[i].second % p;
    if (!ring->well_formed(key)) continue;
    const auto c = static_cast<std::uint8_t>(sum % p);
    if (c == 0) continue;
    out.keys_.push_back(key);
    out.coeffs_.push_back(c);
  }
  return out;
}

TruncatedPoly TruncatedPoly::from_canonical(RingPtr ring, std::vector<MonoKey> keys,
                                            std::vector<std::uint8_t> coeffs) {
  TruncatedPoly out(std::move(ring));
  out.keys_ = std::move(keys);
  out.coeffs_ = std::move(coeffs);
  return out;
}

std::uint8_t TruncatedPoly::coeff(MonoKey key) const {
  auto it = std::lower_bound(keys_.begin(), keys_.end(), key);
  if (it == keys_.end() || *it != key) return 0;
  return coeffs_[static_cast<std::size_t>(it - keys_.begin())];
}

std::uint32_t TruncatedPoly::degree() const {
  return keys_.empty() ? 0 : ring_->degree(keys_.back());
}

std::uint32_t TruncatedPoly::min_degree() const {
  return keys_.empty() ? 0 : ring_->degree(keys_.front());
}

bool TruncatedPoly::is_canonical() const {
  if (keys_.size() != coeffs_.size()) return false;
  for (std::size_t i = 0; i < keys_.size(); ++i) {
    if (coeffs_[i] == 0 || coeffs_[i] >= ring_->modulus()) return false;
    if (!ring_->well_formed(keys_[i])) return false;
    if (i > 0 && !(keys_[i - 1] < keys_[i])) return false;
  }
  return true;
}

std::string TruncatedPoly::to_string() const {
  if (keys_.empty()) return "0";
  std::ostringstream out;
  // Highest term first.
  for (std::size_t i = keys_.size(); i-- > 0;) {
    if (i + 1 < keys_.size()) out << " + ";
    out << static_cast<unsigned>(coeffs_[i]);
    const auto exps = ring_->unpack(keys_[i]);
    for (std::size_t v = 0; v < exps.size(); ++v) {
      if (exps[v] == 0) continue;
      out << "*x" << (v + 1);
      if (exps[v] > 1) out << '^' << exps[v];
    }
  }
  return out.str();
}

bool operator==(const TruncatedPoly& a, const TruncatedPoly& b) {
  return a.ring_->same_ring(*b.ring_) && a.keys_ == b.keys_ && a.coeffs_ == b.coeffs_;
}

TruncatedPoly TruncatedPoly::operator-() const { return poly_scalar_mul(ring_->modulus() - 1, *this); }
TruncatedPoly operator+(const TruncatedPoly& a, const TruncatedPoly& b) { return poly_add(a, b); }
TruncatedPoly operator-(const TruncatedPoly& a, const TruncatedPoly& b) { return poly_sub(a, b); }
TruncatedPoly operator*(const TruncatedPoly& a, const TruncatedPoly& b) { return poly_mul(a, b); }

void require_same_ring(const TruncatedPoly& a, const TruncatedPoly& b) {
  if (!a.ring()->same_ring(*b.ring())) throw ParameterMismatch("polynomials belong to different rings");
}

TruncatedPoly poly_axpy(const TruncatedPoly& a, std::uint32_t c, const TruncatedPoly& b) {
  require_same_ring(a, b);
  const Ring& ring = *a.ring();
  c %= ring.modulus();
  if (c == 0 || b.is_zero()) return a;
  const std::uint8_t* row = ring.mul_row(c);
  std::vector<MonoKey> keys;
  std::vector<std::uint8_t> coeffs;
  keys.reserve(a.size() + b.size());
  coeffs.reserve(a.size() + b.size());
  const auto ka = a.keys();
  const auto kb = b.keys();
  std::size_t i = 0, j = 0;
  while (i < ka.size() || j < kb.size()) {
    if (j == kb.size() || (i < ka.size() && ka[i] < kb[j])) {
      keys.push_back(ka[i]);
      coeffs.push_back(a.coeffs()[i]);
      ++i;
    } else if (i == ka.size() || kb[j] < ka[i]) {
      keys.push_back(kb[j]);
      coeffs.push_back(row[b.coeffs()[j]]);
      ++j;
    } else {
      const std::uint8_t sum = ring.add(a.coeffs()[i], row[b.coeffs()[j]]);
      if (sum != 0) {
        keys.push_back(ka[i]);
        coeffs.push_back(sum);
      }
      ++i;
      ++j;
    }
  }
  return TruncatedPoly::from_canonical(a.ring(), std::move(keys), std::move(coeffs));
}

TruncatedPoly poly_add(const TruncatedPoly& a, const TruncatedPoly& b) { return poly_axpy(a, 1, b); }

TruncatedPoly poly_sub(const TruncatedPoly& a, const TruncatedPoly& b) {
  return poly_axpy(a, a.ring()->modulus() - 1, b);
}

TruncatedPoly poly_scalar_mul(std::uint32_t c, const TruncatedPoly& a) {
  c %= a.ring()->modulus();
  if (c == 0) return TruncatedPoly(a.ring());
  if (c == 1) return a;
  const std::uint8_t* row = a.ring()->mul_row(c);
  std::vector<MonoKey> keys(a.keys().begin(), a.keys().end());
  std::vector<std::uint8_t> coeffs(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) coeffs[i] = row[a.coeffs()[i]];
  return TruncatedPoly::from_canonical(a.ring(), std::move(keys), std::move(coeffs));
}

TruncatedPoly poly_mul(const TruncatedPoly& a, const TruncatedPoly& b) {
  return detail::mul_truncated(a, b, a.ring()->N());
}

TruncatedPoly poly_pow(const TruncatedPoly& a, std::uint32_t e) {
  TruncatedPoly result = TruncatedPoly::constant(a.ring(), 1);
  TruncatedPoly base = a;
  while (e > 0) {
    if (e & 1U) result = poly_mul(result, base);
    e >>= 1;
    if (e > 0) base = poly_mul(base, base);
  }
  return result;
}

bool is_unit(const TruncatedPoly& a) { return a.constant_term() != 0; }

TruncatedPoly poly_inverse(const TruncatedPoly& a) {
  if (!is_unit(a)) throw InvalidParameter("polynomial is not a unit");
  const Ring& ring = *a.ring();
  const std::uint8_t c_inv = ring.inv(a.constant_term());
  // a = c(1 - u) with u nilpotent, so a^-1 = c^-1 (1 + u + u^2 + ...).
  const TruncatedPoly one = TruncatedPoly::constant(a.ring(), 1);
  const TruncatedPoly u = poly_sub(one, poly_scalar_mul(c_inv, a));
  TruncatedPoly sum = one;
  TruncatedPoly power = one;
  while (true) {
    power = poly_mul(power, u);
    if (power.is_zero()) break;
    sum = poly_add(sum, power);
  }
  return poly_scalar_mul(c_inv, sum);
}

TruncatedPoly random_sparse_poly(const RingPtr& ring, std::uint32_t sparsity, bool allow_constant, Rng& rng,
                                 std::uint32_t max_degree, std::span<const std::uint32_t> variables) {
  if (sparsity == 0) throw InvalidParameter("sparsity must be positive");
  if (max_degree == 0) max_degree = ring->params().max_gen_degree;
  max_degree = std::min(max_degree, ring->N() - 1);
  std::vector<std::uint32_t> all_vars;
  if (variables.empty()) {
    all_vars.resize(ring->k());
    for (std::uint32_t v = 0; v < ring->k(); ++v) all_vars[v] = v;
    variables = all_vars;
  }
  const auto nvars = static_cast<std::uint32_t>(variables.size());
  const std::uint32_t min_degree = allow_constant ? 0 : 1;

  std::vector<MonoKey> keys;
  std::vector<std::pair<MonoKey, std::uint8_t>> terms;
  std::vector<std::uint32_t> exps(ring->k());
  for (std::uint32_t s = 0; s < sparsity; ++s) {
    const auto degree = static_cast<std::uint32_t>(rng.uniform(min_degree, max_degree));
    // Stars and bars: nvars-1 bar positions among degree+nvars-1 slots.
    std::fill(exps.begin(), exps.end(), 0U);
    const auto bars = rng.subset(degree + nvars - 1, nvars - 1);
    std::uint32_t prev = 0;
    for (std::uint32_t t = 0; t < nvars; ++t) {
      const std::uint32_t end = t + 1 < nvars ? bars[t] - t : degree;
      exps[variables[t]] = end - prev;
      prev = end;
    }
    const auto coeff = static_cast<std::uint8_t>(rng.uniform(1, ring->modulus() - 1));
    const MonoKey key = ring->pack(exps);
    if (std::find(keys.begin(), keys.end(), key) != keys.end()) continue;
    keys.push_back(key);
    terms.emplace_back(key, coeff);
  }
  std::sort(terms.begin(), terms.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
  std::vector<MonoKey> sorted_keys(terms.size());
  std::vector<std::uint8_t> coeffs(terms.size());
  for (std::size_t i = 0; i < terms.size(); ++i) {
    sorted_keys[i] = terms[i].first;
    coeffs[i] = terms[i].second;
  }
  return TruncatedPoly::from_canonical(ring, std::move(sorted_keys), std::move(coeffs));
}

TruncatedPoly poly_linear_combination(const RingPtr& ring,
                                      std::span<const std::pair<std::uint32_t, const TruncatedPoly*>> items) {
  std::size_t total = 0;
  MonoKey seen = 0;
  for (const auto& [c, poly] : items) {
    if (!poly->ring()->same_ring(*ring)) throw ParameterMismatch("polynomials belong to different rings");
    total += poly->size();
    for (MonoKey key : poly->keys()) seen |= key;
  }
  if (items.size() == 1) return poly_scalar_mul(items[0].first, *items[0].second);
  if (items.size() == 2) return poly_axpy(poly_scalar_mul(items[0].first, *items[0].second), items[1].first,
                                          *items[1].second);
  const std::span<const MonoKey> seen_span(&seen, 1);
  const detail::CompactIndex index(*ring, detail::active_variables(*ring, {seen_span}));
  if (index.fits()) {
    detail::GridAccumulator acc(ring, index, total);
    for (const auto& [c, poly] : items) {
      const std::uint8_t* row = ring->mul_row(c % ring->modulus());
      for (std::size_t i = 0; i < poly->size(); ++i) acc.add(index.index(poly->keys()[i]), row[poly->coeffs()[i]]);
    }
    return acc.finish();
  }
  detail::HashAccumulator acc(total);
  acc.set_modulus(ring->modulus());
  for (const auto& [c, poly] : items) {
    const std::uint8_t* row = ring->mul_row(c % ring->modulus());
    for (std::size_t i = 0; i < poly->size(); ++i) acc.add(poly->keys()[i], row[poly->coeffs()[i]]);
  }
  return acc.finish(ring);
}

}  // namespace conjauth
