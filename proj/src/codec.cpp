#include "conjauth/codec.hpp"

#include <string>

namespace conjauth {

const char* to_string(DecodeErrorKind kind) {
  switch (kind) {
    case DecodeErrorKind::Truncated: return "truncated";
    case DecodeErrorKind::UnknownType: return "unknown-type";
    case DecodeErrorKind::NonCanonicalOrder: return "non-canonical-order";
    case DecodeErrorKind::CoefficientRange: return "coefficient-range";
    case DecodeErrorKind::DegreeRange: return "degree-range";
    case DecodeErrorKind::Malformed: return "malformed";
  }
  return "unknown";
}

void ByteWriter::u16(std::uint32_t v) {
  u8(v);
  u8(v >> 8);
}

void ByteWriter::u32(std::uint32_t v) {
  for (int s = 0; s < 32; s += 8) u8(v >> s);
}

void ByteWriter::u64(std::uint64_t v) {
  for (int s = 0; s < 64; s += 8) u8(static_cast<std::uint32_t>(v >> s));
}

void ByteReader::truncated(std::size_t count) const {
  throw DecodeError(DecodeErrorKind::Truncated, "need " + std::to_string(count) + " bytes at offset " +
                                                    std::to_string(pos_) + ", have " + std::to_string(remaining()));
}

std::uint32_t ByteReader::u32() {
  need(4);
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | data_[pos_ + i];
  pos_ += 4;
  return v;
}

std::uint64_t ByteReader::u64() {
  need(8);
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | data_[pos_ + i];
  pos_ += 8;
  return v;
}

std::span<const std::uint8_t> ByteReader::bytes(std::size_t count) {
  need(count);
  auto out = data_.subspan(pos_, count);
  pos_ += count;
  return out;
}

void ByteReader::expect_end() const {
  if (remaining() != 0) {
    throw DecodeError(DecodeErrorKind::Malformed, std::to_string(remaining()) + " trailing bytes");
  }
}

void encode_poly(ByteWriter& w, const TruncatedPoly& a) {
  const Ring& ring = *a.ring();
  w.u32(static_cast<std::uint32_t>(a.size()));
  for (std::size_t t = 0; t < a.size(); ++t) {
    for (std::uint32_t v = 0; v < ring.k(); ++v) w.u16(ring.exponent(a.keys()[t], v));
    w.u8(a.coeffs()[t]);
  }
}

TruncatedPoly decode_poly(ByteReader& r, const RingPtr& ring) {
  const std::uint32_t k = ring->k();
  const std::uint32_t count = r.u32();
  const std::size_t term_bytes = 2 * std::size_t{k} + 1;
  if (r.remaining() / term_bytes < count) {
    throw DecodeError(DecodeErrorKind::Truncated,
                      "polynomial claims " + std::to_string(count) + " terms, buffer holds fewer");
  }
  std::vector<MonoKey> keys(count);
  std::vector<std::uint8_t> coeffs(count);
  std::vector<std::uint32_t> exps(k);
  for (std::uint32_t t = 0; t < count; ++t) {
    std::uint64_t degree = 0;
    for (std::uint32_t v = 0; v < k; ++v) {
      exps[v] = r.u16();
      degree += exps[v];
    }
    if (degree >= ring->N()) {
      throw DecodeError(DecodeErrorKind::DegreeRange,
                        "term " + std::to_string(t) + " has degree " + std::to_string(degree) + " >= N");
    }
    const std::uint8_t c = r.u8();
    if (c >= ring->modulus()) {
      throw DecodeError(DecodeErrorKind::CoefficientRange,
                        "term " + std::to_string(t) + " coefficient " + std::to_string(c) + " >= modulus");
    }
    if (c == 0) throw DecodeError(DecodeErrorKind::NonCanonicalOrder, "zero coefficient stored");
    keys[t] = ring->pack(exps);
    coeffs[t] = c;
    if (t > 0 && keys[t] <= keys[t - 1]) {
      throw DecodeError(DecodeErrorKind::NonCanonicalOrder, "terms not strictly ascending at " + std::to_string(t));
    }
  }
  return TruncatedPoly::from_canonical(ring, std::move(keys), std::move(coeffs));
}

void encode_matrix(ByteWriter& w, const MatrixR& m) {
  w.u8(m.n());
  for (const auto& entry : m.entries()) encode_poly(w, entry);
}

MatrixR decode_matrix(ByteReader& r, const RingPtr& ring) {
  const std::uint32_t n = r.u8();
  if (n == 0) throw DecodeError(DecodeErrorKind::Malformed, "matrix dimension 0");
  std::vector<TruncatedPoly> entries;
  entries.reserve(n * n);
  for (std::uint32_t i = 0; i < n * n; ++i) entries.push_back(decode_poly(r, ring));
  return MatrixR::from_entries(ring, n, std::move(entries));
}

void encode_endomorphism(ByteWriter& w, const Endomorphism& phi) {
  w.u8(phi.k0());
  for (std::uint32_t v : phi.omitted()) w.u8(v + 1);
  for (const auto& f : phi.images()) encode_poly(w, f);
}

Endomorphism decode_endomorphism(ByteReader& r, const RingPtr& ring) {
  const std::uint32_t k0 = r.u8();
  std::vector<std::uint32_t> omitted(k0);
  for (auto& v : omitted) {
    v = r.u8();
    if (v == 0) throw DecodeError(DecodeErrorKind::Malformed, "omitted index 0");
    --v;
  }
  std::vector<TruncatedPoly> images;
  images.reserve(ring->k());
  for (std::uint32_t v = 0; v < ring->k(); ++v) images.push_back(decode_poly(r, ring));
  try {
    return Endomorphism(ring, std::move(images), std::move(omitted));
  } catch (const InvalidParameter& e) {
    throw DecodeError(DecodeErrorKind::Malformed, std::string("endomorphism: ") + e.what());
  }
}

void encode_key(ByteWriter& w, const FactoredInvertible& key) {
  w.u32(static_cast<std::uint32_t>(key.m()));
  for (const auto& f : key.factors()) {
    w.u8(f.i + 1);
    w.u8(f.j + 1);
    encode_poly(w, f.u);
  }
}

FactoredInvertible decode_key(ByteReader& r, const RingPtr& ring, std::uint32_t n) {
  const std::uint32_t m = r.u32();
  // Each factor takes at least six bytes.
  if (r.remaining() / 6 < m) throw DecodeError(DecodeErrorKind::Truncated, "key claims " + std::to_string(m) + " factors");
  std::vector<ElementaryFactor> factors;
  factors.reserve(m);
  for (std::uint32_t t = 0; t < m; ++t) {
    const std::uint32_t i = r.u8();
    const std::uint32_t j = r.u8();
    if (i == 0 || j == 0) throw DecodeError(DecodeErrorKind::Malformed, "factor index 0");
    factors.push_back({i - 1, j - 1, decode_poly(r, ring)});
  }
  try {
    return FactoredInvertible(ring, n, std::move(factors));
  } catch (const InvalidParameter& e) {
    throw DecodeError(DecodeErrorKind::Malformed, std::string("key: ") + e.what());
  }
}

Bytes encode(const TruncatedPoly& a) {
  ByteWriter w;
  encode_poly(w, a);
  return w.take();
}

Bytes encode(const MatrixR& m) {
  ByteWriter w;
  encode_matrix(w, m);
  return w.take();
}

Bytes encode(const Endomorphism& phi) {
  ByteWriter w;
  encode_endomorphism(w, phi);
  return w.take();
}

Bytes encode(const FactoredInvertible& key) {
  ByteWriter w;
  encode_key(w, key);
  return w.take();
}

}  // namespace conjauth
