#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "conjauth/error.hpp"
#include "conjauth/key.hpp"

namespace conjauth {

// Binary encodings, all little-endian:
//   monomial      k x u16 exponents
//   polynomial    u32 term count, then (monomial, u8 coefficient) ascending
//   endomorphism  u8 k0, k0 x u8 omitted index (1-based) ascending, k polynomials
//   matrix        u8 n, n*n polynomials row-major
//   factored key  u32 m, then per factor u8 i, u8 j (1-based), polynomial

enum class DecodeErrorKind : std::uint8_t {
  Truncated,
  UnknownType,
  NonCanonicalOrder,
  CoefficientRange,
  DegreeRange,
  Malformed,
};

const char* to_string(DecodeErrorKind kind);

class DecodeError : public Error {
 public:
  DecodeError(DecodeErrorKind kind, const std::string& what) : Error(what), kind_(kind) {}
  DecodeErrorKind kind() const { return kind_; }

 private:
  DecodeErrorKind kind_;
};

using Bytes = std::vector<std::uint8_t>;

class ByteWriter {
 public:
  void u8(std::uint32_t v) { out_.push_back(static_cast<std::uint8_t>(v)); }
  void u16(std::uint32_t v);
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void bytes(std::span<const std::uint8_t> data) { out_.insert(out_.end(), data.begin(), data.end()); }

  const Bytes& data() const { return out_; }
  Bytes take() { return std::move(out_); }

 private:
  Bytes out_;
};

// Reads from a borrowed buffer. Every read past the end throws
// DecodeError(Truncated).
class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> data) : data_(data) {}

  std::uint8_t u8() {
    need(1);
    return data_[pos_++];
  }
  std::uint16_t u16() {
    need(2);
    const auto v = static_cast<std::uint16_t>(data_[pos_] | (data_[pos_ + 1] << 8));
    pos_ += 2;
    return v;
  }
  std::uint32_t u32();
  std::uint64_t u64();
  std::span<const std::uint8_t> bytes(std::size_t count);

  std::size_t remaining() const { return data_.size() - pos_; }
  std::size_t position() const { return pos_; }
  // Throws DecodeError(Malformed) when unread bytes are left.
  void expect_end() const;

 private:
  void need(std::size_t count) const {
    if (remaining() < count) [[unlikely]] truncated(count);
  }
  [[noreturn]] void truncated(std::size_t count) const;

  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

void encode_poly(ByteWriter& w, const TruncatedPoly& a);
TruncatedPoly decode_poly(ByteReader& r, const RingPtr& ring);

void encode_matrix(ByteWriter& w, const MatrixR& m);
MatrixR decode_matrix(ByteReader& r, const RingPtr& ring);

void encode_endomorphism(ByteWriter& w, const Endomorphism& phi);
Endomorphism decode_endomorphism(ByteReader& r, const RingPtr& ring);

void encode_key(ByteWriter& w, const FactoredInvertible& key);
FactoredInvertible decode_key(ByteReader& r, const RingPtr& ring, std::uint32_t n);

// Whole-buffer helpers.
Bytes encode(const TruncatedPoly& a);
Bytes encode(const MatrixR& m);
Bytes encode(const Endomorphism& phi);
Bytes encode(const FactoredInvertible& key);

}  // namespace conjauth
