#pragma once

#include <stdexcept>
#include <string>

namespace conjauth {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operands built over different rings (modulus, k or N differ).
class ParameterMismatch : public Error {
 public:
  using Error::Error;
};

class InvalidParameter : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class UnsupportedDimension : public Error {
 public:
  using Error::Error;
};

// A peer broke the message order or sent a challenge that does not match
// the locally recomputed one. The session must be aborted.
class ProtocolViolation : public Error {
 public:
  using Error::Error;
};

// A file could not be read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

// The attack system would exceed its size budget. Carries the dimensions it
// would have had so callers can still report them.
class SizeError : public Error {
 public:
  SizeError(const std::string& what, std::string rows, std::string cols)
      : Error(what), rows_(std::move(rows)), cols_(std::move(cols)) {}
  const std::string& rows() const { return rows_; }
  const std::string& cols() const { return cols_; }

 private:
  std::string rows_;
  std::string cols_;
};

}  // namespace conjauth
