// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ttstroke {

/// Base of every error raised by the library. CLI exit codes are keyed off
/// the concrete subclass (see tools/ttstroke.cpp).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnknownClass : public Error {
 public:
  explicit UnknownClass(const std::string& name)
      : Error("unknown stroke class '" + name + "'") {}
};

class NonFinite : public Error {
 public:
  explicit NonFinite(std::size_t index)
      : Error("non-finite sample at index " + std::to_string(index)), index_(index) {}
  std::size_t index() const { return index_; }

 private:
  std::size_t index_;
};

class ShapeMismatch : public Error {
 public:
  using Error::Error;
};

class InvalidConfig : public Error {
 public:
  using Error::Error;
};

/// Raised by training when a loss or parameter turns NaN/inf.
class NanDetected : public Error {
 public:
  NanDetected(int epoch, std::size_t batch)
      : Error("non-finite value detected at epoch " + std::to_string(epoch) + ", batch " +
              std::to_string(batch)),
        epoch_(epoch),
        batch_(batch) {}
  int epoch() const { return epoch_; }
  std::size_t batch() const { return batch_; }

 private:
  int epoch_;
  std::size_t batch_;
};

class EmptyIndex : public Error {
 public:
  EmptyIndex() : Error("nearest-neighbour index is empty") {}
};

class ClassTooSmall : public Error {
 public:
  ClassTooSmall(const std::string& cls, std::size_t count)
      : Error("class " + cls + " has " + std::to_string(count) +
              " item(s); a stratified split needs at least 2") {}
};

/// Malformed input text. Line and column are 1-based.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& what)
      : Error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " +
              what),
        line_(line),
        column_(column),
        detail_(what) {}
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }
  /// Message without the location prefix.
  const std::string& detail() const { return detail_; }

 private:
  std::size_t line_;
  std::size_t column_;
  std::string detail_;
};

/// Malformed binary input; `offset` is the byte position of the fault.
class FormatError : public Error {
 public:
  FormatError(std::size_t offset, const std::string& what)
      : Error("byte " + std::to_string(offset) + ": " + what), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

/// Well-formed input that breaks a domain invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace ttstroke
