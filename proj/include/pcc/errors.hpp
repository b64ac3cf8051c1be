// Copyright 2026 The pccorrupt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pcc {

/// Base class of every error raised by the library. The CLI maps these to
/// exit code 2 (data or validation error).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated (bad count, out-of-range
/// severity, mismatched sizes, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Geometry that cannot support the requested operation: zero-area meshes,
/// degenerate clouds, views that never hit the mesh.
class GeometryError : public Error {
 public:
  using Error::Error;
};

/// Linear system whose condition estimate exceeds the accepted bound.
class IllConditioned : public Error {
 public:
  using Error::Error;
};

enum class ParseErrorKind {
  kMalformedHeader,
  kIndexOutOfRange,
  kTruncated,
  kInvalidValue,
  kDuplicateKey,
};

/// Parse failure in a text or binary input, tagged with the 1-based line
/// (or row) where it was detected. Binary formats report line 0.
class ParseError : public Error {
 public:
  ParseError(ParseErrorKind kind, std::size_t line, const std::string& message)
      : Error("line " + std::to_string(line) + ": " + message), kind_(kind), line_(line) {}

  ParseErrorKind kind() const noexcept { return kind_; }
  std::size_t line() const noexcept { return line_; }

 private:
  ParseErrorKind kind_;
  std::size_t line_;
};

}  // namespace pcc
