// Copyright 2026 the hedb authors
// SPDX-License-Identifier: Apache-2.0

#ifndef HEDB_ERROR_HPP
#define HEDB_ERROR_HPP

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace hedb {

// Stable error identifiers. The numeric values are part of the wire
// protocol (ERROR frames carry them as u16), so entries must not be
// reordered or removed.
enum class ErrorCode : uint16_t {
  // protocol / server
  MalformedFrame = 1,
  UnsupportedVersion = 2,
  UnknownMessageType = 3,
  PayloadTooLarge = 4,
  UnknownTable = 5,
  DuplicateTable = 6,
  InvalidSchema = 7,
  SchemaMismatch = 8,
  ShapeMismatch = 9,
  RowLimitExceeded = 10,
  Internal = 11,

  // data encoding / serialization
  ValueOverflow = 20,
  InvalidCharacter = 21,
  MalformedHeader = 22,
  TruncatedPayload = 23,

  // crypto
  NoiseOverflow = 30,
  BootstrapUnavailable = 31,
  KeyFormat = 32,
  WidthMismatch = 33,

  // SQL front end
  SyntaxError = 40,
  UnsupportedFeature = 41,
  UnknownColumn = 42,
  TypeMismatch = 43,
  BadPattern = 44,
  PatternTooLong = 45,
  PartialUpdateUnsupported = 46,

  // client / misc
  IoError = 50,
  NetworkError = 51,
};

const char* error_code_name(ErrorCode code);

// Single exception type for the whole library. `offset` is a byte position
// into the offending input (SQL text or a binary stream) when known.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string message)
      : std::runtime_error(std::move(message)), code_(code) {}
  Error(ErrorCode code, std::string message, size_t offset)
      : std::runtime_error(std::move(message)), code_(code), offset_(offset) {}

  ErrorCode code() const { return code_; }
  std::optional<size_t> offset() const { return offset_; }

 private:
  ErrorCode code_;
  std::optional<size_t> offset_;
};

}  // namespace hedb

#endif  // HEDB_ERROR_HPP
