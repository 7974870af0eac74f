// Copyright 2026 the hedb authors
// SPDX-License-Identifier: Apache-2.0

#include "hedb/params.hpp"

#include <algorithm>
#include <bit>

#include "hedb/error.hpp"

namespace hedb {

namespace {

unsigned ceil_log2(unsigned v) {
  unsigned bits = 0;
  while ((1u << bits) < v) ++bits;
  return bits;
}

unsigned pow_u(unsigned base, unsigned exp) {
  unsigned r = 1;
  for (unsigned i = 0; i < exp; ++i) r *= base;
  return r;
}

}  // namespace

SecurityParams SecurityParams::from_lambda(unsigned lambda) {
  if (lambda < 2)
    throw Error(ErrorCode::KeyFormat,
                "lambda must be >= 2 (modulus would be degenerate)");
  SecurityParams p;
  p.lambda = lambda;
  p.n_bits = lambda;
  p.p_bits = lambda * lambda;
  p.q_bits = pow_u(lambda, 5);
  p.alpha = lambda;
  p.beta = 5 * lambda;
  p.frac_bits = ceil_log2(p.alpha) + 3;
  p.validate();
  return p;
}

SecurityParams SecurityParams::for_budget(unsigned lambda,
                                          unsigned budget_bits) {
  SecurityParams p = from_lambda(lambda);
  p.p_bits = std::max(p.p_bits, budget_bits + 2);
  p.validate();
  return p;
}

void SecurityParams::validate() const {
  if (lambda < 2)
    throw Error(ErrorCode::KeyFormat, "lambda must be >= 2");
  if (n_bits != lambda)
    throw Error(ErrorCode::KeyFormat, "n_bits must equal lambda");
  if (q_bits != pow_u(lambda, 5))
    throw Error(ErrorCode::KeyFormat, "q_bits must equal lambda^5");
  if (p_bits < lambda * lambda)
    throw Error(ErrorCode::KeyFormat, "p_bits below lambda^2");
  if (alpha < 1 || alpha >= beta)
    throw Error(ErrorCode::KeyFormat, "need 1 <= alpha < beta");
  if (frac_bits < ceil_log2(alpha) + 3)
    throw Error(ErrorCode::KeyFormat, "frac_bits too small for alpha");
}

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedFrame: return "MalformedFrame";
    case ErrorCode::UnsupportedVersion: return "UnsupportedVersion";
    case ErrorCode::UnknownMessageType: return "UnknownMessageType";
    case ErrorCode::PayloadTooLarge: return "PayloadTooLarge";
    case ErrorCode::UnknownTable: return "UnknownTable";
    case ErrorCode::DuplicateTable: return "DuplicateTable";
    case ErrorCode::InvalidSchema: return "InvalidSchema";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::RowLimitExceeded: return "RowLimitExceeded";
    case ErrorCode::Internal: return "Internal";
    case ErrorCode::ValueOverflow: return "ValueOverflow";
    case ErrorCode::InvalidCharacter: return "InvalidCharacter";
    case ErrorCode::MalformedHeader: return "MalformedHeader";
    case ErrorCode::TruncatedPayload: return "TruncatedPayload";
    case ErrorCode::NoiseOverflow: return "NoiseOverflow";
    case ErrorCode::BootstrapUnavailable: return "BootstrapUnavailable";
    case ErrorCode::KeyFormat: return "KeyFormat";
    case ErrorCode::WidthMismatch: return "WidthMismatch";
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::UnsupportedFeature: return "UnsupportedFeature";
    case ErrorCode::UnknownColumn: return "UnknownColumn";
    case ErrorCode::TypeMismatch: return "TypeMismatch";
    case ErrorCode::BadPattern: return "BadPattern";
    case ErrorCode::PatternTooLong: return "PatternTooLong";
    case ErrorCode::PartialUpdateUnsupported: return "PartialUpdateUnsupported";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::NetworkError: return "NetworkError";
  }
  return "Unknown";
}

}  // namespace hedb
