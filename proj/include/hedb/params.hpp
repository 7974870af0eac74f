// Copyright 2026 the hedb authors
// SPDX-License-Identifier: Apache-2.0

#ifndef HEDB_PARAMS_HPP
#define HEDB_PARAMS_HPP

#include <cstdint>

namespace hedb {

// Parameter set of the integer scheme. All sizes are bit lengths.
//
// The base rule ties everything to the security parameter:
//   n_bits = lambda, p_bits = lambda^2, q_bits = lambda^5,
//   alpha = lambda, beta = 5*lambda, frac_bits = ceil(log2 alpha) + 3.
//
// p_bits may exceed lambda^2: the modulus must be sized to the deepest
// circuit it has to absorb (see for_budget), since every homomorphic
// operation grows the noise and decryption fails once noise reaches p/2.
struct SecurityParams {
  unsigned lambda = 0;
  unsigned n_bits = 0;     // bit length of the noise term in fresh ciphertexts
  unsigned p_bits = 0;     // bit length of the secret odd modulus
  unsigned q_bits = 0;     // bit length of the random multiplier
  unsigned alpha = 0;      // sparse-subset size
  unsigned beta = 0;       // length of the y vector
  unsigned frac_bits = 0;  // fractional precision kept in z values

  // Strict parameter formula from lambda alone.
  static SecurityParams from_lambda(unsigned lambda);

  // Same formula with p widened so that circuits whose tracked noise stays
  // <= budget_bits decrypt correctly: p_bits = max(lambda^2, budget_bits+2).
  static SecurityParams for_budget(unsigned lambda, unsigned budget_bits);

  // Fractional precision of the stored y values. z values keep frac_bits of
  // fraction, but y must approximate 1/p so closely that the error survives
  // multiplication by a full-size ciphertext; see keygen.
  unsigned y_frac_bits() const { return p_bits + q_bits + frac_bits + 4; }

  // Noise ceiling: estimates at or above this make decryption unreliable.
  unsigned noise_limit() const { return p_bits - 1; }

  // Throws Error(KeyFormat) when a field violates the invariants.
  void validate() const;

  bool operator==(const SecurityParams&) const = default;
};

// Row capacity of every table. Counters (match counts, prefix sums) are
// sized for the capacity, not the current row count, which keeps circuit
// shapes independent of how many rows happen to be stored.
inline constexpr unsigned kMaxRows = 31;
inline constexpr unsigned kCounterBits = 5;  // ceil(log2(kMaxRows + 1))

}  // namespace hedb

#endif  // HEDB_PARAMS_HPP
