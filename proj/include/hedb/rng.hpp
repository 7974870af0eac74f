// Copyright 2026 the hedb authors
// SPDX-License-Identifier: Apache-2.0

#ifndef HEDB_RNG_HPP
#define HEDB_RNG_HPP

#include <gmpxx.h>

#include <cstdint>
#include <optional>

namespace hedb {

// Deterministic big-number randomness. GMP's Mersenne Twister gives the
// same stream for the same seed on every platform, which the reproducibility
// guarantees (fixed-seed keygen, differential re-runs) rely on.
class Rng {
 public:
  explicit Rng(uint64_t seed);

  // Uniform in [0, 2^bits).
  mpz_class bits(unsigned bits);

  // Uniform with exactly `bits` significant bits: top and range fixed,
  // [2^(bits-1), 2^bits).
  mpz_class exact_bits(unsigned bits);

  // Uniform in [0, bound).
  mpz_class below(const mpz_class& bound);

  uint64_t u64();
  // Uniform in [0, bound); bound > 0.
  uint64_t below_u64(uint64_t bound);
  bool bit();

  // Derive an independent generator (for per-scenario self-seeding).
  Rng fork();

 private:
  gmp_randclass gen_;
};

// Seed from the HEDB_SEED environment variable when set, otherwise from OS
// entropy. Returns the seed actually used so callers can report it.
uint64_t default_seed();
std::optional<uint64_t> env_seed();

}  // namespace hedb

#endif  // HEDB_RNG_HPP
