// Copyright 2026 the hedb authors
// SPDX-License-Identifier: Apache-2.0

#include "hedb/rng.hpp"

#include <cstdlib>
#include <random>
#include <string>

#include "hedb/error.hpp"

namespace hedb {

Rng::Rng(uint64_t seed) : gen_(gmp_randinit_mt) {
  mpz_class s;
  mpz_import(s.get_mpz_t(), 1, 1, sizeof(seed), 0, 0, &seed);
  gen_.seed(s);
}

mpz_class Rng::bits(unsigned bits) {
  if (bits == 0) return 0;
  return gen_.get_z_bits(bits);
}

mpz_class Rng::exact_bits(unsigned bits) {
  if (bits == 0) return 0;
  mpz_class v = gen_.get_z_bits(bits);
  mpz_setbit(v.get_mpz_t(), bits - 1);
  return v;
}

mpz_class Rng::below(const mpz_class& bound) {
  return gen_.get_z_range(bound);
}

uint64_t Rng::u64() {
  mpz_class v = gen_.get_z_bits(64);
  uint64_t out = 0;
  // mpz_export writes nothing for zero.
  size_t count = 0;
  mpz_export(&out, &count, 1, sizeof(out), 0, 0, v.get_mpz_t());
  return out;
}

uint64_t Rng::below_u64(uint64_t bound) {
  mpz_class b;
  mpz_import(b.get_mpz_t(), 1, 1, sizeof(bound), 0, 0, &bound);
  mpz_class v = gen_.get_z_range(b);
  uint64_t out = 0;
  size_t count = 0;
  mpz_export(&out, &count, 1, sizeof(out), 0, 0, v.get_mpz_t());
  return out;
}

bool Rng::bit() { return gen_.get_z_bits(1) != 0; }

Rng Rng::fork() { return Rng(u64()); }

std::optional<uint64_t> env_seed() {
  const char* env = std::getenv("HEDB_SEED");
  if (!env || !*env) return std::nullopt;
  try {
    return std::stoull(env);
  } catch (const std::exception&) {
    throw Error(ErrorCode::IoError,
                std::string("HEDB_SEED is not a valid integer: ") + env);
  }
}

uint64_t default_seed() {
  if (auto s = env_seed()) return *s;
  std::random_device rd;
  return (static_cast<uint64_t>(rd()) << 32) ^ rd();
}

}  // namespace hedb
