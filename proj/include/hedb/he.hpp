// Copyright 2026 the hedb authors
// SPDX-License-Identifier: Apache-2.0
//
// Bit-level homomorphic encryption over the integers.
//
// A ciphertext is an integer c = m' + p*q where p is the secret odd modulus
// and m' is a small even/odd noise term carrying the plaintext bit in its
// parity. Adding ciphertexts XORs the bits, multiplying ANDs them; both grow
// the noise, and decryption is only correct while |c mod p| < p/2 (centered
// residue). Every operation also reduces the result modulo x0 = p*q0, a
// published exact multiple of p: this leaves c mod p untouched but caps the
// integer size, without which repeated multiplication doubles the bit length
// of c at every level and even toy workloads exhaust memory.

#ifndef HEDB_HE_HPP
#define HEDB_HE_HPP

#include <gmpxx.h>

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "hedb/params.hpp"
#include "hedb/rng.hpp"

namespace hedb {

// Everything public that evaluation needs: the parameter set, the size cap
// x0, and the y vector for squash post-processing. Shared by all ciphertexts
// of one key so they can be combined without passing keys around.
struct CipherContext {
  SecurityParams params;
  mpz_class x0;               // 0 when size capping is unavailable
  std::vector<mpz_class> y;   // beta fixed-point values, empty when absent

  bool has_x0() const { return x0 != 0; }
  bool has_y() const { return !y.empty(); }
};

using CtxPtr = std::shared_ptr<const CipherContext>;

struct Ciphertext {
  mpz_class c;
  // Squash post-processing: z_i = (c * y_i) mod 2 truncated to frac_bits
  // fractional bits, stored as integers of frac_bits+1 bits.
  std::optional<std::vector<uint32_t>> z;
  // Conservative upper bound on the bit length of the centered residue
  // c mod p. Maintained without the key: fresh = n_bits, trivial = 1,
  // add -> max+1, mul -> sum.
  uint32_t noise_bits = 0;
  CtxPtr ctx;

  // True once the estimate no longer guarantees correct decryption.
  bool noise_exceeded() const {
    return ctx && noise_bits >= ctx->params.noise_limit();
  }
};

struct SecretKey {
  mpz_class p;
  SecurityParams params;
};

// The sparse-subset decryption hint. y is public (it rides with the
// context); s is secret and stays client-side.
struct SquashHint {
  std::vector<mpz_class> y;   // beta values, y_frac_bits fractional bits
  std::vector<uint8_t> s;     // beta indicator bits, hamming weight alpha
};

struct PublicKey {
  SecurityParams params;
  std::vector<mpz_class> zero_encs;  // 2*beta encryptions of zero; [0] = x0
  std::vector<mpz_class> y;
};

struct BootstrapKey {
  std::vector<Ciphertext> enc_s;  // beta encrypted bits of s
};

// Bundle returned by keygen. The context is what circulates with data; the
// secret parts never leave the client.
struct KeySet {
  SecurityParams params;
  SecretKey sk;
  SquashHint hint;
  PublicKey pk;
  BootstrapKey bk;
  CtxPtr ctx;
};

KeySet keygen(const SecurityParams& params, Rng& rng);

// Symmetric encryption: c = m' + p*q with m' a uniform n_bits-wide value of
// the same parity as m and q of exactly q_bits bits.
Ciphertext encrypt_bit(int m, const KeySet& keys, Rng& rng);

// Public-key encryption: c = m' + sum of a uniform subset of zero_encs,
// reduced mod x0. Noisier than symmetric mode; see public_fresh_noise_bits.
Ciphertext encrypt_bit_public(int m, const PublicKey& pk, const CtxPtr& ctx,
                              Rng& rng);
uint32_t public_fresh_noise_bits(const SecurityParams& params);

// Unencrypted constant injected into a circuit (c = 0 or 1, noise 1 bit).
Ciphertext trivial_bit(int m, const CtxPtr& ctx);

// Direct decryption: parity of the centered residue c mod p.
// Throws Error(NoiseOverflow) when the noise estimate no longer guarantees
// a correct result.
int decrypt_bit(const Ciphertext& ct, const SecretKey& sk);

// Squashed decryption: LSB(c) XOR LSB(round(sum of s_i * z_i)). Uses only
// the hint, not p. Requires z (see squash_postprocess).
int decrypt_bit_squashed(const Ciphertext& ct, const SquashHint& hint);

Ciphertext he_add(const Ciphertext& a, const Ciphertext& b);
Ciphertext he_mul(const Ciphertext& a, const Ciphertext& b);

// Populate ct.z from the context's y vector.
void squash_postprocess(Ciphertext& ct);

// Refresh: homomorphically evaluate squashed decryption over the encrypted
// s bits, producing a ciphertext of the same bit whose noise is a constant
// of the parameters alone. c's parity and the z values enter the circuit as
// trivial ciphertexts. Counts gates into the counters if given.
struct OpCounters;  // defined in gates.hpp
Ciphertext recrypt(const Ciphertext& ct, const BootstrapKey& bk,
                   OpCounters* counters = nullptr);

// The params-only output noise of recrypt (replays the gate sequence).
uint32_t recrypt_noise_bits(const SecurityParams& params);

// Bit length of the true centered residue |c mod p|; test/diagnostic use.
uint32_t noise_of(const Ciphertext& ct, const SecretKey& sk);

// Binary ciphertext form: flag byte (bit0 = z present), u32 big-endian byte
// length, big-endian magnitude, then beta z values packed big-endian and
// byte-aligned per value (frac_bits+1 bits each).
void serialize_ciphertext(const Ciphertext& ct, std::vector<uint8_t>& out);
size_t parse_ciphertext(const uint8_t* data, size_t len, size_t pos,
                        const CtxPtr& ctx, uint32_t noise_bits,
                        Ciphertext& out);

}  // namespace hedb

#endif  // HEDB_HE_HPP
