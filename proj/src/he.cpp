// Copyright 2026 the hedb authors
// SPDX-License-Identifier: Apache-2.0

#include "hedb/he.hpp"

#include <algorithm>
#include <cassert>

#include "hedb/bytes.hpp"
#include "hedb/error.hpp"
#include "hedb/gates.hpp"

namespace hedb {

namespace {

// m' = 2r + m: uniform over n_bits-wide values of m's parity.
mpz_class draw_noise(int m, unsigned n_bits, Rng& rng) {
  mpz_class r = rng.bits(n_bits - 1);
  return 2 * r + m;
}

Ciphertext encrypt_with(const mpz_class& p, const SecurityParams& params,
                        const CtxPtr& ctx, int m, Rng& rng) {
  if (m != 0 && m != 1)
    throw Error(ErrorCode::Internal, "plaintext bit must be 0 or 1");
  Ciphertext ct;
  ct.c = draw_noise(m, params.n_bits, rng) + p * rng.exact_bits(params.q_bits);
  ct.noise_bits = params.n_bits;
  ct.ctx = ctx;
  return ct;
}

// Centered residue of c mod p, in (-p/2, p/2].
mpz_class centered_mod(const mpz_class& c, const mpz_class& p) {
  mpz_class r;
  mpz_mod(r.get_mpz_t(), c.get_mpz_t(), p.get_mpz_t());  // r in [0, p)
  if (2 * r > p) r -= p;
  return r;
}

}  // namespace

KeySet keygen(const SecurityParams& params, Rng& rng) {
  params.validate();
  KeySet keys;
  keys.params = params;

  // Secret odd modulus of exactly p_bits bits.
  mpz_class p = rng.exact_bits(params.p_bits);
  mpz_setbit(p.get_mpz_t(), 0);
  keys.sk = SecretKey{p, params};

  // Squash hint. The y values approximate so that sum_{i in S} y_i = 1/p
  // (mod 2) to within 2^(-y_frac+1). That precision has to exceed the bit
  // length of any ciphertext: the subset-sum error gets multiplied by c
  // inside LSB(round(sum s_i z_i)), so frac_bits alone (which only controls
  // the z truncation) would make squashed decryption garbage.
  const unsigned yf = params.y_frac_bits();
  mpz_class two_pow_yf = mpz_class(1) << yf;
  mpz_class y_mod = two_pow_yf * 2;  // y values live in [0, 2)

  keys.hint.s.assign(params.beta, 0);
  {
    // Random alpha-subset of {0..beta-1}.
    std::vector<unsigned> idx(params.beta);
    for (unsigned i = 0; i < params.beta; ++i) idx[i] = i;
    for (unsigned i = 0; i < params.alpha; ++i) {
      unsigned j = i + static_cast<unsigned>(rng.below_u64(params.beta - i));
      std::swap(idx[i], idx[j]);
      keys.hint.s[idx[i]] = 1;
    }
  }

  keys.hint.y.resize(params.beta);
  unsigned solved = params.beta;  // in-subset index solved for exactness
  for (unsigned i = 0; i < params.beta; ++i) {
    if (keys.hint.s[i] && solved == params.beta) {
      solved = i;
      continue;
    }
    keys.hint.y[i] = rng.below(y_mod);
  }
  {
    // Nearest fixed-point approximation of 1/p, then solve the remaining
    // subset element so the subset sum hits it exactly (mod 2).
    mpz_class target = (two_pow_yf * 2 + p) / (2 * p);  // round(2^yf / p)
    mpz_class others = 0;
    for (unsigned i = 0; i < params.beta; ++i)
      if (keys.hint.s[i] && i != solved) others += keys.hint.y[i];
    mpz_class v = (target - others) % y_mod;
    if (v < 0) v += y_mod;
    keys.hint.y[solved] = v;
  }

  // Public zero encryptions. Element 0 is the exact multiple x0 = p*q0 used
  // as the reduction modulus; the rest carry random even noise.
  mpz_class x0 = p * rng.exact_bits(params.q_bits);
  keys.pk.params = params;
  keys.pk.y = keys.hint.y;
  keys.pk.zero_encs.resize(2 * params.beta);
  keys.pk.zero_encs[0] = x0;
  for (unsigned i = 1; i < 2 * params.beta; ++i)
    keys.pk.zero_encs[i] =
        2 * rng.bits(params.n_bits - 1) + p * rng.exact_bits(params.q_bits);

  auto ctx = std::make_shared<CipherContext>();
  ctx->params = params;
  ctx->x0 = x0;
  ctx->y = keys.hint.y;
  keys.ctx = ctx;

  // Encrypted s bits for refresh.
  keys.bk.enc_s.reserve(params.beta);
  for (unsigned i = 0; i < params.beta; ++i)
    keys.bk.enc_s.push_back(
        encrypt_with(p, params, ctx, keys.hint.s[i], rng));

  return keys;
}

Ciphertext encrypt_bit(int m, const KeySet& keys, Rng& rng) {
  return encrypt_with(keys.sk.p, keys.params, keys.ctx, m, rng);
}

uint32_t public_fresh_noise_bits(const SecurityParams& params) {
  // Worst case: own noise plus every zero encryption's even noise.
  mpz_class worst = (mpz_class(1) << params.n_bits) - 1;
  worst += mpz_class(2 * params.beta - 1) *
           ((mpz_class(1) << params.n_bits) - 2);
  return static_cast<uint32_t>(mpz_sizeinbase(worst.get_mpz_t(), 2));
}

Ciphertext encrypt_bit_public(int m, const PublicKey& pk, const CtxPtr& ctx,
                              Rng& rng) {
  if (m != 0 && m != 1)
    throw Error(ErrorCode::Internal, "plaintext bit must be 0 or 1");
  Ciphertext ct;
  ct.c = draw_noise(m, pk.params.n_bits, rng);
  for (const mpz_class& z : pk.zero_encs)
    if (rng.bit()) ct.c += z;
  if (ctx && ctx->has_x0())
    mpz_mod(ct.c.get_mpz_t(), ct.c.get_mpz_t(), ctx->x0.get_mpz_t());
  ct.noise_bits = public_fresh_noise_bits(pk.params);
  ct.ctx = ctx;
  return ct;
}

Ciphertext trivial_bit(int m, const CtxPtr& ctx) {
  Ciphertext ct;
  ct.c = m;
  ct.noise_bits = 1;
  ct.ctx = ctx;
  return ct;
}

int decrypt_bit(const Ciphertext& ct, const SecretKey& sk) {
  if (ct.noise_bits >= sk.params.noise_limit())
    throw Error(ErrorCode::NoiseOverflow,
                "noise estimate " + std::to_string(ct.noise_bits) +
                    " reached the limit for p_bits=" +
                    std::to_string(sk.params.p_bits) +
                    "; decryption is unreliable");
  mpz_class r = centered_mod(ct.c, sk.p);
  mpz_class a = abs(r);
  return mpz_odd_p(a.get_mpz_t()) ? 1 : 0;
}

int decrypt_bit_squashed(const Ciphertext& ct, const SquashHint& hint) {
  if (!ct.z)
    throw Error(ErrorCode::BootstrapUnavailable,
                "ciphertext carries no squash data");
  if (ct.z->size() != hint.s.size())
    throw Error(ErrorCode::WidthMismatch, "z length does not match hint");
  const unsigned frac = ct.ctx->params.frac_bits;
  uint64_t sum = 0;
  for (size_t i = 0; i < hint.s.size(); ++i)
    if (hint.s[i]) sum += (*ct.z)[i];
  uint64_t rounded = (sum + (uint64_t(1) << (frac - 1))) >> frac;
  int lsb_c = mpz_tstbit(ct.c.get_mpz_t(), 0);
  return lsb_c ^ static_cast<int>(rounded & 1);
}

namespace {

CtxPtr common_ctx(const Ciphertext& a, const Ciphertext& b) {
  if (a.ctx && b.ctx && a.ctx != b.ctx && a.ctx->params != b.ctx->params)
    throw Error(ErrorCode::Internal, "operands from different key contexts");
  return a.ctx ? a.ctx : b.ctx;
}

void finish_op(Ciphertext& out) {
  if (out.ctx && out.ctx->has_x0())
    mpz_mod(out.c.get_mpz_t(), out.c.get_mpz_t(), out.ctx->x0.get_mpz_t());
  // Whether z survives an operation follows the operands: recompute it from
  // the new c when either side carried it and y is available.
}

}  // namespace

Ciphertext he_add(const Ciphertext& a, const Ciphertext& b) {
  Ciphertext out;
  out.ctx = common_ctx(a, b);
  out.c = a.c + b.c;
  out.noise_bits = std::max(a.noise_bits, b.noise_bits) + 1;
  finish_op(out);
  if ((a.z || b.z) && out.ctx && out.ctx->has_y()) squash_postprocess(out);
  return out;
}

Ciphertext he_mul(const Ciphertext& a, const Ciphertext& b) {
  Ciphertext out;
  out.ctx = common_ctx(a, b);
  out.c = a.c * b.c;
  out.noise_bits = a.noise_bits + b.noise_bits;
  finish_op(out);
  if ((a.z || b.z) && out.ctx && out.ctx->has_y()) squash_postprocess(out);
  return out;
}

void squash_postprocess(Ciphertext& ct) {
  if (!ct.ctx || !ct.ctx->has_y())
    throw Error(ErrorCode::BootstrapUnavailable, "context has no y vector");
  const SecurityParams& params = ct.ctx->params;
  const unsigned yf = params.y_frac_bits();
  std::vector<uint32_t> z(ct.ctx->y.size());
  mpz_class t;
  for (size_t i = 0; i < ct.ctx->y.size(); ++i) {
    t = ct.c * ct.ctx->y[i];
    // Keep (c*y_i) mod 2 — one integer bit plus the fraction — then drop
    // fractional precision down to frac_bits.
    mpz_fdiv_r_2exp(t.get_mpz_t(), t.get_mpz_t(), yf + 1);
    mpz_fdiv_q_2exp(t.get_mpz_t(), t.get_mpz_t(), yf - params.frac_bits);
    z[i] = static_cast<uint32_t>(t.get_ui());
  }
  ct.z = std::move(z);
}

// ---------------------------------------------------------------------------
// Refresh circuit. Shared between the real evaluation and the params-only
// noise replay so the advertised constant is the executed circuit, not a
// hand-derived formula.

namespace {

// Evaluator on real ciphertexts, counting gates.
struct GateEval {
  CtxPtr ctx;
  OpCounters* counters;
  using Bit = Ciphertext;
  Bit add(const Bit& a, const Bit& b) {
    if (counters) ++counters->additions;
    return he_add(a, b);
  }
  Bit mul(const Bit& a, const Bit& b) {
    if (counters) ++counters->multiplications;
    return he_mul(a, b);
  }
  Bit triv(int m) { return trivial_bit(m, ctx); }
};

// The refresh computation: bit = LSB(c) ^ LSB(round(sum s_i z_i)), with the
// s_i encrypted and everything else entering as trivial constants. Every
// gate runs unconditionally so the gate count depends only on beta and
// frac_bits, never on the data.
template <typename Ev>
typename Ev::Bit recrypt_circuit(Ev& ev,
                                 const std::vector<typename Ev::Bit>& enc_s,
                                 const std::vector<uint32_t>& z,
                                 unsigned frac, int lsb_c) {
  std::vector<BoundedWord<Ev>> items;
  items.reserve(enc_s.size() + 1);
  for (size_t i = 0; i < enc_s.size(); ++i) {
    BoundedWord<Ev> w;
    w.bits.reserve(frac + 1);
    for (unsigned j = 0; j <= frac; ++j)
      w.bits.push_back(ev.mul(enc_s[i], ev.triv((z[i] >> j) & 1)));
    w.bound = (1ul << (frac + 1)) - 1;
    items.push_back(std::move(w));
  }
  {
    // Rounding constant 2^(frac-1), so LSB(round(x)) = bit frac of x + rc.
    BoundedWord<Ev> w;
    unsigned long rc = 1ul << (frac - 1);
    for (unsigned j = 0; j <= frac + 1; ++j)
      w.bits.push_back(ev.triv((rc >> j) & 1));
    w.bound = rc;
    items.push_back(std::move(w));
  }
  auto total = tree_sum(ev, std::move(items));
  return ev.add(total[frac], ev.triv(lsb_c));
}

}  // namespace

Ciphertext recrypt(const Ciphertext& ct, const BootstrapKey& bk,
                   OpCounters* counters) {
  if (bk.enc_s.empty())
    throw Error(ErrorCode::BootstrapUnavailable, "no bootstrap key loaded");
  if (!ct.ctx)
    throw Error(ErrorCode::BootstrapUnavailable, "ciphertext has no context");
  if (ct.noise_bits >= ct.ctx->params.noise_limit())
    throw Error(ErrorCode::NoiseOverflow,
                "input is already past the decryptable range");

  Ciphertext in = ct;
  if (!in.z) squash_postprocess(in);

  GateEval ev{ct.ctx, counters};
  if (counters) ++counters->recrypts;
  int lsb_c = mpz_tstbit(in.c.get_mpz_t(), 0);
  Ciphertext out = recrypt_circuit(ev, bk.enc_s, *in.z,
                                   ct.ctx->params.frac_bits, lsb_c);
  squash_postprocess(out);
  return out;
}

uint32_t recrypt_noise_bits(const SecurityParams& params) {
  NoiseEval ev{params.n_bits, {}};
  std::vector<uint32_t> enc_s(params.beta, params.n_bits);
  std::vector<uint32_t> z(params.beta, 0);
  return recrypt_circuit(ev, enc_s, z, params.frac_bits, 0);
}

uint32_t noise_of(const Ciphertext& ct, const SecretKey& sk) {
  mpz_class r = centered_mod(ct.c, sk.p);
  if (r == 0) return 0;
  mpz_class a = abs(r);
  return static_cast<uint32_t>(mpz_sizeinbase(a.get_mpz_t(), 2));
}

void serialize_ciphertext(const Ciphertext& ct, std::vector<uint8_t>& out) {
  put_u8(out, ct.z ? 1 : 0);
  std::vector<uint8_t> mag = mpz_to_bytes(ct.c);
  put_u32(out, static_cast<uint32_t>(mag.size()));
  out.insert(out.end(), mag.begin(), mag.end());
  if (ct.z) {
    const unsigned frac = ct.ctx->params.frac_bits;
    const unsigned nbytes = (frac + 1 + 7) / 8;
    for (uint32_t v : *ct.z)
      for (int s = static_cast<int>(nbytes) * 8 - 8; s >= 0; s -= 8)
        put_u8(out, static_cast<uint8_t>(v >> s));
  }
}

size_t parse_ciphertext(const uint8_t* data, size_t len, size_t pos,
                        const CtxPtr& ctx, uint32_t noise_bits,
                        Ciphertext& out) {
  ByteReader r(data, len);
  r.pos = pos;
  uint8_t flags = r.u8();
  if (flags > 1)
    throw Error(ErrorCode::MalformedHeader, "bad ciphertext flag byte", pos);
  uint32_t n = r.u32();
  r.need(n);
  out.c = mpz_from_bytes(data + r.pos, n);
  r.pos += n;
  out.z.reset();
  if (flags & 1) {
    if (!ctx)
      throw Error(ErrorCode::MalformedHeader,
                  "z data present but no parameters known", pos);
    const unsigned frac = ctx->params.frac_bits;
    const unsigned nbytes = (frac + 1 + 7) / 8;
    std::vector<uint32_t> z(ctx->params.beta);
    for (uint32_t& v : z) {
      v = 0;
      for (unsigned b = 0; b < nbytes; ++b) v = (v << 8) | r.u8();
    }
    out.z = std::move(z);
  }
  out.noise_bits = noise_bits;
  out.ctx = ctx;
  return r.pos;
}

}  // namespace hedb
