// Copyright 2026 the hedb authors
// SPDX-License-Identifier: Apache-2.0

#include "hedb/keyfile.hpp"

#include <sys/stat.h>

#include <fstream>
#include <sstream>

#include "hedb/error.hpp"

namespace hedb {

namespace {

std::string hex_of(const mpz_class& v) { return v.get_str(16); }

mpz_class hex_to_mpz(const std::string& s, const char* what) {
  mpz_class v;
  if (s.empty() || mpz_set_str(v.get_mpz_t(), s.c_str(), 16) != 0 || v < 0)
    throw Error(ErrorCode::KeyFormat,
                std::string("bad hex value for ") + what + ": '" + s + "'");
  return v;
}

std::string next_line(std::istream& in, const char* what) {
  std::string line;
  if (!std::getline(in, line))
    throw Error(ErrorCode::KeyFormat,
                std::string("key file ends before ") + what);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

void restrict_permissions(const std::string& path) {
  ::chmod(path.c_str(), S_IRUSR | S_IWUSR);
}

}  // namespace

void save_key_file(const KeySet& keys, const std::string& path) {
  std::ostringstream out;
  out << "HEDB-KEY v1\n";
  out << keys.params.lambda << "\n";
  out << hex_of(keys.sk.p) << "\n";
  out << keys.params.beta << " " << keys.params.alpha << " "
      << keys.params.frac_bits << "\n";
  for (const mpz_class& y : keys.hint.y) out << hex_of(y) << "\n";
  mpz_class s_packed = 0;
  for (size_t i = 0; i < keys.hint.s.size(); ++i)
    if (keys.hint.s[i]) mpz_setbit(s_packed.get_mpz_t(), i);
  out << hex_of(s_packed) << "\n";
  out << keys.pk.zero_encs.size() << "\n";
  for (const mpz_class& z : keys.pk.zero_encs) out << hex_of(z) << "\n";

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorCode::IoError, "cannot write key file: " + path);
  f << out.str();
  f.close();
  if (!f) throw Error(ErrorCode::IoError, "failed writing key file: " + path);
  restrict_permissions(path);
}

KeySet load_key_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::IoError, "cannot open key file: " + path);

  if (next_line(f, "magic") != "HEDB-KEY v1")
    throw Error(ErrorCode::KeyFormat, "not a key file (bad magic): " + path);

  unsigned lambda = 0;
  {
    std::istringstream ls(next_line(f, "lambda"));
    if (!(ls >> lambda))
      throw Error(ErrorCode::KeyFormat, "bad lambda line");
  }
  mpz_class p = hex_to_mpz(next_line(f, "p"), "p");
  if (p < 3 || mpz_even_p(p.get_mpz_t()))
    throw Error(ErrorCode::KeyFormat, "p must be an odd value >= 3");

  unsigned beta = 0, alpha = 0, frac = 0;
  {
    std::istringstream ls(next_line(f, "beta/alpha/frac_bits"));
    if (!(ls >> beta >> alpha >> frac))
      throw Error(ErrorCode::KeyFormat, "bad beta/alpha/frac_bits line");
  }

  SecurityParams params = SecurityParams::from_lambda(lambda);
  params.p_bits =
      static_cast<unsigned>(mpz_sizeinbase(p.get_mpz_t(), 2));
  params.alpha = alpha;
  params.beta = beta;
  params.frac_bits = frac;
  params.validate();

  KeySet keys;
  keys.params = params;
  keys.sk = SecretKey{p, params};

  keys.hint.y.resize(beta);
  for (unsigned i = 0; i < beta; ++i)
    keys.hint.y[i] = hex_to_mpz(next_line(f, "y value"), "y");

  mpz_class s_packed = hex_to_mpz(next_line(f, "s vector"), "s");
  keys.hint.s.assign(beta, 0);
  unsigned weight = 0;
  for (unsigned i = 0; i < beta; ++i) {
    keys.hint.s[i] = mpz_tstbit(s_packed.get_mpz_t(), i) ? 1 : 0;
    weight += keys.hint.s[i];
  }
  if (weight != alpha)
    throw Error(ErrorCode::KeyFormat, "s hamming weight does not equal alpha");

  size_t zero_count = 0;
  {
    std::istringstream ls(next_line(f, "zero_encs count"));
    if (!(ls >> zero_count) || zero_count == 0)
      throw Error(ErrorCode::KeyFormat, "bad zero_encs count");
  }
  keys.pk.params = params;
  keys.pk.y = keys.hint.y;
  keys.pk.zero_encs.resize(zero_count);
  for (size_t i = 0; i < zero_count; ++i)
    keys.pk.zero_encs[i] = hex_to_mpz(next_line(f, "zero enc"), "zero_encs");

  auto ctx = std::make_shared<CipherContext>();
  ctx->params = params;
  ctx->x0 = keys.pk.zero_encs[0];
  ctx->y = keys.hint.y;
  keys.ctx = ctx;
  return keys;
}

BootstrapKey make_bootstrap_key(const KeySet& keys, Rng& rng) {
  BootstrapKey bk;
  bk.enc_s.reserve(keys.params.beta);
  for (unsigned i = 0; i < keys.params.beta; ++i)
    bk.enc_s.push_back(encrypt_bit(keys.hint.s[i], keys, rng));
  return bk;
}

void save_bootstrap_bundle(const KeySet& keys, const BootstrapKey& bk,
                           const std::string& path) {
  if (bk.enc_s.size() != keys.params.beta)
    throw Error(ErrorCode::BootstrapUnavailable,
                "bootstrap key does not match parameters");
  std::ostringstream out;
  out << "HEDB-BSK v1\n";
  out << keys.params.lambda << "\n";
  out << keys.params.p_bits << " " << keys.params.q_bits << " "
      << keys.params.alpha << " " << keys.params.beta << " "
      << keys.params.frac_bits << "\n";
  out << hex_of(keys.ctx->x0) << "\n";
  for (const mpz_class& y : keys.hint.y) out << hex_of(y) << "\n";
  for (const Ciphertext& ct : bk.enc_s) out << hex_of(ct.c) << "\n";

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorCode::IoError, "cannot write bundle: " + path);
  f << out.str();
  f.close();
  if (!f) throw Error(ErrorCode::IoError, "failed writing bundle: " + path);
}

BootstrapBundle load_bootstrap_bundle(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::IoError, "cannot open bundle: " + path);
  if (next_line(f, "magic") != "HEDB-BSK v1")
    throw Error(ErrorCode::KeyFormat, "not a bootstrap bundle: " + path);

  unsigned lambda = 0;
  {
    std::istringstream ls(next_line(f, "lambda"));
    if (!(ls >> lambda)) throw Error(ErrorCode::KeyFormat, "bad lambda line");
  }
  unsigned p_bits = 0, q_bits = 0, alpha = 0, beta = 0, frac = 0;
  {
    std::istringstream ls(next_line(f, "parameter line"));
    if (!(ls >> p_bits >> q_bits >> alpha >> beta >> frac))
      throw Error(ErrorCode::KeyFormat, "bad parameter line");
  }
  SecurityParams params = SecurityParams::from_lambda(lambda);
  params.p_bits = p_bits;
  params.alpha = alpha;
  params.beta = beta;
  params.frac_bits = frac;
  params.validate();
  if (params.q_bits != q_bits)
    throw Error(ErrorCode::KeyFormat, "q_bits does not match lambda");

  BootstrapBundle bundle;
  bundle.params = params;
  auto ctx = std::make_shared<CipherContext>();
  ctx->params = params;
  ctx->x0 = hex_to_mpz(next_line(f, "x0"), "x0");
  ctx->y.resize(beta);
  for (unsigned i = 0; i < beta; ++i)
    ctx->y[i] = hex_to_mpz(next_line(f, "y value"), "y");
  bundle.ctx = ctx;

  bundle.bk.enc_s.resize(beta);
  for (unsigned i = 0; i < beta; ++i) {
    Ciphertext& ct = bundle.bk.enc_s[i];
    ct.c = hex_to_mpz(next_line(f, "encrypted s bit"), "enc_s");
    ct.noise_bits = params.n_bits;
    ct.ctx = bundle.ctx;
  }
  return bundle;
}

}  // namespace hedb
