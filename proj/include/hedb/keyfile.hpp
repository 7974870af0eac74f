// Copyright 2026 the hedb authors
// SPDX-License-Identifier: Apache-2.0

#ifndef HEDB_KEYFILE_HPP
#define HEDB_KEYFILE_HPP

#include <string>

#include "hedb/he.hpp"

namespace hedb {

// Versioned text key file:
//   line 1: magic "HEDB-KEY v1"
//   line 2: lambda (decimal)
//   line 3: p (lowercase hex)
//   line 4: beta alpha frac_bits
//   beta lines of y_i (fixed-point hex)
//   s bit-vector as hex (bit i of the value = s_i)
//   zero_encs count, then that many hex lines (element 0 is x0)
// p's bit length is recovered from the hex value itself, so keys with a
// widened modulus round-trip without extra fields.
void save_key_file(const KeySet& keys, const std::string& path);

// Loads everything except the bootstrap key (which is not stored; it can be
// regenerated from the secret bits at any time with make_bootstrap_key).
KeySet load_key_file(const std::string& path);

// Fresh encryptions of the sparse-subset bits under the same key.
BootstrapKey make_bootstrap_key(const KeySet& keys, Rng& rng);

// Key-free bundle handed to a server for refresh support: parameters, x0,
// the y vector, and the encrypted s bits. Text format "HEDB-BSK v1".
void save_bootstrap_bundle(const KeySet& keys, const BootstrapKey& bk,
                           const std::string& path);

struct BootstrapBundle {
  SecurityParams params;
  CtxPtr ctx;
  BootstrapKey bk;
};

BootstrapBundle load_bootstrap_bundle(const std::string& path);

}  // namespace hedb

#endif  // HEDB_KEYFILE_HPP
