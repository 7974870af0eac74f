// Copyright 2026 the hedb authors
// SPDX-License-Identifier: Apache-2.0
//
// Gate-level building blocks shared by every homomorphic circuit.
//
// Circuits are written as templates over an evaluator with
//   using Bit = ...;
//   Bit add(Bit, Bit);   // XOR
//   Bit mul(Bit, Bit);   // AND
//   Bit triv(int);       // constant 0/1 as a trivial ciphertext
// One evaluator runs on real ciphertexts, another replays only the noise
// estimate (uint32_t per bit). Because both walk the same template, the
// noise budget a client computes before keygen is the executed circuit by
// construction, not a formula that can drift.

#ifndef HEDB_GATES_HPP
#define HEDB_GATES_HPP

#include <algorithm>
#include <cstdint>
#include <vector>

namespace hedb {

// Operation tallies for one blind execution.
struct OpCounters {
  uint64_t additions = 0;
  uint64_t multiplications = 0;
  uint64_t recrypts = 0;

  uint64_t total() const { return additions + multiplications; }
  bool operator==(const OpCounters&) const = default;
};

// Replays noise growth only: fresh = n_bits, trivial = 1, add -> max+1,
// mul -> sum. Mirrors the estimates real ciphertexts carry.
struct NoiseEval {
  unsigned n_bits;
  OpCounters counters;
  using Bit = uint32_t;
  Bit add(Bit a, Bit b) {
    ++counters.additions;
    return std::max(a, b) + 1;
  }
  Bit mul(Bit a, Bit b) {
    ++counters.multiplications;
    return a + b;
  }
  Bit triv(int) { return 1; }
  Bit fresh() { return n_bits; }
};

// Ripple of full-adder cells: sum = (a^b)^cin, carry = ab ^ (a^b)cin.
// Operands may be shorter than wout; missing bits enter as trivial zeros.
// wout must be wide enough for the value bound of a+b (carries beyond it
// would be silently dropped).
template <typename Ev>
std::vector<typename Ev::Bit> add_words(Ev& ev,
                                        const std::vector<typename Ev::Bit>& a,
                                        const std::vector<typename Ev::Bit>& b,
                                        unsigned wout) {
  std::vector<typename Ev::Bit> out;
  out.reserve(wout);
  typename Ev::Bit carry{};
  bool have_carry = false;
  for (unsigned j = 0; j < wout; ++j) {
    typename Ev::Bit x = j < a.size() ? a[j] : ev.triv(0);
    typename Ev::Bit y = j < b.size() ? b[j] : ev.triv(0);
    typename Ev::Bit t = ev.add(x, y);
    if (!have_carry) {
      out.push_back(t);
      carry = ev.mul(x, y);
      have_carry = true;
    } else {
      out.push_back(ev.add(t, carry));
      carry = ev.add(ev.mul(x, y), ev.mul(t, carry));
    }
  }
  return out;
}

// A word with the exact upper bound of its value, so tree combines can size
// output widths tightly (smaller widths mean shorter carry chains and less
// noise).
template <typename Ev>
struct BoundedWord {
  std::vector<typename Ev::Bit> bits;
  unsigned long bound = 0;
};

// Pairwise balanced-tree sum of bounded words. Sequential accumulation
// would feed every partial carry chain into the next and blows the noise
// exponentially; the tree keeps depth logarithmic.
template <typename Ev>
std::vector<typename Ev::Bit> tree_sum(Ev& ev,
                                       std::vector<BoundedWord<Ev>> items) {
  while (items.size() > 1) {
    std::vector<BoundedWord<Ev>> next;
    for (size_t i = 0; i + 1 < items.size(); i += 2) {
      unsigned long bound = items[i].bound + items[i + 1].bound;
      unsigned wout = 0;
      while ((1ul << wout) <= bound) ++wout;
      next.push_back(
          {add_words(ev, items[i].bits, items[i + 1].bits, wout), bound});
    }
    if (items.size() % 2) next.push_back(std::move(items.back()));
    items = std::move(next);
  }
  return std::move(items[0].bits);
}

}  // namespace hedb

#endif  // HEDB_GATES_HPP
