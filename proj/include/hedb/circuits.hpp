// Copyright 2026 the hedb authors
// SPDX-License-Identifier: Apache-2.0
//
// Blind query circuits: per-row match bits, running match counters,
// n-th-match selection, masked update/delete, count and sum aggregates, and
// the schoolbook multiplier used by the benchmarks.
//
// Everything is a template over an evaluator (see gates.hpp) so the same
// code runs on real ciphertexts (CipherEval) and on noise estimates
// (NoiseEval). Every gate executes unconditionally for a given shape:
// operation counts and noise growth depend only on row count and widths,
// never on the encrypted data.

#ifndef HEDB_CIRCUITS_HPP
#define HEDB_CIRCUITS_HPP

#include <cstdint>
#include <vector>

#include "hedb/error.hpp"
#include "hedb/gates.hpp"
#include "hedb/he.hpp"
#include "hedb/table.hpp"

namespace hedb {

enum class StatementKind : uint8_t {
  Select = 1,
  Update = 2,
  Delete = 3,
  Count = 4,
  Avg = 5,
};

enum class PredOp : uint8_t {
  Eq = 1,
  Lt = 2,
  Gt = 3,
  Pattern = 4,
};

const char* statement_kind_name(StatementKind kind);
const char* pred_op_name(PredOp op);

// Wildcard pattern shape. The mask is public (one flag per pattern
// character, 1 = literal, 0 = '?'); the literal characters themselves are
// encrypted. prefix_only records a final '*'.
struct PatternSpec {
  std::vector<uint8_t> mask;
  bool prefix_only = false;

  bool operator==(const PatternSpec&) const = default;
};

// Bit indices of a column word from most to least significant, as the
// comparator walks them: uint words from the top bit down; string words
// byte 0 first (leftmost character), high bit of each byte first.
std::vector<unsigned> significance_order(const ColumnSpec& spec);

// Evaluator over real ciphertexts. Counts every gate; optionally refreshes
// any result whose noise estimate crosses refresh_threshold (server-side
// bootstrapping), and can flip the result of one chosen addition so tests
// can prove the differential harness catches a miswired gate.
class CipherEval {
 public:
  using Bit = Ciphertext;
  static constexpr uint64_t kNoFault = ~uint64_t{0};

  explicit CipherEval(CtxPtr ctx) : ctx_(std::move(ctx)) {}

  Bit add(const Bit& a, const Bit& b);
  Bit mul(const Bit& a, const Bit& b);
  Bit triv(int m);

  OpCounters counters;
  const BootstrapKey* refresh_key = nullptr;
  uint32_t refresh_threshold = 0;  // 0 disables refresh
  uint64_t fault_add_index = kNoFault;

  const CtxPtr& ctx() const { return ctx_; }

 private:
  Bit after(Bit r);

  CtxPtr ctx_;
};

template <typename Ev>
using Word = std::vector<typename Ev::Bit>;

// The encrypted inputs of one predicate, shaped for an evaluator.
template <typename Ev>
struct PredicateInput {
  PredOp op = PredOp::Eq;
  Word<Ev> operand;                 // value word, or pattern literal chars
  std::vector<unsigned> sig_order;  // for Lt/Gt
  PatternSpec pattern;              // for Pattern
};

template <typename Ev>
Word<Ev> trivial_word(Ev& ev, unsigned width, unsigned long value = 0) {
  Word<Ev> out;
  out.reserve(width);
  for (unsigned j = 0; j < width; ++j)
    out.push_back(
        ev.triv(j < 64 ? static_cast<int>((value >> j) & 1u) : 0));
  return out;
}

// Equality match bit: product over every bit position of 1 ^ a_i ^ b_i.
template <typename Ev>
typename Ev::Bit eq_index(Ev& ev, const Word<Ev>& a, const Word<Ev>& b) {
  typename Ev::Bit acc{};
  bool first = true;
  for (size_t i = 0; i < a.size() && i < b.size(); ++i) {
    typename Ev::Bit f = ev.add(ev.add(ev.triv(1), a[i]), b[i]);
    acc = first ? std::move(f) : ev.mul(acc, f);
    first = false;
  }
  return first ? ev.triv(1) : acc;
}

// Less-than match bit (a < b), walking bits most-significant first: at each
// position, (1 ^ a_i) * b_i * [all higher bits equal].
template <typename Ev>
typename Ev::Bit lt_index(Ev& ev, const Word<Ev>& a, const Word<Ev>& b,
                          const std::vector<unsigned>& order) {
  typename Ev::Bit acc{};
  typename Ev::Bit pref{};
  bool first = true;
  for (unsigned i : order) {
    typename Ev::Bit na = ev.add(ev.triv(1), a[i]);
    typename Ev::Bit t = ev.mul(na, b[i]);
    typename Ev::Bit term = first ? std::move(t) : ev.mul(t, pref);
    acc = first ? std::move(term) : ev.add(acc, term);
    typename Ev::Bit e = ev.add(ev.add(ev.triv(1), a[i]), b[i]);
    pref = first ? std::move(e) : ev.mul(pref, e);
    first = false;
  }
  return first ? ev.triv(0) : acc;
}

// Wildcard match bit: equality factors for literal characters, none for
// '?', and — unless the pattern ended in '*' — zero-byte factors forcing
// the value to end where the pattern does.
template <typename Ev>
typename Ev::Bit pattern_index(Ev& ev, const Word<Ev>& col,
                               const Word<Ev>& lit, const PatternSpec& ps) {
  typename Ev::Bit acc{};
  bool first = true;
  auto factor = [&](typename Ev::Bit f) {
    acc = first ? std::move(f) : ev.mul(acc, f);
    first = false;
  };
  for (size_t t = 0; t < ps.mask.size(); ++t) {
    if (!ps.mask[t]) continue;
    for (unsigned k = 0; k < 8; ++k) {
      size_t i = 8 * t + k;
      factor(ev.add(ev.add(ev.triv(1), col[i]), lit[i]));
    }
  }
  if (!ps.prefix_only) {
    for (size_t i = 8 * ps.mask.size(); i < col.size(); ++i)
      factor(ev.add(ev.triv(1), col[i]));
  }
  return first ? ev.triv(1) : acc;
}

template <typename Ev>
typename Ev::Bit match_index(Ev& ev, const Word<Ev>& col,
                             const PredicateInput<Ev>& pred) {
  switch (pred.op) {
    case PredOp::Eq:
      return eq_index(ev, col, pred.operand);
    case PredOp::Lt:
      return lt_index(ev, col, pred.operand, pred.sig_order);
    case PredOp::Gt:
      return lt_index(ev, pred.operand, col, pred.sig_order);
    case PredOp::Pattern:
      return pattern_index(ev, col, pred.operand, pred.pattern);
  }
  throw Error(ErrorCode::Internal, "unknown predicate operator");
}

// Counter + 0/1 bit via a half-adder ripple; the carry out of the top bit
// is dropped (counter width is sized for the table's capacity, so it can
// never fire).
template <typename Ev>
Word<Ev> increment_counter(Ev& ev, const Word<Ev>& acc,
                           const typename Ev::Bit& bit) {
  Word<Ev> out;
  out.reserve(acc.size());
  typename Ev::Bit cin = bit;
  for (size_t j = 0; j < acc.size(); ++j) {
    out.push_back(ev.add(acc[j], cin));
    if (j + 1 < acc.size()) cin = ev.mul(acc[j], cin);
  }
  return out;
}

// Width of the counter compared against the encrypted n: at least the
// record width, so selecting costs strictly more per row than updating.
inline unsigned eta_width(unsigned record_bits) {
  return record_bits > kCounterBits ? record_bits : kCounterBits;
}

// Width of a sum-aggregate result over a target column of target_bits.
unsigned sum_result_width(unsigned target_bits);

// SELECT: the n-th matching record (1-based, storage order), or all zeros
// when fewer than n rows match. cols holds each row's predicate-column
// word, recs each row's full record; eta is the encrypted n at
// eta_width(record_bits).
template <typename Ev>
Word<Ev> select_nth_circuit(Ev& ev, const std::vector<Word<Ev>>& cols,
                            const std::vector<Word<Ev>>& recs,
                            unsigned record_bits,
                            const PredicateInput<Ev>& pred,
                            const Word<Ev>& eta) {
  const size_t rows = cols.size();
  std::vector<typename Ev::Bit> match;
  match.reserve(rows);
  for (size_t r = 0; r < rows; ++r)
    match.push_back(match_index(ev, cols[r], pred));

  // Running count of matches up to and including each row.
  std::vector<Word<Ev>> counts;
  counts.reserve(rows);
  Word<Ev> acc = trivial_word(ev, kCounterBits);
  for (size_t r = 0; r < rows; ++r) {
    acc = increment_counter(ev, acc, match[r]);
    counts.push_back(acc);
  }

  // Row r delivers the result iff it matches and its running count is n.
  std::vector<typename Ev::Bit> picked;
  picked.reserve(rows);
  for (size_t r = 0; r < rows; ++r) {
    Word<Ev> padded = counts[r];
    while (padded.size() < eta.size()) padded.push_back(ev.triv(0));
    picked.push_back(ev.mul(match[r], eq_index(ev, padded, eta)));
  }

  Word<Ev> res;
  bool first = true;
  for (size_t r = 0; r < rows; ++r) {
    Word<Ev> masked;
    masked.reserve(record_bits);
    for (unsigned j = 0; j < record_bits; ++j)
      masked.push_back(ev.mul(picked[r], recs[r][j]));
    if (first) {
      res = std::move(masked);
      first = false;
    } else {
      for (unsigned j = 0; j < record_bits; ++j)
        res[j] = ev.add(res[j], masked[j]);
    }
  }
  return first ? trivial_word(ev, record_bits) : res;
}

// UPDATE ... SET: every row becomes (1 ^ I) * old ^ I * new, so matching
// rows take the replacement record and the rest are unchanged.
template <typename Ev>
std::vector<Word<Ev>> update_circuit(Ev& ev,
                                     const std::vector<Word<Ev>>& cols,
                                     const std::vector<Word<Ev>>& recs,
                                     const PredicateInput<Ev>& pred,
                                     const Word<Ev>& replacement) {
  std::vector<Word<Ev>> out;
  out.reserve(cols.size());
  for (size_t r = 0; r < cols.size(); ++r) {
    typename Ev::Bit m = match_index(ev, cols[r], pred);
    typename Ev::Bit nm = ev.add(ev.triv(1), m);
    Word<Ev> row;
    row.reserve(replacement.size());
    for (size_t j = 0; j < replacement.size(); ++j)
      row.push_back(
          ev.add(ev.mul(nm, recs[r][j]), ev.mul(m, replacement[j])));
    out.push_back(std::move(row));
  }
  return out;
}

// DELETE: matching rows become all-zero records, others are unchanged.
template <typename Ev>
std::vector<Word<Ev>> delete_circuit(Ev& ev,
                                     const std::vector<Word<Ev>>& cols,
                                     const std::vector<Word<Ev>>& recs,
                                     const PredicateInput<Ev>& pred) {
  std::vector<Word<Ev>> out;
  out.reserve(cols.size());
  for (size_t r = 0; r < cols.size(); ++r) {
    typename Ev::Bit m = match_index(ev, cols[r], pred);
    typename Ev::Bit nm = ev.add(ev.triv(1), m);
    Word<Ev> row;
    row.reserve(recs[r].size());
    for (size_t j = 0; j < recs[r].size(); ++j)
      row.push_back(ev.mul(nm, recs[r][j]));
    out.push_back(std::move(row));
  }
  return out;
}

// COUNT(*): ripple the match bits into one counter word.
template <typename Ev>
Word<Ev> count_circuit(Ev& ev, const std::vector<Word<Ev>>& cols,
                       const PredicateInput<Ev>& pred) {
  Word<Ev> acc = trivial_word(ev, kCounterBits);
  for (size_t r = 0; r < cols.size(); ++r)
    acc = increment_counter(ev, acc, match_index(ev, cols[r], pred));
  return acc;
}

template <typename Ev>
struct AvgWords {
  Word<Ev> sum;    // sum_result_width(target_bits) bits
  Word<Ev> count;  // kCounterBits bits
};

// AVG: the encrypted (sum, count) pair; the client divides after
// decryption. The sum is built as one masked popcount per target bit —
// the same counter ripple as COUNT — then a balanced tree of adders over
// the shifted popcounts, sized by exact value bounds.
template <typename Ev>
AvgWords<Ev> avg_circuit(Ev& ev, const std::vector<Word<Ev>>& cols,
                         const std::vector<Word<Ev>>& targets,
                         unsigned target_bits,
                         const PredicateInput<Ev>& pred) {
  const size_t rows = cols.size();
  std::vector<typename Ev::Bit> match;
  match.reserve(rows);
  for (size_t r = 0; r < rows; ++r)
    match.push_back(match_index(ev, cols[r], pred));

  const unsigned long counter_cap = (1ul << kCounterBits) - 1;
  std::vector<BoundedWord<Ev>> items;
  items.reserve(target_bits);
  for (unsigned j = 0; j < target_bits; ++j) {
    Word<Ev> acc = trivial_word(ev, kCounterBits);
    for (size_t r = 0; r < rows; ++r)
      acc = increment_counter(ev, acc, ev.mul(match[r], targets[r][j]));
    BoundedWord<Ev> item;
    item.bits = trivial_word(ev, j);
    item.bits.insert(item.bits.end(), std::make_move_iterator(acc.begin()),
                     std::make_move_iterator(acc.end()));
    item.bound = counter_cap << j;
    items.push_back(std::move(item));
  }
  AvgWords<Ev> out;
  out.sum = tree_sum(ev, std::move(items));
  out.count = trivial_word(ev, kCounterBits);
  for (size_t r = 0; r < rows; ++r)
    out.count = increment_counter(ev, out.count, match[r]);
  return out;
}

// Schoolbook w x w -> 2w multiplier: per-bit partial products combined by
// the same balanced adder tree as the aggregates. Benchmarked directly.
template <typename Ev>
Word<Ev> product_circuit(Ev& ev, const Word<Ev>& a, const Word<Ev>& b) {
  const unsigned w = static_cast<unsigned>(a.size());
  const unsigned long base = (1ul << w) - 1;
  std::vector<BoundedWord<Ev>> parts;
  parts.reserve(w);
  for (unsigned i = 0; i < w; ++i) {
    BoundedWord<Ev> part;
    part.bits = trivial_word(ev, i);
    part.bits.reserve(i + w);
    for (unsigned j = 0; j < w; ++j) part.bits.push_back(ev.mul(a[i], b[j]));
    part.bound = base << i;
    parts.push_back(std::move(part));
  }
  return tree_sum(ev, std::move(parts));
}

// --- Table-level execution -------------------------------------------------

// One compiled statement, decrypted-operand-free, ready to run.
struct StatementInput {
  StatementKind kind = StatementKind::Select;
  size_t column_index = 0;  // predicate column
  PredOp op = PredOp::Eq;
  EncryptedWord operand;       // value word or pattern literal word
  PatternSpec pattern;         // op == Pattern
  EncryptedWord eta;           // Select: encrypted n
  EncryptedWord replacement;   // Update: full record, flattened
  size_t avg_column_index = 0;  // Avg: target column
};

struct ExecOptions {
  const BootstrapKey* refresh_key = nullptr;
  uint32_t refresh_threshold = 0;
  uint64_t fault_add_index = CipherEval::kNoFault;
};

struct ExecResult {
  // Select: the flattened record. Count: the counter word. Avg: sum+count.
  EncryptedWord record;
  EncryptedWord sum;
  EncryptedWord count;
  // Update/Delete: the rewritten rows (same shape as the table).
  std::vector<EncryptedRecord> new_rows;
  OpCounters counters;
};

// Validates shapes (ShapeMismatch) and runs the statement's circuit over
// the table.
ExecResult execute_statement(const EncryptedTable& table,
                             const StatementInput& input,
                             const ExecOptions& opts = {});

// Flat projections used by execute_statement and the tests.
std::vector<std::vector<Ciphertext>> column_words(const EncryptedTable& t,
                                                  size_t col);
std::vector<std::vector<Ciphertext>> flattened_rows(const EncryptedTable& t);
EncryptedRecord record_from_flat(std::vector<Ciphertext> bits,
                                 const TableSchema& schema);

}  // namespace hedb

#endif  // HEDB_CIRCUITS_HPP
