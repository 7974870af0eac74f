// Copyright 2026 the hedb authors
// SPDX-License-Identifier: Apache-2.0

#include "hedb/estimate.hpp"

#include <algorithm>

namespace hedb {

namespace {

using NWord = Word<NoiseEval>;

NWord uniform_word(unsigned width, uint32_t noise) {
  return NWord(width, noise);
}

uint32_t word_max(const NWord& w) {
  uint32_t m = 0;
  for (uint32_t b : w) m = std::max(m, b);
  return m;
}

PredicateInput<NoiseEval> shaped_predicate(const StatementShape& shape,
                                           uint32_t fresh) {
  PredicateInput<NoiseEval> pred;
  pred.op = shape.op;
  if (shape.op == PredOp::Pattern) {
    pred.operand = uniform_word(8 * shape.pattern_chars, fresh);
    pred.pattern.prefix_only = shape.prefix_only;
    pred.pattern.mask.assign(shape.pattern_chars, 0);
    for (unsigned i = 0; i < shape.pattern_literals && i < shape.pattern_chars;
         ++i)
      pred.pattern.mask[i] = 1;
  } else {
    pred.operand = uniform_word(shape.operand_bits, fresh);
    if (shape.op == PredOp::Lt || shape.op == PredOp::Gt) {
      // Only the walk length matters for noise and counts, not the
      // permutation itself.
      pred.sig_order.reserve(shape.operand_bits);
      for (unsigned i = shape.operand_bits; i-- > 0;)
        pred.sig_order.push_back(i);
    }
  }
  return pred;
}

}  // namespace

StatementEstimate estimate_statement(const SecurityParams& params,
                                     const StatementShape& shape) {
  NoiseEval ev{params.n_bits, {}};
  const uint32_t fresh = params.n_bits;
  const uint32_t cell = shape.cell_noise ? shape.cell_noise : fresh;

  const std::vector<NWord> cols(shape.rows,
                                uniform_word(shape.operand_bits, cell));
  const PredicateInput<NoiseEval> pred = shaped_predicate(shape, fresh);

  StatementEstimate est;
  switch (shape.kind) {
    case StatementKind::Select: {
      const std::vector<NWord> recs(shape.rows,
                                    uniform_word(shape.record_bits, cell));
      const NWord eta = uniform_word(eta_width(shape.record_bits), fresh);
      est.out_noise = word_max(select_nth_circuit(
          ev, cols, recs, shape.record_bits, pred, eta));
      break;
    }
    case StatementKind::Update: {
      const std::vector<NWord> recs(shape.rows,
                                    uniform_word(shape.record_bits, cell));
      const NWord u = uniform_word(shape.record_bits, fresh);
      uint32_t worst = 0;
      for (const NWord& row : update_circuit(ev, cols, recs, pred, u))
        worst = std::max(worst, word_max(row));
      est.out_noise = worst;
      break;
    }
    case StatementKind::Delete: {
      const std::vector<NWord> recs(shape.rows,
                                    uniform_word(shape.record_bits, cell));
      uint32_t worst = 0;
      for (const NWord& row : delete_circuit(ev, cols, recs, pred))
        worst = std::max(worst, word_max(row));
      est.out_noise = worst;
      break;
    }
    case StatementKind::Count: {
      est.out_noise = word_max(count_circuit(ev, cols, pred));
      break;
    }
    case StatementKind::Avg: {
      const std::vector<NWord> targets(shape.rows,
                                       uniform_word(shape.avg_bits, cell));
      AvgWords<NoiseEval> words =
          avg_circuit(ev, cols, targets, shape.avg_bits, pred);
      est.out_noise = std::max(word_max(words.sum), word_max(words.count));
      break;
    }
  }
  est.counters = ev.counters;
  return est;
}

uint32_t workload_noise(unsigned n_bits, const WorkloadEnvelope& env) {
  SecurityParams params{};
  params.n_bits = n_bits;

  uint32_t worst = 0;
  // Gt mirrors Lt and a pattern is never noisier than the equality over
  // the same column, so Eq and Lt bound all four operators.
  for (PredOp op : {PredOp::Eq, PredOp::Lt}) {
    for (StatementKind kind :
         {StatementKind::Select, StatementKind::Update, StatementKind::Delete,
          StatementKind::Count, StatementKind::Avg}) {
      StatementShape shape;
      shape.kind = kind;
      shape.op = op;
      shape.rows = env.rows;
      shape.operand_bits = env.operand_bits;
      shape.record_bits = env.record_bits;
      shape.avg_bits = env.avg_bits;
      worst = std::max(worst, estimate_statement(params, shape).out_noise);
    }
  }
  return worst;
}

StatementEstimate estimate_product(const SecurityParams& params, unsigned w) {
  NoiseEval ev{params.n_bits, {}};
  const NWord a = uniform_word(w, params.n_bits);
  const NWord b = uniform_word(w, params.n_bits);
  StatementEstimate est;
  est.out_noise = word_max(product_circuit(ev, a, b));
  est.counters = ev.counters;
  return est;
}

}  // namespace hedb
