// Internals shared between the graph and the beam decoder.
#ifndef PREMT_NMT_INTERNAL_H
#define PREMT_NMT_INTERNAL_H

#include "premt/nmt.h"

namespace premt::detail {

struct DecoderStep {
  Vector alpha;
  Vector ctx;
  Vector state;
  Vector probs;  // softmax over the target vocabulary
};

DecoderStep decoder_step(const Seq2SeqParams& p, const Vector& s_prev, int prev_id,
                         const Matrix& ann, const Matrix& UaA);

Vector initial_state(const Seq2SeqParams& p, const Matrix& ann);

}  // namespace premt::detail

#endif  // PREMT_NMT_INTERNAL_H
