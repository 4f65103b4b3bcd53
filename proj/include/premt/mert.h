// mert.h -- n-best minimum error rate training of the log-linear weights.
#ifndef PREMT_MERT_H
#define PREMT_MERT_H

#include <cstdint>

#include "premt/corpus.h"
#include "premt/decoder.h"

namespace premt {

struct MertOptions {
  int nbest_size = 100;
  int rounds = 5;
  int restarts = 3;       // random-start coordinate passes per round
  std::uint64_t seed = 1;
  bool verbose = false;
};

// Iterative n-best approximation: decode the dev set with the current
// weights, accumulate the n-best lists, run exact coordinate-wise line
// searches maximizing (smoothed) corpus BLEU over the accumulated pool, and
// repeat. Returns the weights with the best decoded dev BLEU observed,
// the initial weights included.
LogLinearWeights tune_weights(const ParallelCorpus& dev, const DecoderConfig& base,
                              const LogLinearWeights& initial, const MertOptions& opts);

}  // namespace premt

#endif  // PREMT_MERT_H
