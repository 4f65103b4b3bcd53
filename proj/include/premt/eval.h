// eval.h -- corpus BLEU and the frequency-bucketed rare-word analysis.
#ifndef PREMT_EVAL_H
#define PREMT_EVAL_H

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "premt/corpus.h"

namespace premt {

inline constexpr int kBleuMaxOrder = 4;

// Additive sufficient statistics for corpus BLEU.
struct BleuStats {
  std::array<std::int64_t, kBleuMaxOrder> matches{};  // clipped n-gram matches
  std::array<std::int64_t, kBleuMaxOrder> totals{};   // hypothesis n-gram counts
  std::int64_t hyp_len = 0;
  std::int64_t ref_len = 0;

  BleuStats& operator+=(const BleuStats& other);
};

BleuStats bleu_sentence_stats(const Sentence& hyp, const Sentence& ref);

struct BleuReport {
  double bleu = 0.0;                              // in [0,1]
  std::array<double, kBleuMaxOrder> precisions{};
  double brevity_penalty = 0.0;
  std::int64_t hyp_len = 0;
  std::int64_t ref_len = 0;
};

// Unsmoothed corpus BLEU: a zero n-gram precision annihilates the score.
BleuReport bleu_from_stats(const BleuStats& stats);
BleuReport bleu(const std::vector<Sentence>& hypotheses,
                const std::vector<Sentence>& references);

// Smoothed variant used only as the tuning objective: add-1 on the numerator
// and denominator of every precision of order > 1.
double bleu_smoothed_from_stats(const BleuStats& stats);
double sentence_bleu_smoothed(const Sentence& hyp, const Sentence& ref);

// Replaces every token whose training count is < threshold by the UNK
// literal. UNK itself is never re-replaced (idempotence).
Sentence unk_replace(const Sentence& sentence, const Vocabulary& counts,
                     std::int64_t threshold);
std::vector<Sentence> unk_replace(const std::vector<Sentence>& sentences,
                                  const Vocabulary& counts, std::int64_t threshold);

struct NamedSystem {
  std::string name;
  std::vector<Sentence> hypotheses;
};

struct FrequencySweepCell {
  double bleu = 0.0;
  double normalized = 0.0;
  bool normalized_available = true;
};

struct FrequencyBucketReport {
  std::vector<std::int64_t> thresholds;
  std::vector<std::string> systems;
  // cells[t][s]: system s at threshold t.
  std::vector<std::vector<FrequencySweepCell>> cells;
  // UNK tokens in the replaced references, per threshold.
  std::vector<std::int64_t> unk_counts;

  // Columns: N, system, bleu, normalized, unk_count.
  std::string to_tsv() const;
};

FrequencyBucketReport frequency_sweep(const std::vector<NamedSystem>& systems,
                                      const std::vector<Sentence>& references,
                                      const Vocabulary& counts,
                                      const std::vector<std::int64_t>& thresholds,
                                      const std::string& normalize_to);

}  // namespace premt

#endif  // PREMT_EVAL_H
