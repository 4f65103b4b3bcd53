// decoder.h -- phrase-based stack decoding with a log-linear model.
#ifndef PREMT_DECODER_H
#define PREMT_DECODER_H

#include <string>
#include <vector>

#include "premt/corpus.h"
#include "premt/lm.h"
#include "premt/phrase_table.h"

namespace premt {

// Feature order of the assembled decoder model: the five per-phrase table
// features, then word penalty (target length), LM log probability,
// distortion cost sum |start - previous_end - 1|, and the OOV copy count.
inline const std::vector<std::string> kDecoderFeatureNames = {
    "log_p_tgt_given_src", "log_p_src_given_tgt",  "log_lex_tgt_given_src",
    "log_lex_src_given_tgt", "phrase_penalty",     "word_penalty",
    "lm",                  "distortion",           "oov_penalty"};

struct LogLinearWeights {
  std::vector<double> lambdas;

  static LogLinearWeights defaults();

  double& operator[](std::size_t i) { return lambdas[i]; }
  double operator[](std::size_t i) const { return lambdas[i]; }
  std::size_t size() const { return lambdas.size(); }

  // "name<TAB>value" per line, decoder feature order.
  std::string serialize() const;
  static LogLinearWeights deserialize(const std::string& content);
  void save(const std::string& path) const;
  static LogLinearWeights load(const std::string& path);
};

struct DecoderConfig {
  const PhraseTable* table = nullptr;
  const NGramModel* lm = nullptr;
  LogLinearWeights weights = LogLinearWeights::defaults();
  int beam_size = 10;
  int distortion_limit = -1;  // < 0 means unlimited
  int nbest_size = 1;
};

// One phrase application: source span [begin, end), emitted target tokens,
// and whether this was an out-of-vocabulary copy-through.
struct PhraseApplication {
  int src_begin = 0;
  int src_end = 0;
  Sentence target;
  std::vector<double> table_features;  // empty for OOV copies
  bool oov = false;
};

using Derivation = std::vector<PhraseApplication>;

// Aggregated feature vector of a derivation, in kDecoderFeatureNames order.
std::vector<double> derivation_features(const Derivation& derivation,
                                        const NGramModel& lm);
double score_derivation(const Derivation& derivation, const DecoderConfig& config);

struct ScoredTranslation {
  Sentence translation;
  double score = 0.0;
  std::vector<double> features;  // kDecoderFeatureNames order
};

struct DecodeResult {
  Sentence translation;
  double score = 0.0;                    // unnormalized log-linear numerator
  std::vector<ScoredTranslation> nbest;  // distinct target strings, best first
  Derivation derivation;
};

// Stack decoding organized by number of covered source words. Hypotheses are
// extended by phrases whose start position is within distortion_limit of the
// previous phrase end; source words without any table entry are copied
// verbatim as single-word phrases. If a finite distortion limit leaves no
// completable hypothesis, the sentence is re-decoded monotonically.
DecodeResult decode(const Sentence& sentence, const DecoderConfig& config);

}  // namespace premt

#endif  // PREMT_DECODER_H
