// combine.h -- pre-translation combination: pipeline and mixed input.
#ifndef PREMT_COMBINE_H
#define PREMT_COMBINE_H

#include <string>

#include "premt/bpe.h"
#include "premt/corpus.h"
#include "premt/decoder.h"
#include "premt/nmt.h"

namespace premt {

// Token prefixes that keep the pre-translation and source vocabularies
// disjoint in the concatenated input.
struct MarkingScheme {
  std::string pbmt_prefix = "D_";
  std::string source_prefix = "E_";

  void validate() const;
};

struct MixedInput {
  Sentence tokens;      // marked pre-translation followed by marked source
  std::size_t boundary; // index where the source part begins
};

// Prefixes every pre-translation token with pbmt_prefix and every source
// token with source_prefix, concatenated pre-translation first. Errors if a
// token already carries either prefix.
MixedInput build_mixed_input(const Sentence& source, const Sentence& pretranslation,
                             const MarkingScheme& scheme = MarkingScheme());

// Inverse of the marking: splits at the boundary and strips the prefixes.
std::pair<Sentence, Sentence> split_mixed_input(const MixedInput& mixed,
                                                const MarkingScheme& scheme = MarkingScheme());

// BPE over a marked sentence: the prefix is detached, the stem segmented,
// and the prefix re-attached to the first subword unit only. Marked tokens
// therefore never merge across the prefix boundary and undo_bpe is unchanged.
Sentence apply_bpe_marked(const Sentence& marked, const MergeTable& merges,
                          const MarkingScheme& scheme = MarkingScheme());

// Decodes every source sentence of the corpus with the PBMT system (with the
// singleton-filtered table when filter is set) and pairs the pre-translations
// with the unchanged targets.
ParallelCorpus pretranslate_corpus(const ParallelCorpus& corpus, const DecoderConfig& smt,
                                   bool filter);

// PBMT then monolingual NMT: undo_bpe(nmt(apply_bpe(pbmt(source)))).
struct PipelineSystem {
  const DecoderConfig* smt = nullptr;
  const Seq2SeqParams* mono_nmt = nullptr;
  const MergeTable* merges = nullptr;
  const Vocabulary* nmt_src_vocab = nullptr;
  const Vocabulary* nmt_tgt_vocab = nullptr;
  int beam_size = 5;
};
Sentence pipeline_translate(const Sentence& source, const PipelineSystem& system);

// PBMT pre-translation and the original source, marked and concatenated,
// consumed by an NMT trained on mixed inputs. Returns the translation and
// the attention over the full concatenated (BPE) input.
struct MixedSystem {
  const DecoderConfig* smt = nullptr;
  const Seq2SeqParams* mixed_nmt = nullptr;
  const MergeTable* merges = nullptr;
  const Vocabulary* nmt_src_vocab = nullptr;
  const Vocabulary* nmt_tgt_vocab = nullptr;
  MarkingScheme scheme;
  int beam_size = 5;
};
struct MixedTranslation {
  Sentence tokens;
  AttentionMatrix attention;
  Sentence bpe_input;  // the marked, BPE-encoded mixed input (attention columns)
};
MixedTranslation mixed_translate(const Sentence& source, const MixedSystem& system);

}  // namespace premt

#endif  // PREMT_COMBINE_H
