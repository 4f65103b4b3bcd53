// phrase_table.h -- consistent phrase-pair extraction and the scored table.
#ifndef PREMT_PHRASE_TABLE_H
#define PREMT_PHRASE_TABLE_H

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "premt/corpus.h"
#include "premt/lexical.h"

namespace premt {

// Per-pair feature order in the table file.
inline const std::vector<std::string> kPhraseFeatureNames = {
    "log_p_tgt_given_src", "log_p_src_given_tgt", "log_lex_tgt_given_src",
    "log_lex_src_given_tgt", "phrase_penalty"};

struct PhrasePair {
  Sentence source;
  Sentence target;
  std::vector<double> features;  // aligned with feature_names
  std::int64_t count = 0;
};

class PhraseTable {
 public:
  const std::vector<std::string>& feature_names() const { return feature_names_; }
  void set_feature_names(std::vector<std::string> names) {
    feature_names_ = std::move(names);
  }

  void add(PhrasePair pair);
  // Options for a source phrase (tokens joined by a single space); nullptr if
  // none.
  const std::vector<PhrasePair>* lookup(const std::string& source_key) const;
  const std::vector<PhrasePair>* lookup(const Sentence& source_phrase) const;

  std::size_t num_pairs() const;
  const std::map<std::string, std::vector<PhrasePair>>& entries() const { return entries_; }

  // "src ||| tgt ||| f1 .. fK ||| count" per line.
  std::string serialize() const;
  static PhraseTable deserialize(const std::string& content);
  void save(const std::string& path) const;
  static PhraseTable load(const std::string& path);

 private:
  std::map<std::string, std::vector<PhrasePair>> entries_;
  std::vector<std::string> feature_names_ = kPhraseFeatureNames;
};

// Standard consistent-pair extraction: a (source span, target span) pair is
// extracted when it contains at least one link and no link crosses either
// boundary. Relative-frequency and bidirectional lexical-weight features are
// computed over the whole corpus; `lex` models t(target|source) and
// `reverse_lex` t(source|target).
PhraseTable extract_phrases(const ParallelCorpus& corpus,
                            const std::vector<Alignment>& alignments, int max_phrase_len,
                            const LexicalTable& lex, const LexicalTable& reverse_lex);

// Removes exactly the pairs with count == 1; survivor features are kept as
// they are.
PhraseTable filter_singletons(const PhraseTable& table);

}  // namespace premt

#endif  // PREMT_PHRASE_TABLE_H
