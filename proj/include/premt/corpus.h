// corpus.h -- tokenized text ingestion, vocabularies and frequency counts.
#ifndef PREMT_CORPUS_H
#define PREMT_CORPUS_H

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace premt {

// A sentence is an ordered list of whitespace-free, non-empty tokens.
using Sentence = std::vector<std::string>;

struct SentencePair {
  Sentence source;
  Sentence target;
};

struct ParallelCorpus {
  std::vector<SentencePair> pairs;

  std::size_t size() const { return pairs.size(); }
  bool empty() const { return pairs.empty(); }
  std::vector<Sentence> sources() const;
  std::vector<Sentence> targets() const;
};

// Reserved token literals. These are forbidden in raw input text.
inline constexpr const char* kUnkToken = "<unk>";
inline constexpr const char* kBosToken = "<s>";
inline constexpr const char* kEosToken = "</s>";
inline constexpr const char* kPadToken = "<pad>";

inline constexpr int kUnkId = 0;
inline constexpr int kBosId = 1;
inline constexpr int kEosId = 2;
inline constexpr int kPadId = 3;
inline constexpr int kNumReservedIds = 4;

struct LoadOptions {
  // Reject the reserved literals above anywhere in the input.
  bool forbid_reserved = true;
  // Reject tokens containing this substring (the BPE continuation marker);
  // empty disables the check. Files that already carry subword units are
  // loaded with this disabled.
  std::string forbid_marker = "@@";
  // Reject tokens starting with any of these prefixes (mixed-input marking).
  std::vector<std::string> forbid_prefixes;
};

// One sentence per line, UTF-8, tokens separated by whitespace.
std::vector<Sentence> load_sentences(const std::string& path,
                                     const LoadOptions& opts = LoadOptions());

// Line i of each file becomes pair i. Trailing blank lines are ignored
// symmetrically; an interior blank line is an error (empty sentence).
ParallelCorpus load_corpus(const std::string& source_path,
                           const std::string& target_path,
                           const LoadOptions& opts = LoadOptions());

void save_sentences(const std::string& path, const std::vector<Sentence>& sents);

// Token <-> dense id bijection plus occurrence counts for *all* tokens seen
// in training data, including those below the id threshold (they map to UNK
// but their counts are kept for the frequency analyses).
class Vocabulary {
 public:
  Vocabulary();

  static Vocabulary build(const std::vector<Sentence>& sentences, int min_count = 1);
  static Vocabulary from_counts(const std::unordered_map<std::string, std::int64_t>& counts,
                                int min_count = 1);

  int id(const std::string& token) const;           // UNK id if absent
  bool contains(const std::string& token) const;
  const std::string& token(int id) const;
  std::size_t size() const { return id_to_token_.size(); }  // mapped entries only

  // Training-data occurrence count; 0 for unseen tokens.
  std::int64_t count(const std::string& token) const;
  const std::unordered_map<std::string, std::int64_t>& counts() const { return counts_; }

  std::vector<int> encode(const Sentence& sentence) const;
  Sentence decode(const std::vector<int>& ids) const;

  // Text format: "token<TAB>id<TAB>count", sorted by id; tokens counted but
  // below the id threshold follow with id -1, sorted by token.
  std::string serialize() const;
  static Vocabulary deserialize(const std::string& content);
  void save(const std::string& path) const;
  static Vocabulary load(const std::string& path);

 private:
  std::unordered_map<std::string, int> token_to_id_;
  std::vector<std::string> id_to_token_;
  std::unordered_map<std::string, std::int64_t> counts_;
};

}  // namespace premt

#endif  // PREMT_CORPUS_H
