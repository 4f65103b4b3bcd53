// bpe.h -- byte-pair-encoding subword merges with continuation markers.
#ifndef PREMT_BPE_H
#define PREMT_BPE_H

#include <string>
#include <utility>
#include <vector>

#include "premt/corpus.h"

namespace premt {

inline constexpr const char* kBpeMarker = "@@";

struct MergeTable {
  // Learning order is significant.
  std::vector<std::pair<std::string, std::string>> merges;
  std::string marker = kBpeMarker;

  // File format: first line "#premt-bpe v1", then "left right" per line.
  std::string serialize() const;
  static MergeTable deserialize(const std::string& content);
  void save(const std::string& path) const;
  static MergeTable load(const std::string& path);
};

// Learns at most num_merges merges over the given sentences. Each step merges
// the most frequent adjacent symbol pair of the current segmentation; ties go
// to the lexicographically smallest (left, right). Stops early once no pair
// occurs at least twice. Words are split into UTF-8 code points; there is no
// end-of-word symbol, the continuation marker is attached at application time.
MergeTable learn_bpe(const std::vector<Sentence>& sentences, int num_merges);

// Joint learning over both corpus sides (the default), or one side only.
enum class BpeSide { kJoint, kSource, kTarget };
MergeTable learn_bpe(const ParallelCorpus& corpus, int num_merges,
                     BpeSide side = BpeSide::kJoint);

// Splits one word into subword units (no markers attached).
std::vector<std::string> segment_word(const std::string& word, const MergeTable& merges);

// Each word is split independently; all non-final units of a word carry the
// continuation marker suffix.
Sentence apply_bpe(const Sentence& sentence, const MergeTable& merges);
std::vector<Sentence> apply_bpe(const std::vector<Sentence>& sentences,
                                const MergeTable& merges);

// Inverse of apply_bpe: joins every marker-suffixed token with its successor.
// A marker on the final token is an error.
Sentence undo_bpe(const Sentence& sentence, const std::string& marker = kBpeMarker);

}  // namespace premt

#endif  // PREMT_BPE_H
