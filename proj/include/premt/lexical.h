// lexical.h -- IBM-1 lexical translation model, Viterbi alignment and
// intersection symmetrization.
#ifndef PREMT_LEXICAL_H
#define PREMT_LEXICAL_H

#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "premt/corpus.h"

namespace premt {

inline constexpr const char* kNullToken = "<null>";

// t(target | source); for each source token the probabilities over target
// tokens sum to 1. The NULL source token is included under kNullToken.
class LexicalTable {
 public:
  double prob(const std::string& source, const std::string& target) const;
  const std::unordered_map<std::string, double>* row(const std::string& source) const;

  void set(const std::string& source, const std::string& target, double p);

  // "source target prob" per line.
  std::string serialize() const;
  static LexicalTable deserialize(const std::string& content);
  void save(const std::string& path) const;
  static LexicalTable load(const std::string& path);

  const std::unordered_map<std::string, std::unordered_map<std::string, double>>& rows()
      const {
    return probs_;
  }

 private:
  std::unordered_map<std::string, std::unordered_map<std::string, double>> probs_;
};

// Standard IBM-1 EM: uniform initialization over co-occurring pairs,
// expectations over alignments including the NULL source token,
// per-source-token normalization each iteration.
LexicalTable train_ibm1(const ParallelCorpus& corpus, int iterations);

// IBM-1 corpus log-likelihood sum over pairs of sum_j log( sum_i t(e_j|f_i)
// / (I+1) ), the quantity EM does not decrease.
double ibm1_log_likelihood(const ParallelCorpus& corpus, const LexicalTable& lex);

// One alignment link: (source position, target position).
using AlignmentLink = std::pair<int, int>;
using Alignment = std::vector<AlignmentLink>;

// Links every target position to its argmax source token, or to NULL (no
// link). Ties break to the leftmost source position.
Alignment align_viterbi(const SentencePair& pair, const LexicalTable& lex);

// Intersection of the source->target and target->source Viterbi alignments.
// `reverse_lex` is trained on the swapped corpus, i.e. it models t(f|e).
Alignment align_intersect(const SentencePair& pair, const LexicalTable& lex,
                          const LexicalTable& reverse_lex);

// Alignment file IO: one sentence per line, links as "i-j" (source-target).
std::string serialize_alignments(const std::vector<Alignment>& alignments);
std::vector<Alignment> deserialize_alignments(const std::string& content);

}  // namespace premt

#endif  // PREMT_LEXICAL_H
