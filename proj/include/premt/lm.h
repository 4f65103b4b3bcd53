// lm.h -- n-gram language model with interpolated absolute discounting.
#ifndef PREMT_LM_H
#define PREMT_LM_H

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "premt/corpus.h"

namespace premt {

// Counts are collected with BOS padding and EOS termination; conditional
// probabilities interpolate down to a uniform distribution over the observed
// event types plus UNK and EOS, so every context distribution sums to one.
class NGramModel {
 public:
  static constexpr double kDefaultDiscount = 0.75;

  // Empty model; train or load before scoring.
  NGramModel() = default;

  static NGramModel train(const std::vector<Sentence>& corpus, int order,
                          double discount = kDefaultDiscount);

  int order() const { return order_; }
  double discount() const { return discount_; }
  const Vocabulary& vocab() const { return vocab_; }

  // log p(word | context); context is the raw preceding-token window (any
  // length; only the last order-1 entries are used, BOS-padded at the start
  // of a sentence by the caller via score helpers or explicitly).
  double log_prob(const std::string& word, const std::vector<std::string>& context) const;

  // Sum of conditional log probabilities of all tokens plus EOS.
  double score_sequence(const Sentence& sentence) const;

  double perplexity(const std::vector<Sentence>& corpus) const;

  // All event types a context distribution ranges over (tokens + UNK + EOS).
  std::vector<std::string> event_types() const;

  // Text format: "#premt-lm v1 order=K discount=D", then "ngram<TAB>count"
  // lines for every order, ascending.
  std::string serialize() const;
  static NGramModel deserialize(const std::string& content);
  void save(const std::string& path) const;
  static NGramModel load(const std::string& path);

 private:
  void index_contexts();
  double prob(const std::string& word, const std::vector<std::string>& padded_context,
              int k) const;

  int order_ = 0;
  double discount_ = kDefaultDiscount;
  Vocabulary vocab_;
  // counts_[n-1]: n-gram (space-joined) -> count.
  std::vector<std::unordered_map<std::string, std::int64_t>> counts_;
  // Per order: context (space-joined, empty for unigrams) -> (total, distinct
  // continuation types). Derived from counts_.
  struct ContextStat {
    std::int64_t total = 0;
    std::int64_t distinct = 0;
  };
  std::vector<std::unordered_map<std::string, ContextStat>> context_stats_;
  std::int64_t base_types_ = 0;  // uniform floor: observed types + UNK + EOS
};

}  // namespace premt

#endif  // PREMT_LM_H
