// synthetic.h -- constructed bilingual corpora with controlled weaknesses:
// systematic verb-final reordering that a monotone phrase-based system cannot
// produce, rare entity tokens (seen exactly twice) whose translations are
// arbitrary string pairs a small neural model cannot memorize, and hapax
// tokens whose phrase pairs vanish under singleton filtering.
#ifndef PREMT_SYNTHETIC_H
#define PREMT_SYNTHETIC_H

#include <cstdint>

#include "premt/corpus.h"

namespace premt {

struct SyntheticSpec {
  int train_pairs = 2000;
  int dev_pairs = 100;
  int test_pairs = 300;
  int num_rare_entities = 50;  // each appears exactly twice in training
  int num_hapax = 40;          // each appears exactly once in training
  double dev_entity_rate = 0.4;
  double test_entity_rate = 0.6;
  std::uint64_t seed = 1;
};

struct SyntheticData {
  ParallelCorpus train;
  ParallelCorpus dev;
  ParallelCorpus test;
};

SyntheticData make_synthetic_corpus(const SyntheticSpec& spec);

}  // namespace premt

#endif  // PREMT_SYNTHETIC_H
