// experiment.h -- end-to-end experiment driver: trains the components for one
// combination mode, decodes the test set and writes the report files.
#ifndef PREMT_EXPERIMENT_H
#define PREMT_EXPERIMENT_H

#include <cstdint>
#include <string>
#include <vector>

#include "premt/corpus.h"
#include "premt/eval.h"

namespace premt {

struct ExperimentConfig {
  // Corpus paths.
  std::string train_src, train_tgt;
  std::string dev_src, dev_tgt;
  std::string test_src, test_tgt;
  std::string out_dir;

  // One of: nmt-only | pbmt-only | pipeline | mixed.
  std::string mode = "mixed";

  int bpe_merges = 150;
  int ibm1_iterations = 5;
  int max_phrase_len = 3;
  int lm_order = 3;
  int pbmt_beam = 5;
  int distortion_limit = 0;
  int mert_rounds = 0;  // 0 keeps the default weights
  int mert_nbest = 100;

  int nmt_embed = 32;
  int nmt_hidden = 48;
  double nmt_learning_rate = 1e-3;
  int nmt_batch = 8;
  int nmt_iterations = 2000;
  int nmt_checkpoint_interval = 500;
  double nmt_clip = 5.0;
  int nmt_beam = 5;
  int ensemble = 1;  // > 1: average the last N checkpoints

  std::vector<std::int64_t> freq_thresholds = {1, 3, 10, 100};
  std::uint64_t seed = 1;

  void validate() const;
  // Flat key=value text; the manifest a run writes is itself a loadable
  // config.
  static ExperimentConfig from_file(const std::string& path);
  static ExperimentConfig from_string(const std::string& content);
  std::string to_manifest() const;
};

struct ExperimentResult {
  std::vector<Sentence> hypotheses;
  BleuReport bleu;
  std::string hyp_path, bleu_path, freq_path, manifest_path;
};

// Trains everything the mode requires, decodes the test set, and writes
// hyp.txt, bleu.tsv, freq.tsv, manifest.txt (and attn/NNN.tsv for the first
// ten test sentences in mixed mode) under config.out_dir.
ExperimentResult run_experiment(const ExperimentConfig& config);

}  // namespace premt

#endif  // PREMT_EXPERIMENT_H
