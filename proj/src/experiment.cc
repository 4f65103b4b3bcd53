#include "premt/experiment.h"

#include <filesystem>
#include <sstream>

#include "premt/combine.h"
#include "premt/decoder.h"
#include "premt/lexical.h"
#include "premt/lm.h"
#include "premt/mert.h"
#include "premt/nmt.h"
#include "premt/phrase_table.h"
#include "premt/util.h"

namespace premt {

namespace fs = std::filesystem;

void ExperimentConfig::validate() const {
  if (mode != "nmt-only" && mode != "pbmt-only" && mode != "pipeline" && mode != "mixed") {
    throw std::runtime_error("experiment: unknown mode \"" + mode + "\"");
  }
  for (const std::string* path : {&train_src, &train_tgt, &dev_src, &dev_tgt, &test_src,
                                  &test_tgt}) {
    if (path->empty()) throw std::runtime_error("experiment: missing corpus path");
    if (!fs::exists(*path)) throw std::runtime_error("experiment: no such file: " + *path);
  }
  if (out_dir.empty()) throw std::runtime_error("experiment: out_dir not set");
}

ExperimentConfig ExperimentConfig::from_string(const std::string& content) {
  ExperimentConfig c;
  for (const std::string& raw : split_lines(content)) {
    std::string line = raw;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) {
      line.pop_back();
    }
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error("config: expected key=value, got: " + line);
    }
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    if (key == "train_src") c.train_src = value;
    else if (key == "train_tgt") c.train_tgt = value;
    else if (key == "dev_src") c.dev_src = value;
    else if (key == "dev_tgt") c.dev_tgt = value;
    else if (key == "test_src") c.test_src = value;
    else if (key == "test_tgt") c.test_tgt = value;
    else if (key == "out_dir") c.out_dir = value;
    else if (key == "mode") c.mode = value;
    else if (key == "bpe_merges") c.bpe_merges = std::stoi(value);
    else if (key == "ibm1_iterations") c.ibm1_iterations = std::stoi(value);
    else if (key == "max_phrase_len") c.max_phrase_len = std::stoi(value);
    else if (key == "lm_order") c.lm_order = std::stoi(value);
    else if (key == "pbmt_beam") c.pbmt_beam = std::stoi(value);
    else if (key == "distortion_limit") c.distortion_limit = std::stoi(value);
    else if (key == "mert_rounds") c.mert_rounds = std::stoi(value);
    else if (key == "mert_nbest") c.mert_nbest = std::stoi(value);
    else if (key == "nmt_embed") c.nmt_embed = std::stoi(value);
    else if (key == "nmt_hidden") c.nmt_hidden = std::stoi(value);
    else if (key == "nmt_learning_rate") c.nmt_learning_rate = std::stod(value);
    else if (key == "nmt_batch") c.nmt_batch = std::stoi(value);
    else if (key == "nmt_iterations") c.nmt_iterations = std::stoi(value);
    else if (key == "nmt_checkpoint_interval") c.nmt_checkpoint_interval = std::stoi(value);
    else if (key == "nmt_clip") c.nmt_clip = std::stod(value);
    else if (key == "nmt_beam") c.nmt_beam = std::stoi(value);
    else if (key == "ensemble") c.ensemble = std::stoi(value);
    else if (key == "seed") c.seed = std::stoull(value);
    else if (key == "freq_thresholds") {
      c.freq_thresholds.clear();
      std::istringstream ss(value);
      std::string item;
      while (std::getline(ss, item, ',')) c.freq_thresholds.push_back(std::stoll(item));
    } else {
      throw std::runtime_error("config: unknown key \"" + key + "\"");
    }
  }
  return c;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  return from_string(read_file(path));
}

std::string ExperimentConfig::to_manifest() const {
  std::ostringstream ss;
  ss << "train_src=" << train_src << '\n';
  ss << "train_tgt=" << train_tgt << '\n';
  ss << "dev_src=" << dev_src << '\n';
  ss << "dev_tgt=" << dev_tgt << '\n';
  ss << "test_src=" << test_src << '\n';
  ss << "test_tgt=" << test_tgt << '\n';
  ss << "out_dir=" << out_dir << '\n';
  ss << "mode=" << mode << '\n';
  ss << "bpe_merges=" << bpe_merges << '\n';
  ss << "ibm1_iterations=" << ibm1_iterations << '\n';
  ss << "max_phrase_len=" << max_phrase_len << '\n';
  ss << "lm_order=" << lm_order << '\n';
  ss << "pbmt_beam=" << pbmt_beam << '\n';
  ss << "distortion_limit=" << distortion_limit << '\n';
  ss << "mert_rounds=" << mert_rounds << '\n';
  ss << "mert_nbest=" << mert_nbest << '\n';
  ss << "nmt_embed=" << nmt_embed << '\n';
  ss << "nmt_hidden=" << nmt_hidden << '\n';
  ss << "nmt_learning_rate=" << fmt_double_exact(nmt_learning_rate) << '\n';
  ss << "nmt_batch=" << nmt_batch << '\n';
  ss << "nmt_iterations=" << nmt_iterations << '\n';
  ss << "nmt_checkpoint_interval=" << nmt_checkpoint_interval << '\n';
  ss << "nmt_clip=" << fmt_double_exact(nmt_clip) << '\n';
  ss << "nmt_beam=" << nmt_beam << '\n';
  ss << "ensemble=" << ensemble << '\n';
  std::string thresholds;
  for (std::size_t i = 0; i < freq_thresholds.size(); ++i) {
    if (i) thresholds += ',';
    thresholds += std::to_string(freq_thresholds[i]);
  }
  ss << "freq_thresholds=" << thresholds << '\n';
  ss << "seed=" << seed << '\n';
  return ss.str();
}

namespace {

struct PbmtSystem {
  LexicalTable lex_fwd, lex_bwd;
  PhraseTable table;
  NGramModel lm;
  LogLinearWeights weights;

  DecoderConfig config(const ExperimentConfig& c) const {
    DecoderConfig config;
    config.table = &table;
    config.lm = &lm;
    config.weights = weights;
    config.beam_size = c.pbmt_beam;
    config.distortion_limit = c.distortion_limit;
    return config;
  }
};

PbmtSystem train_pbmt(const ExperimentConfig& c, const ParallelCorpus& train,
                      const ParallelCorpus& dev, const std::string& model_dir) {
  PbmtSystem sys;
  sys.lex_fwd = train_ibm1(train, c.ibm1_iterations);
  ParallelCorpus swapped;
  for (const auto& p : train.pairs) swapped.pairs.push_back({p.target, p.source});
  sys.lex_bwd = train_ibm1(swapped, c.ibm1_iterations);
  std::vector<Alignment> alignments;
  alignments.reserve(train.size());
  for (const auto& p : train.pairs) {
    alignments.push_back(align_intersect(p, sys.lex_fwd, sys.lex_bwd));
  }
  sys.table = extract_phrases(train, alignments, c.max_phrase_len, sys.lex_fwd, sys.lex_bwd);
  sys.lm = NGramModel::train(train.targets(), c.lm_order);
  sys.weights = LogLinearWeights::defaults();
  if (c.mert_rounds > 0) {
    MertOptions mert;
    mert.rounds = c.mert_rounds;
    mert.nbest_size = c.mert_nbest;
    mert.seed = Rng(c.seed).fork(21).next_u64();
    sys.weights = tune_weights(dev, sys.config(c), sys.weights, mert);
  }
  sys.lex_fwd.save(model_dir + "/lex_fwd.txt");
  sys.lex_bwd.save(model_dir + "/lex_bwd.txt");
  write_file(model_dir + "/alignments.txt", serialize_alignments(alignments));
  sys.table.save(model_dir + "/phrase_table.txt");
  sys.lm.save(model_dir + "/lm.txt");
  sys.weights.save(model_dir + "/weights.txt");
  return sys;
}

struct NmtSystem {
  Vocabulary src_vocab, tgt_vocab;
  std::vector<Checkpoint> checkpoints;
  std::size_t best = 0;
  std::vector<const Seq2SeqParams*> decode_models;  // best, or the ensemble tail
};

// corpus/dev already in final token form (BPE applied; mixed marking done).
NmtSystem train_nmt(const ExperimentConfig& c, const std::vector<Sentence>& train_src,
                    const std::vector<Sentence>& train_tgt, const ParallelCorpus& dev_bpe,
                    const std::string& model_dir, std::uint64_t seed_salt) {
  NmtSystem sys;
  sys.src_vocab = Vocabulary::build(train_src, 1);
  sys.tgt_vocab = Vocabulary::build(train_tgt, 1);
  std::vector<EncodedPair> encoded(train_src.size());
  for (std::size_t i = 0; i < train_src.size(); ++i) {
    encoded[i].source = sys.src_vocab.encode(train_src[i]);
    encoded[i].target = sys.tgt_vocab.encode(train_tgt[i]);
  }
  NmtDims dims;
  dims.embed = c.nmt_embed;
  dims.hidden = c.nmt_hidden;
  dims.attn = c.nmt_hidden;
  dims.readout = c.nmt_hidden;
  dims.src_vocab = static_cast<int>(sys.src_vocab.size());
  dims.tgt_vocab = static_cast<int>(sys.tgt_vocab.size());
  TrainingConfig tc;
  tc.learning_rate = c.nmt_learning_rate;
  tc.batch_size = c.nmt_batch;
  tc.max_iterations = c.nmt_iterations;
  tc.checkpoint_interval = c.nmt_checkpoint_interval;
  tc.clip_norm = c.nmt_clip;
  tc.seed = Rng(c.seed).fork(seed_salt).next_u64();
  Rng init_rng(tc.seed);
  Seq2SeqParams params = Seq2SeqParams::init(dims, init_rng);
  sys.checkpoints = train_loop_from(std::move(params), encoded, tc);
  sys.best = select_best(sys.checkpoints, dev_bpe, sys.src_vocab, sys.tgt_vocab);

  sys.src_vocab.save(model_dir + "/nmt_src.vocab");
  sys.tgt_vocab.save(model_dir + "/nmt_tgt.vocab");
  for (const Checkpoint& ckpt : sys.checkpoints) {
    ckpt.save(model_dir + "/ckpt_" + std::to_string(ckpt.iteration) + ".bin");
  }

  if (c.ensemble > 1) {
    int n = std::min<int>(c.ensemble, static_cast<int>(sys.checkpoints.size()));
    for (int i = static_cast<int>(sys.checkpoints.size()) - n;
         i < static_cast<int>(sys.checkpoints.size()); ++i) {
      sys.decode_models.push_back(&sys.checkpoints[i].params);
    }
  } else {
    sys.decode_models.push_back(&sys.checkpoints[sys.best].params);
  }
  return sys;
}

std::vector<Sentence> to_marked_mixed(const ParallelCorpus& pretranslated,
                                      const ParallelCorpus& raw,
                                      const MergeTable& merges) {
  MarkingScheme scheme;
  std::vector<Sentence> out;
  out.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    MixedInput mixed =
        build_mixed_input(raw.pairs[i].source, pretranslated.pairs[i].source, scheme);
    out.push_back(apply_bpe_marked(mixed.tokens, merges, scheme));
  }
  return out;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  fs::create_directories(config.out_dir);
  const std::string model_dir = config.out_dir + "/models";
  fs::create_directories(model_dir);
  write_file(config.out_dir + "/manifest.txt", config.to_manifest());

  LoadOptions opts;
  if (config.mode == "mixed") opts.forbid_prefixes = {"D_", "E_"};
  ParallelCorpus train = load_corpus(config.train_src, config.train_tgt, opts);
  ParallelCorpus dev = load_corpus(config.dev_src, config.dev_tgt, opts);
  ParallelCorpus test = load_corpus(config.test_src, config.test_tgt, opts);

  MergeTable merges = learn_bpe(train, config.bpe_merges);
  merges.save(model_dir + "/merges.txt");
  // Word-level target counts drive the rare-word analysis.
  Vocabulary target_counts = Vocabulary::build(train.targets(), 1);
  target_counts.save(model_dir + "/target_counts.vocab");

  std::vector<Sentence> hypotheses;
  PbmtSystem pbmt;
  const bool needs_pbmt = config.mode != "nmt-only";
  if (needs_pbmt) pbmt = train_pbmt(config, train, dev, model_dir);

  if (config.mode == "pbmt-only") {
    for (const auto& pair : test.pairs) {
      hypotheses.push_back(decode(pair.source, pbmt.config(config)).translation);
    }
  } else if (config.mode == "nmt-only") {
    std::vector<Sentence> train_src = apply_bpe(train.sources(), merges);
    std::vector<Sentence> train_tgt = apply_bpe(train.targets(), merges);
    ParallelCorpus dev_bpe;
    for (const auto& p : dev.pairs) {
      dev_bpe.pairs.push_back({apply_bpe(p.source, merges), apply_bpe(p.target, merges)});
    }
    NmtSystem nmt = train_nmt(config, train_src, train_tgt, dev_bpe, model_dir, 31);
    for (const auto& pair : test.pairs) {
      Sentence src = apply_bpe(pair.source, merges);
      SentenceTranslation out =
          translate_sentence(nmt.decode_models, src, nmt.src_vocab, nmt.tgt_vocab,
                             config.nmt_beam, 2 * static_cast<int>(src.size()) + 10);
      hypotheses.push_back(undo_bpe(out.tokens, merges.marker));
    }
  } else if (config.mode == "pipeline") {
    ParallelCorpus pre_train = pretranslate_corpus(train, pbmt.config(config), true);
    std::vector<Sentence> train_src = apply_bpe(pre_train.sources(), merges);
    std::vector<Sentence> train_tgt = apply_bpe(pre_train.targets(), merges);
    ParallelCorpus pre_dev = pretranslate_corpus(dev, pbmt.config(config), false);
    ParallelCorpus dev_bpe;
    for (const auto& p : pre_dev.pairs) {
      dev_bpe.pairs.push_back({apply_bpe(p.source, merges), apply_bpe(p.target, merges)});
    }
    NmtSystem nmt = train_nmt(config, train_src, train_tgt, dev_bpe, model_dir, 32);
    PipelineSystem system;
    DecoderConfig smt_config = pbmt.config(config);
    system.smt = &smt_config;
    system.mono_nmt = nmt.decode_models[0];
    system.merges = &merges;
    system.nmt_src_vocab = &nmt.src_vocab;
    system.nmt_tgt_vocab = &nmt.tgt_vocab;
    system.beam_size = config.nmt_beam;
    for (const auto& pair : test.pairs) {
      hypotheses.push_back(pipeline_translate(pair.source, system));
    }
  } else {  // mixed
    ParallelCorpus pre_train = pretranslate_corpus(train, pbmt.config(config), true);
    std::vector<Sentence> train_src = to_marked_mixed(pre_train, train, merges);
    std::vector<Sentence> train_tgt = apply_bpe(train.targets(), merges);
    ParallelCorpus pre_dev = pretranslate_corpus(dev, pbmt.config(config), false);
    std::vector<Sentence> dev_src = to_marked_mixed(pre_dev, dev, merges);
    ParallelCorpus dev_bpe;
    for (std::size_t i = 0; i < dev.size(); ++i) {
      dev_bpe.pairs.push_back({dev_src[i], apply_bpe(dev.pairs[i].target, merges)});
    }
    NmtSystem nmt = train_nmt(config, train_src, train_tgt, dev_bpe, model_dir, 33);
    MixedSystem system;
    DecoderConfig smt_config = pbmt.config(config);
    system.smt = &smt_config;
    system.mixed_nmt = nmt.decode_models[0];
    system.merges = &merges;
    system.nmt_src_vocab = &nmt.src_vocab;
    system.nmt_tgt_vocab = &nmt.tgt_vocab;
    system.beam_size = config.nmt_beam;
    fs::create_directories(config.out_dir + "/attn");
    for (std::size_t i = 0; i < test.size(); ++i) {
      MixedTranslation out = mixed_translate(test.pairs[i].source, system);
      hypotheses.push_back(out.tokens);
      if (i < 10) {
        char name[16];
        std::snprintf(name, sizeof(name), "%03zu.tsv", i);
        write_file(config.out_dir + "/attn/" + name,
                   attention_to_tsv(out.bpe_input, out.tokens, out.attention));
      }
    }
  }

  ExperimentResult result;
  result.hypotheses = hypotheses;
  result.bleu = bleu(hypotheses, test.targets());

  std::string hyp_text;
  for (const auto& h : hypotheses) {
    hyp_text += join_tokens(h);
    hyp_text += '\n';
  }
  result.hyp_path = config.out_dir + "/hyp.txt";
  write_file(result.hyp_path, hyp_text);

  std::ostringstream bleu_tsv;
  bleu_tsv << "bleu\tp1\tp2\tp3\tp4\tbrevity_penalty\thyp_len\tref_len\n";
  bleu_tsv << fmt_double(result.bleu.bleu) << '\t' << fmt_double(result.bleu.precisions[0])
           << '\t' << fmt_double(result.bleu.precisions[1]) << '\t'
           << fmt_double(result.bleu.precisions[2]) << '\t'
           << fmt_double(result.bleu.precisions[3]) << '\t'
           << fmt_double(result.bleu.brevity_penalty) << '\t' << result.bleu.hyp_len << '\t'
           << result.bleu.ref_len << '\n';
  result.bleu_path = config.out_dir + "/bleu.tsv";
  write_file(result.bleu_path, bleu_tsv.str());

  FrequencyBucketReport freq = frequency_sweep({{config.mode, hypotheses}}, test.targets(),
                                               target_counts, config.freq_thresholds,
                                               config.mode);
  result.freq_path = config.out_dir + "/freq.tsv";
  write_file(result.freq_path, freq.to_tsv());
  result.manifest_path = config.out_dir + "/manifest.txt";
  return result;
}

}  // namespace premt
