// premt -- one binary, one subcommand per pipeline stage.
#include <CLI11.hpp>
#include <filesystem>
#include <iostream>

#include "premt/bpe.h"
#include "premt/combine.h"
#include "premt/corpus.h"
#include "premt/decoder.h"
#include "premt/eval.h"
#include "premt/experiment.h"
#include "premt/lexical.h"
#include "premt/lm.h"
#include "premt/mert.h"
#include "premt/nmt.h"
#include "premt/phrase_table.h"
#include "premt/synthetic.h"
#include "premt/util.h"

namespace {

using namespace premt;

// Subword text: reserved literals still rejected, markers allowed.
LoadOptions subword_options() {
  LoadOptions opts;
  opts.forbid_marker.clear();
  return opts;
}

// Free-form system output: anything goes (NMT output can contain <unk>).
LoadOptions output_options() {
  LoadOptions opts;
  opts.forbid_reserved = false;
  opts.forbid_marker.clear();
  return opts;
}

void emit_sentences(const std::vector<Sentence>& sents, const std::string& out_path) {
  if (out_path.empty()) {
    for (const auto& s : sents) std::cout << join_tokens(s) << '\n';
  } else {
    save_sentences(out_path, sents);
  }
}

DecoderConfig make_decoder_config(const PhraseTable& table, const NGramModel& lm,
                                  const LogLinearWeights& weights, int beam,
                                  int distortion, int nbest) {
  DecoderConfig config;
  config.table = &table;
  config.lm = &lm;
  config.weights = weights;
  config.beam_size = beam;
  config.distortion_limit = distortion;
  config.nbest_size = nbest;
  return config;
}

struct NmtBundle {
  Checkpoint ckpt;
  Vocabulary src_vocab, tgt_vocab;
};

NmtBundle load_nmt(const std::string& ckpt_path, const std::string& src_vocab_path,
                   const std::string& tgt_vocab_path) {
  NmtBundle bundle;
  bundle.ckpt = Checkpoint::load(ckpt_path);
  bundle.src_vocab = Vocabulary::load(src_vocab_path);
  bundle.tgt_vocab = Vocabulary::load(tgt_vocab_path);
  return bundle;
}

int run(int argc, char** argv) {
  CLI::App app{"phrase-based + neural MT toolkit with pre-translation combination"};
  app.require_subcommand(1);

  // ---- bpe-learn ----
  std::string in_src, in_tgt, out_path, merges_path;
  int num_merges = 150;
  bool per_side = false;
  auto* bpe_learn = app.add_subcommand("bpe-learn", "learn BPE merges");
  bpe_learn->add_option("source", in_src, "tokenized text file")->required();
  bpe_learn->add_option("target", in_tgt, "optional second side (joint learning)");
  bpe_learn->add_option("--merges", num_merges, "number of merge operations");
  bpe_learn->add_option("--out", out_path, "merges file")->required();
  bpe_learn->add_flag("--source-only", per_side, "learn on the first file only");
  bpe_learn->callback([&] {
    std::vector<Sentence> sents = load_sentences(in_src);
    if (!in_tgt.empty() && !per_side) {
      for (auto& s : load_sentences(in_tgt)) sents.push_back(std::move(s));
    }
    learn_bpe(sents, num_merges).save(out_path);
  });

  // ---- bpe-apply ----
  std::string in_text;
  auto* bpe_apply_cmd = app.add_subcommand("bpe-apply", "apply learned merges");
  bpe_apply_cmd->add_option("input", in_text, "tokenized text file")->required();
  bpe_apply_cmd->add_option("--merges", merges_path, "merges file")->required();
  bpe_apply_cmd->add_option("--out", out_path, "output file (default stdout)");
  bpe_apply_cmd->callback([&] {
    MergeTable merges = MergeTable::load(merges_path);
    emit_sentences(apply_bpe(load_sentences(in_text), merges), out_path);
  });

  // ---- bpe-undo ----
  auto* bpe_undo_cmd = app.add_subcommand("bpe-undo", "undo continuation markers");
  bpe_undo_cmd->add_option("input", in_text, "subword text file")->required();
  bpe_undo_cmd->add_option("--out", out_path, "output file (default stdout)");
  bpe_undo_cmd->callback([&] {
    std::vector<Sentence> out;
    for (const auto& s : load_sentences(in_text, subword_options())) {
      out.push_back(undo_bpe(s));
    }
    emit_sentences(out, out_path);
  });

  // ---- align ----
  std::string out_dir;
  int ibm1_iters = 5;
  auto* align_cmd =
      app.add_subcommand("align", "IBM-1 in both directions, intersected links");
  align_cmd->add_option("source", in_src)->required();
  align_cmd->add_option("target", in_tgt)->required();
  align_cmd->add_option("--iterations", ibm1_iters, "EM iterations");
  align_cmd->add_option("--out", out_dir, "output directory")->required();
  align_cmd->callback([&] {
    ParallelCorpus corpus = load_corpus(in_src, in_tgt);
    LexicalTable fwd = train_ibm1(corpus, ibm1_iters);
    ParallelCorpus swapped;
    for (const auto& p : corpus.pairs) swapped.pairs.push_back({p.target, p.source});
    LexicalTable bwd = train_ibm1(swapped, ibm1_iters);
    std::vector<Alignment> links;
    for (const auto& p : corpus.pairs) links.push_back(align_intersect(p, fwd, bwd));
    std::filesystem::create_directories(out_dir);
    fwd.save(out_dir + "/lex_fwd.txt");
    bwd.save(out_dir + "/lex_bwd.txt");
    write_file(out_dir + "/alignments.txt", serialize_alignments(links));
  });

  // ---- phrase-extract ----
  std::string align_path, lex_fwd_path, lex_bwd_path;
  int max_len = 3;
  auto* extract_cmd = app.add_subcommand("phrase-extract", "consistent phrase pairs");
  extract_cmd->add_option("source", in_src)->required();
  extract_cmd->add_option("target", in_tgt)->required();
  extract_cmd->add_option("--alignments", align_path)->required();
  extract_cmd->add_option("--lex-fwd", lex_fwd_path)->required();
  extract_cmd->add_option("--lex-bwd", lex_bwd_path)->required();
  extract_cmd->add_option("--max-len", max_len, "max phrase length");
  extract_cmd->add_option("--out", out_path, "phrase table file")->required();
  extract_cmd->callback([&] {
    ParallelCorpus corpus = load_corpus(in_src, in_tgt);
    std::vector<Alignment> links = deserialize_alignments(read_file(align_path));
    PhraseTable table = extract_phrases(corpus, links, max_len,
                                        LexicalTable::load(lex_fwd_path),
                                        LexicalTable::load(lex_bwd_path));
    table.save(out_path);
  });

  // ---- phrase-filter ----
  std::string table_path;
  auto* filter_cmd = app.add_subcommand("phrase-filter", "drop singleton phrase pairs");
  filter_cmd->add_option("table", table_path, "phrase table file")->required();
  filter_cmd->add_option("--out", out_path)->required();
  filter_cmd->callback([&] {
    filter_singletons(PhraseTable::load(table_path)).save(out_path);
  });

  // ---- lm-train ----
  int lm_order = 3;
  auto* lm_train_cmd = app.add_subcommand("lm-train", "n-gram language model");
  lm_train_cmd->add_option("corpus", in_src, "training text")->required();
  lm_train_cmd->add_option("--order", lm_order);
  lm_train_cmd->add_option("--out", out_path)->required();
  lm_train_cmd->callback([&] {
    NGramModel::train(load_sentences(in_src), lm_order).save(out_path);
  });

  // ---- lm-score ----
  std::string lm_path;
  auto* lm_score_cmd = app.add_subcommand("lm-score", "log-probability and perplexity");
  lm_score_cmd->add_option("input", in_text)->required();
  lm_score_cmd->add_option("--lm", lm_path)->required();
  lm_score_cmd->callback([&] {
    NGramModel model = NGramModel::load(lm_path);
    std::vector<Sentence> sents = load_sentences(in_text, output_options());
    double total = 0.0;
    for (const auto& s : sents) {
      double lp = model.score_sequence(s);
      total += lp;
      std::cout << fmt_double(lp) << '\n';
    }
    std::cout << "total\t" << fmt_double(total) << "\nperplexity\t"
              << fmt_double(model.perplexity(sents)) << '\n';
  });

  // ---- pbmt-decode ----
  std::string weights_path;
  int beam = 10, distortion = -1, nbest = 1;
  auto* decode_cmd = app.add_subcommand("pbmt-decode", "phrase-based beam decoding");
  decode_cmd->add_option("input", in_text)->required();
  decode_cmd->add_option("--table", table_path)->required();
  decode_cmd->add_option("--lm", lm_path)->required();
  decode_cmd->add_option("--weights", weights_path, "weights file (default weights if unset)");
  decode_cmd->add_option("--beam", beam);
  decode_cmd->add_option("--distortion", distortion, "limit; negative = unlimited");
  decode_cmd->add_option("--nbest", nbest);
  decode_cmd->add_option("--out", out_path);
  decode_cmd->callback([&] {
    PhraseTable table = PhraseTable::load(table_path);
    NGramModel lm = NGramModel::load(lm_path);
    LogLinearWeights weights = weights_path.empty() ? LogLinearWeights::defaults()
                                                    : LogLinearWeights::load(weights_path);
    DecoderConfig config = make_decoder_config(table, lm, weights, beam, distortion, nbest);
    std::vector<Sentence> out;
    for (const auto& s : load_sentences(in_text)) {
      DecodeResult r = decode(s, config);
      if (nbest > 1) {
        for (const auto& cand : r.nbest) {
          std::cout << fmt_double(cand.score) << " ||| " << join_tokens(cand.translation)
                    << '\n';
        }
      }
      out.push_back(r.translation);
    }
    emit_sentences(out, out_path);
  });

  // ---- mert ----
  int mert_rounds = 5, mert_nbest = 100, mert_restarts = 3;
  std::uint64_t seed = 1;
  auto* mert_cmd = app.add_subcommand("mert", "minimum error rate training");
  mert_cmd->add_option("dev_source", in_src)->required();
  mert_cmd->add_option("dev_target", in_tgt)->required();
  mert_cmd->add_option("--table", table_path)->required();
  mert_cmd->add_option("--lm", lm_path)->required();
  mert_cmd->add_option("--weights", weights_path, "initial weights file");
  mert_cmd->add_option("--rounds", mert_rounds);
  mert_cmd->add_option("--nbest", mert_nbest);
  mert_cmd->add_option("--restarts", mert_restarts);
  mert_cmd->add_option("--beam", beam);
  mert_cmd->add_option("--distortion", distortion);
  mert_cmd->add_option("--seed", seed);
  mert_cmd->add_option("--out", out_path, "tuned weights file")->required();
  mert_cmd->callback([&] {
    ParallelCorpus dev = load_corpus(in_src, in_tgt);
    PhraseTable table = PhraseTable::load(table_path);
    NGramModel lm = NGramModel::load(lm_path);
    LogLinearWeights initial = weights_path.empty() ? LogLinearWeights::defaults()
                                                    : LogLinearWeights::load(weights_path);
    DecoderConfig config = make_decoder_config(table, lm, initial, beam, distortion, 1);
    MertOptions opts;
    opts.rounds = mert_rounds;
    opts.nbest_size = mert_nbest;
    opts.restarts = mert_restarts;
    opts.seed = seed;
    opts.verbose = true;
    tune_weights(dev, config, initial, opts).save(out_path);
  });

  // ---- nmt-train ----
  int embed = 32, hidden = 64, batch = 16, iterations = 1000, interval = 100;
  double lr = 1e-3, clip = 5.0;
  std::string dev_src_path, dev_tgt_path;
  auto* nmt_train_cmd =
      app.add_subcommand("nmt-train", "train the attentional encoder-decoder");
  nmt_train_cmd->add_option("source", in_src, "subword source text")->required();
  nmt_train_cmd->add_option("target", in_tgt, "subword target text")->required();
  nmt_train_cmd->add_option("--dev-source", dev_src_path, "subword dev source");
  nmt_train_cmd->add_option("--dev-target", dev_tgt_path, "subword dev target");
  nmt_train_cmd->add_option("--embed", embed);
  nmt_train_cmd->add_option("--hidden", hidden);
  nmt_train_cmd->add_option("--lr", lr);
  nmt_train_cmd->add_option("--batch", batch);
  nmt_train_cmd->add_option("--iterations", iterations);
  nmt_train_cmd->add_option("--checkpoint-interval", interval);
  nmt_train_cmd->add_option("--clip", clip);
  nmt_train_cmd->add_option("--seed", seed);
  nmt_train_cmd->add_option("--out", out_dir, "output directory")->required();
  nmt_train_cmd->callback([&] {
    std::vector<Sentence> src = load_sentences(in_src, subword_options());
    std::vector<Sentence> tgt = load_sentences(in_tgt, subword_options());
    if (src.size() != tgt.size()) {
      throw std::runtime_error("nmt-train: line-count mismatch " +
                               std::to_string(src.size()) + "!=" + std::to_string(tgt.size()));
    }
    Vocabulary src_vocab = Vocabulary::build(src, 1);
    Vocabulary tgt_vocab = Vocabulary::build(tgt, 1);
    std::vector<EncodedPair> encoded(src.size());
    for (std::size_t i = 0; i < src.size(); ++i) {
      encoded[i] = {src_vocab.encode(src[i]), tgt_vocab.encode(tgt[i])};
    }
    NmtDims dims;
    dims.embed = embed;
    dims.hidden = dims.attn = dims.readout = hidden;
    dims.src_vocab = static_cast<int>(src_vocab.size());
    dims.tgt_vocab = static_cast<int>(tgt_vocab.size());
    TrainingConfig tc;
    tc.learning_rate = lr;
    tc.batch_size = batch;
    tc.max_iterations = iterations;
    tc.checkpoint_interval = interval;
    tc.clip_norm = clip;
    tc.seed = seed;
    Rng rng(seed);
    std::vector<Checkpoint> ckpts =
        train_loop_from(Seq2SeqParams::init(dims, rng), encoded, tc);
    std::filesystem::create_directories(out_dir);
    src_vocab.save(out_dir + "/src.vocab");
    tgt_vocab.save(out_dir + "/tgt.vocab");
    std::size_t best = ckpts.size() - 1;
    if (!dev_src_path.empty()) {
      ParallelCorpus dev_bpe;
      std::vector<Sentence> ds = load_sentences(dev_src_path, subword_options());
      std::vector<Sentence> dt = load_sentences(dev_tgt_path, subword_options());
      for (std::size_t i = 0; i < ds.size(); ++i) dev_bpe.pairs.push_back({ds[i], dt[i]});
      best = select_best(ckpts, dev_bpe, src_vocab, tgt_vocab);
    }
    for (const auto& ckpt : ckpts) {
      ckpt.save(out_dir + "/ckpt_" + std::to_string(ckpt.iteration) + ".bin");
    }
    ckpts[best].save(out_dir + "/best.bin");
    std::cout << "best checkpoint: iteration " << ckpts[best].iteration;
    if (ckpts[best].dev_score) std::cout << " dev bleu " << fmt_double(*ckpts[best].dev_score, 4);
    std::cout << '\n';
  });

  // ---- nmt-translate ----
  std::string ckpt_path, src_vocab_path, tgt_vocab_path, ensemble_paths;
  int nmt_beam = 5, nmt_max_len = 0;
  auto* nmt_translate_cmd = app.add_subcommand("nmt-translate", "beam decoding");
  nmt_translate_cmd->add_option("input", in_text, "subword source text")->required();
  nmt_translate_cmd->add_option("--ckpt", ckpt_path, "checkpoint file");
  nmt_translate_cmd->add_option("--ensemble", ensemble_paths,
                                "comma-separated checkpoints (averaged)");
  nmt_translate_cmd->add_option("--src-vocab", src_vocab_path)->required();
  nmt_translate_cmd->add_option("--tgt-vocab", tgt_vocab_path)->required();
  nmt_translate_cmd->add_option("--beam", nmt_beam);
  nmt_translate_cmd->add_option("--max-len", nmt_max_len, "0 = 2*source+10");
  nmt_translate_cmd->add_option("--out", out_path);
  nmt_translate_cmd->callback([&] {
    std::vector<Checkpoint> ckpts;
    if (!ensemble_paths.empty()) {
      std::istringstream ss(ensemble_paths);
      std::string item;
      while (std::getline(ss, item, ',')) ckpts.push_back(Checkpoint::load(item));
    } else if (!ckpt_path.empty()) {
      ckpts.push_back(Checkpoint::load(ckpt_path));
    } else {
      throw std::runtime_error("nmt-translate: need --ckpt or --ensemble");
    }
    std::vector<const Seq2SeqParams*> models;
    for (const auto& c : ckpts) models.push_back(&c.params);
    Vocabulary src_vocab = Vocabulary::load(src_vocab_path);
    Vocabulary tgt_vocab = Vocabulary::load(tgt_vocab_path);
    std::vector<Sentence> out;
    for (const auto& s : load_sentences(in_text, subword_options())) {
      int limit = nmt_max_len > 0 ? nmt_max_len : 2 * static_cast<int>(s.size()) + 10;
      out.push_back(
          translate_sentence(models, s, src_vocab, tgt_vocab, nmt_beam, limit).tokens);
    }
    emit_sentences(out, out_path);
  });

  // ---- nmt-gradcheck ----
  int gc_vocab = 20, gc_embed = 8, gc_hidden = 8, gc_coords = 200;
  double gc_eps = 1e-5, gc_tol = 1e-4;
  auto* gradcheck_cmd =
      app.add_subcommand("nmt-gradcheck", "finite-difference gradient check");
  gradcheck_cmd->add_option("--vocab", gc_vocab);
  gradcheck_cmd->add_option("--embed", gc_embed);
  gradcheck_cmd->add_option("--hidden", gc_hidden);
  gradcheck_cmd->add_option("--epsilon", gc_eps);
  gradcheck_cmd->add_option("--tolerance", gc_tol);
  gradcheck_cmd->add_option("--coords", gc_coords, "coordinates per tensor");
  gradcheck_cmd->add_option("--seed", seed);
  gradcheck_cmd->callback([&] {
    NmtDims dims;
    dims.embed = gc_embed;
    dims.hidden = dims.attn = dims.readout = gc_hidden;
    dims.src_vocab = dims.tgt_vocab = gc_vocab;
    Rng rng(seed);
    Seq2SeqParams params = Seq2SeqParams::init(dims, rng);
    EncodedPair pair;
    for (int i = 0; i < 6; ++i) {
      pair.source.push_back(kNumReservedIds + static_cast<int>(rng.next_index(gc_vocab - kNumReservedIds)));
    }
    for (int i = 0; i < 5; ++i) {
      pair.target.push_back(kNumReservedIds + static_cast<int>(rng.next_index(gc_vocab - kNumReservedIds)));
    }
    GradCheckReport report = gradient_check(params, pair, gc_eps, gc_tol, gc_coords, seed);
    for (const auto& t : report.tensors) {
      std::cout << t.name << "\tchecked " << t.checked << "\tmax rel err "
                << fmt_double(t.max_rel_error, 10) << '\n';
    }
    std::cout << "max relative error: " << fmt_double(report.max_rel_error, 10) << '\n';
    if (!report.passed) {
      for (const auto& f : report.failures) std::cerr << "FAIL " << f << '\n';
      throw std::runtime_error("gradient check failed");
    }
    std::cout << "gradient check passed\n";
  });

  // ---- attention-dump ----
  auto* attn_cmd = app.add_subcommand("attention-dump",
                                      "TSV attention matrices for plotting");
  attn_cmd->add_option("input", in_text, "subword source text")->required();
  attn_cmd->add_option("--ckpt", ckpt_path)->required();
  attn_cmd->add_option("--src-vocab", src_vocab_path)->required();
  attn_cmd->add_option("--tgt-vocab", tgt_vocab_path)->required();
  attn_cmd->add_option("--beam", nmt_beam);
  attn_cmd->add_option("--out", out_dir, "output directory")->required();
  attn_cmd->callback([&] {
    NmtBundle nmt = load_nmt(ckpt_path, src_vocab_path, tgt_vocab_path);
    std::filesystem::create_directories(out_dir);
    std::vector<Sentence> sents = load_sentences(in_text, subword_options());
    for (std::size_t i = 0; i < sents.size(); ++i) {
      SentenceTranslation out =
          translate_sentence({&nmt.ckpt.params}, sents[i], nmt.src_vocab, nmt.tgt_vocab,
                             nmt_beam, 2 * static_cast<int>(sents[i].size()) + 10);
      char name[16];
      std::snprintf(name, sizeof(name), "%03zu.tsv", i);
      write_file(out_dir + "/" + std::string(name),
                 attention_to_tsv(sents[i], out.tokens, out.attention));
    }
  });

  // ---- pretranslate ----
  bool filter_flag = false;
  auto* pretranslate_cmd =
      app.add_subcommand("pretranslate", "PBMT-translate a parallel corpus");
  pretranslate_cmd->add_option("source", in_src)->required();
  pretranslate_cmd->add_option("target", in_tgt)->required();
  pretranslate_cmd->add_option("--table", table_path)->required();
  pretranslate_cmd->add_option("--lm", lm_path)->required();
  pretranslate_cmd->add_option("--weights", weights_path);
  pretranslate_cmd->add_option("--beam", beam);
  pretranslate_cmd->add_option("--distortion", distortion);
  pretranslate_cmd->add_flag("--filter-singletons", filter_flag,
                             "drop singleton phrase pairs first");
  pretranslate_cmd->add_option("--out", out_path, "pre-translation output")->required();
  pretranslate_cmd->callback([&] {
    ParallelCorpus corpus = load_corpus(in_src, in_tgt);
    PhraseTable table = PhraseTable::load(table_path);
    NGramModel lm = NGramModel::load(lm_path);
    LogLinearWeights weights = weights_path.empty() ? LogLinearWeights::defaults()
                                                    : LogLinearWeights::load(weights_path);
    DecoderConfig config = make_decoder_config(table, lm, weights, beam, distortion, 1);
    ParallelCorpus pre = pretranslate_corpus(corpus, config, filter_flag);
    save_sentences(out_path, pre.sources());
  });

  // ---- premt-pipeline / premt-mixed ----
  std::string merges_file;
  for (const char* name : {"premt-pipeline", "premt-mixed"}) {
    auto* cmd = app.add_subcommand(
        name, std::string(name) == "premt-pipeline"
                  ? "PBMT then monolingual NMT"
                  : "PBMT output and source, marked and concatenated, into NMT");
    cmd->add_option("input", in_text)->required();
    cmd->add_option("--table", table_path)->required();
    cmd->add_option("--lm", lm_path)->required();
    cmd->add_option("--weights", weights_path);
    cmd->add_option("--beam", beam);
    cmd->add_option("--distortion", distortion);
    cmd->add_option("--merges", merges_file)->required();
    cmd->add_option("--ckpt", ckpt_path)->required();
    cmd->add_option("--src-vocab", src_vocab_path)->required();
    cmd->add_option("--tgt-vocab", tgt_vocab_path)->required();
    cmd->add_option("--nmt-beam", nmt_beam);
    cmd->add_option("--out", out_path);
    bool is_pipeline = std::string(name) == "premt-pipeline";
    cmd->callback([&, is_pipeline] {
      PhraseTable table = PhraseTable::load(table_path);
      NGramModel lm = NGramModel::load(lm_path);
      LogLinearWeights weights = weights_path.empty() ? LogLinearWeights::defaults()
                                                      : LogLinearWeights::load(weights_path);
      DecoderConfig smt = make_decoder_config(table, lm, weights, beam, distortion, 1);
      MergeTable merges = MergeTable::load(merges_file);
      NmtBundle nmt = load_nmt(ckpt_path, src_vocab_path, tgt_vocab_path);
      std::vector<Sentence> out;
      for (const auto& s : load_sentences(in_text)) {
        if (is_pipeline) {
          PipelineSystem system{&smt, &nmt.ckpt.params, &merges, &nmt.src_vocab,
                                &nmt.tgt_vocab, nmt_beam};
          out.push_back(pipeline_translate(s, system));
        } else {
          MixedSystem system;
          system.smt = &smt;
          system.mixed_nmt = &nmt.ckpt.params;
          system.merges = &merges;
          system.nmt_src_vocab = &nmt.src_vocab;
          system.nmt_tgt_vocab = &nmt.tgt_vocab;
          system.beam_size = nmt_beam;
          out.push_back(mixed_translate(s, system).tokens);
        }
      }
      emit_sentences(out, out_path);
    });
  }

  // ---- evaluate ----
  std::string ref_path, tsv_path;
  std::vector<std::string> hyp_paths;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "corpus BLEU");
  evaluate_cmd->add_option("--ref", ref_path)->required();
  evaluate_cmd->add_option("hypotheses", hyp_paths, "one or more hypothesis files")
      ->required();
  evaluate_cmd->add_option("--tsv", tsv_path, "also write a TSV report");
  evaluate_cmd->callback([&] {
    std::vector<Sentence> refs = load_sentences(ref_path, output_options());
    std::ostringstream tsv;
    tsv << "system\tbleu\tp1\tp2\tp3\tp4\tbrevity_penalty\thyp_len\tref_len\n";
    std::printf("%-24s %8s %6s %6s %6s %6s %6s\n", "system", "BLEU", "p1", "p2", "p3", "p4",
                "BP");
    for (const auto& path : hyp_paths) {
      BleuReport r = bleu(load_sentences(path, output_options()), refs);
      std::printf("%-24s %8.4f %6.3f %6.3f %6.3f %6.3f %6.3f\n", path.c_str(), r.bleu,
                  r.precisions[0], r.precisions[1], r.precisions[2], r.precisions[3],
                  r.brevity_penalty);
      tsv << path << '\t' << fmt_double(r.bleu) << '\t' << fmt_double(r.precisions[0])
          << '\t' << fmt_double(r.precisions[1]) << '\t' << fmt_double(r.precisions[2])
          << '\t' << fmt_double(r.precisions[3]) << '\t' << fmt_double(r.brevity_penalty)
          << '\t' << r.hyp_len << '\t' << r.ref_len << '\n';
    }
    if (!tsv_path.empty()) write_file(tsv_path, tsv.str());
  });

  // ---- freq-analysis ----
  std::string counts_path, thresholds_arg = "1,10,100,1000", normalize_to;
  auto* freq_cmd = app.add_subcommand("freq-analysis",
                                      "BLEU by training-frequency threshold");
  freq_cmd->add_option("--ref", ref_path)->required();
  freq_cmd->add_option("hypotheses", hyp_paths, "name=path pairs")->required();
  freq_cmd->add_option("--counts", counts_path, "vocabulary file with counts")->required();
  freq_cmd->add_option("--thresholds", thresholds_arg);
  freq_cmd->add_option("--normalize-to", normalize_to, "system name")->required();
  freq_cmd->add_option("--out", out_path, "TSV output (default stdout)");
  freq_cmd->callback([&] {
    std::vector<Sentence> refs = load_sentences(ref_path, output_options());
    Vocabulary counts = Vocabulary::load(counts_path);
    std::vector<NamedSystem> systems;
    for (const auto& spec : hyp_paths) {
      auto eq = spec.find('=');
      if (eq == std::string::npos) {
        throw std::runtime_error("freq-analysis: expected name=path, got: " + spec);
      }
      systems.push_back(
          {spec.substr(0, eq), load_sentences(spec.substr(eq + 1), output_options())});
    }
    std::vector<std::int64_t> thresholds;
    std::istringstream ss(thresholds_arg);
    std::string item;
    while (std::getline(ss, item, ',')) thresholds.push_back(std::stoll(item));
    FrequencyBucketReport report =
        frequency_sweep(systems, refs, counts, thresholds, normalize_to);
    if (out_path.empty()) std::cout << report.to_tsv();
    else write_file(out_path, report.to_tsv());
  });

  // ---- synth-corpus ----
  SyntheticSpec synth;
  auto* synth_cmd = app.add_subcommand(
      "synth-corpus", "constructed corpus with reordering and rare-token stress");
  synth_cmd->add_option("--train", synth.train_pairs);
  synth_cmd->add_option("--dev", synth.dev_pairs);
  synth_cmd->add_option("--test", synth.test_pairs);
  synth_cmd->add_option("--entities", synth.num_rare_entities);
  synth_cmd->add_option("--hapax", synth.num_hapax);
  synth_cmd->add_option("--seed", synth.seed);
  synth_cmd->add_option("--out", out_dir, "output directory")->required();
  synth_cmd->callback([&] {
    SyntheticData data = make_synthetic_corpus(synth);
    std::filesystem::create_directories(out_dir);
    save_sentences(out_dir + "/train.src", data.train.sources());
    save_sentences(out_dir + "/train.tgt", data.train.targets());
    save_sentences(out_dir + "/dev.src", data.dev.sources());
    save_sentences(out_dir + "/dev.tgt", data.dev.targets());
    save_sentences(out_dir + "/test.src", data.test.sources());
    save_sentences(out_dir + "/test.tgt", data.test.targets());
  });

  // ---- experiment ----
  std::string config_path;
  std::vector<std::string> overrides;
  auto* experiment_cmd = app.add_subcommand("experiment", "end-to-end experiment driver");
  experiment_cmd->add_option("--config", config_path, "key=value config file");
  experiment_cmd->add_option("--set", overrides, "key=value overrides")->take_all();
  experiment_cmd->add_option("--out", out_dir, "overrides out_dir");
  experiment_cmd->callback([&] {
    std::string content = config_path.empty() ? "" : read_file(config_path);
    for (const auto& o : overrides) content += "\n" + o;
    if (!out_dir.empty()) content += "\nout_dir=" + out_dir;
    ExperimentConfig config = ExperimentConfig::from_string(content);
    ExperimentResult result = run_experiment(config);
    std::cout << "mode " << config.mode << ": test BLEU " << fmt_double(result.bleu.bleu, 4)
              << " -> " << result.hyp_path << '\n';
  });

  CLI11_PARSE(app, argc, argv);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  }
}
