#include <algorithm>
#include <cmath>
#include <numeric>

#include "premt/eval.h"
#include "premt/nmt.h"

namespace premt {

namespace {

Seq2SeqParams zero_like(const Seq2SeqParams& params) {
  Seq2SeqParams z = params;
  for (TensorRef& ref : tensor_refs(z)) ref.tensor->setZero();
  return z;
}

}  // namespace

NmtTrainer::NmtTrainer(Seq2SeqParams params, const TrainingConfig& config)
    : params_(std::move(params)), config_(config), adam_(AdamState::zeros(params_)) {}

double NmtTrainer::train_step(const std::vector<EncodedPair>& batch) {
  if (batch.empty()) throw std::runtime_error("train_step: empty batch");
  Seq2SeqParams grads = zero_like(params_);
  double loss_sum = 0.0;
  std::int64_t tokens = 0;
  for (const EncodedPair& pair : batch) {
    loss_sum += pair_loss_and_grad(params_, pair, grads);
    tokens += static_cast<std::int64_t>(pair.target.size()) + 1;
  }
  double loss = loss_sum / static_cast<double>(tokens);
  if (!std::isfinite(loss)) throw std::runtime_error("train_step: non-finite loss");

  std::vector<TensorRef> grad_refs = tensor_refs(grads);
  double scale = 1.0 / static_cast<double>(tokens);
  double sq_norm = 0.0;
  for (TensorRef& ref : grad_refs) {
    *ref.tensor *= scale;
    sq_norm += ref.tensor->squaredNorm();
  }
  double norm = std::sqrt(sq_norm);
  if (config_.clip_norm > 0.0 && norm > config_.clip_norm) {
    double shrink = config_.clip_norm / norm;
    for (TensorRef& ref : grad_refs) *ref.tensor *= shrink;
  }

  adam_.step += 1;
  double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(adam_.step));
  double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(adam_.step));
  std::vector<TensorRef> param_refs = tensor_refs(params_);
  for (std::size_t i = 0; i < param_refs.size(); ++i) {
    const Matrix& g = *grad_refs[i].tensor;
    adam_.m[i] = config_.beta1 * adam_.m[i] + (1.0 - config_.beta1) * g;
    adam_.v[i] = config_.beta2 * adam_.v[i] + (1.0 - config_.beta2) * g.cwiseProduct(g);
    Matrix mhat = adam_.m[i] / bc1;
    Matrix vhat = adam_.v[i] / bc2;
    *param_refs[i].tensor -=
        config_.learning_rate *
        mhat.cwiseQuotient(vhat.cwiseSqrt() +
                           Matrix::Constant(vhat.rows(), vhat.cols(), config_.epsilon));
  }
  return loss;
}

std::vector<Checkpoint> train_loop(const std::vector<EncodedPair>& corpus,
                                   const TrainingConfig& config) {
  if (corpus.empty()) throw std::runtime_error("train_loop: empty corpus");
  int src_vocab = 0, tgt_vocab = 0;
  for (const EncodedPair& pair : corpus) {
    for (int id : pair.source) src_vocab = std::max(src_vocab, id + 1);
    for (int id : pair.target) tgt_vocab = std::max(tgt_vocab, id + 1);
  }
  NmtDims dims;
  dims.src_vocab = std::max(src_vocab, kNumReservedIds);
  dims.tgt_vocab = std::max(tgt_vocab, kNumReservedIds);
  Rng rng(config.seed);
  Seq2SeqParams params = Seq2SeqParams::init(dims, rng);
  return train_loop_from(std::move(params), corpus, config);
}

std::vector<Checkpoint> train_loop_from(Seq2SeqParams params,
                                        const std::vector<EncodedPair>& corpus,
                                        const TrainingConfig& config) {
  if (corpus.empty()) throw std::runtime_error("train_loop: empty corpus");
  NmtTrainer trainer(std::move(params), config);
  Rng shuffle_rng = Rng(config.seed).fork(0x51deULL);

  std::vector<Checkpoint> checkpoints;
  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), 0);
  std::size_t cursor = corpus.size();  // forces a shuffle on the first batch

  for (int iter = 1; iter <= config.max_iterations; ++iter) {
    std::vector<EncodedPair> batch;
    batch.reserve(config.batch_size);
    for (int b = 0; b < config.batch_size; ++b) {
      if (cursor >= order.size()) {
        shuffle_indices(order, shuffle_rng);
        cursor = 0;
      }
      batch.push_back(corpus[order[cursor++]]);
    }
    try {
      trainer.train_step(batch);
    } catch (const std::exception& e) {
      throw std::runtime_error("train_loop: iteration " + std::to_string(iter) + ": " +
                               e.what());
    }
    if (config.checkpoint_interval > 0 && iter % config.checkpoint_interval == 0) {
      Checkpoint ckpt;
      ckpt.params = trainer.params();
      ckpt.iteration = iter;
      ckpt.optimizer = trainer.optimizer();
      checkpoints.push_back(std::move(ckpt));
    }
  }
  return checkpoints;
}

std::size_t select_best(std::vector<Checkpoint>& checkpoints, const ParallelCorpus& dev,
                        const Vocabulary& src_vocab, const Vocabulary& tgt_vocab,
                        const std::string& marker) {
  if (checkpoints.empty()) throw std::runtime_error("select_best: no checkpoints");
  if (dev.empty()) throw std::runtime_error("select_best: empty dev corpus");
  std::vector<Sentence> references;
  for (const auto& pair : dev.pairs) references.push_back(undo_bpe(pair.target, marker));

  std::size_t best = 0;
  double best_bleu = -1.0;
  for (std::size_t c = 0; c < checkpoints.size(); ++c) {
    std::vector<Sentence> hyps;
    for (const auto& pair : dev.pairs) {
      std::vector<int> src = src_vocab.encode(pair.source);
      int max_len = 2 * static_cast<int>(src.size()) + 10;
      TranslateResult result = translate(checkpoints[c].params, src, 1, max_len);
      hyps.push_back(undo_bpe(tgt_vocab.decode(result.target_ids), marker));
    }
    double score = bleu(hyps, references).bleu;
    checkpoints[c].dev_score = score;
    if (score > best_bleu) {  // strict: earliest wins ties
      best_bleu = score;
      best = c;
    }
  }
  return best;
}

GradCheckReport gradient_check(const Seq2SeqParams& params, const EncodedPair& pair,
                               double epsilon, double tolerance, int max_coords_per_tensor,
                               std::uint64_t seed) {
  // Mean per-token loss for this pair, matching the training objective.
  double denom = static_cast<double>(pair.target.size()) + 1.0;
  Seq2SeqParams work = params;
  Seq2SeqParams grads = work;
  for (TensorRef& ref : tensor_refs(grads)) ref.tensor->setZero();
  pair_loss_and_grad(work, pair, grads);

  GradCheckReport report;
  report.passed = true;
  Rng rng(seed);
  std::vector<TensorRef> work_refs = tensor_refs(work);
  std::vector<TensorRef> grad_refs = tensor_refs(grads);
  for (std::size_t t = 0; t < work_refs.size(); ++t) {
    Matrix& tensor = *work_refs[t].tensor;
    const Matrix& analytic = *grad_refs[t].tensor;
    const int numel = static_cast<int>(tensor.size());
    std::vector<int> coords;
    if (numel <= max_coords_per_tensor) {
      coords.resize(numel);
      std::iota(coords.begin(), coords.end(), 0);
    } else {
      for (int k = 0; k < max_coords_per_tensor; ++k) {
        coords.push_back(static_cast<int>(rng.next_index(numel)));
      }
    }
    GradCheckTensorReport tr;
    tr.name = work_refs[t].name;
    tr.checked = static_cast<int>(coords.size());
    for (int flat : coords) {
      int r = flat % static_cast<int>(tensor.rows());
      int c = flat / static_cast<int>(tensor.rows());
      double saved = tensor(r, c);
      tensor(r, c) = saved + epsilon;
      long double up = pair_loss_reference(work, pair) / static_cast<long double>(denom);
      tensor(r, c) = saved - epsilon;
      long double down = pair_loss_reference(work, pair) / static_cast<long double>(denom);
      tensor(r, c) = saved;
      double numeric =
          static_cast<double>((up - down) / (2.0L * static_cast<long double>(epsilon)));
      double exact = analytic(r, c) / denom;
      double rel = std::abs(exact - numeric) /
                   std::max({std::abs(exact), std::abs(numeric), 1e-8});
      tr.max_rel_error = std::max(tr.max_rel_error, rel);
      if (rel > tolerance) {
        report.passed = false;
        report.failures.push_back(tr.name + "[" + std::to_string(r) + "," +
                                  std::to_string(c) + "]: rel err " + fmt_double(rel, 8));
      }
    }
    report.max_rel_error = std::max(report.max_rel_error, tr.max_rel_error);
    report.tensors.push_back(std::move(tr));
  }
  return report;
}

}  // namespace premt
