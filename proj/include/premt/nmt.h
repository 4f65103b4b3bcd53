// nmt.h -- attentional encoder-decoder: bi-directional GRU encoder, additive
// soft attention, GRU decoder, exact-gradient training and beam decoding.
//
// Cell and model equations (double precision throughout):
//   GRU(x, h):  z = sigmoid(Wz x + Uz h + bz)
//               r = sigmoid(Wr x + Ur h + br)
//               c = tanh(Wh x + Uh (r . h) + bh)
//               h' = (1 - z) . h + z . c
//   encoder:    fwd_j = GRU_f(emb(src_j), fwd_{j-1}),  fwd_0 = 0
//               bwd_j = GRU_b(emb(src_j), bwd_{j+1}),  bwd_{J+1} = 0
//               annotation a_j = [fwd_j ; bwd_j]
//   dec. init:  s_0 = tanh(Wi bwd_1 + bi)
//   attention:  score_j = v . tanh(Wa s_{t-1} + Ua a_j + ba)
//               alpha = softmax(score),  ctx = sum_j alpha_j a_j
//   decoder:    s_t = GRU_d([emb(y_{t-1}) ; ctx], s_{t-1})   (y_0 = BOS)
//   readout:    g = tanh(Uo s_t + Vo ctx + Co emb(y_{t-1}) + bo)
//               p(y_t) = softmax(Wo g + co)
#ifndef PREMT_NMT_H
#define PREMT_NMT_H

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "premt/bpe.h"
#include "premt/corpus.h"
#include "premt/util.h"

namespace premt {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct NmtDims {
  int embed = 32;
  int hidden = 64;
  int attn = 64;     // alignment-layer width
  int readout = 64;  // pre-softmax layer width
  int src_vocab = 0;
  int tgt_vocab = 0;

  bool operator==(const NmtDims&) const = default;
};

struct GruParams {
  Matrix Wz, Uz, Wr, Ur, Wh, Uh;  // input and recurrent weights
  Matrix bz, br, bh;              // biases as column matrices
};

struct Seq2SeqParams {
  NmtDims dims;
  Matrix src_embed, tgt_embed;  // vocab x embed, one row per token
  GruParams enc_fwd, enc_bwd, dec;
  Matrix init_W, init_b;               // decoder start state projection
  Matrix attn_W, attn_U, attn_b, attn_v;
  Matrix out_Us, out_Vc, out_Cy, out_b;  // readout
  Matrix out_W, out_bo;                  // projection to target vocab

  static Seq2SeqParams init(const NmtDims& dims, Rng& rng);
};

// Named views over every parameter tensor, in a fixed order. The same order
// is used by the optimizer state, the gradient check and the checkpoint file.
struct TensorRef {
  std::string name;
  Matrix* tensor;
};
std::vector<TensorRef> tensor_refs(Seq2SeqParams& params);

struct AttentionMatrix {
  // [target steps x source positions]; the final row is the EOS step.
  Matrix weights;
};

struct TrainingConfig {
  double learning_rate = 1e-3;
  int batch_size = 16;
  int max_iterations = 1000;
  int checkpoint_interval = 100;
  double clip_norm = 5.0;
  std::uint64_t seed = 1;
  // Adam moments.
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct EncodedPair {
  std::vector<int> source;  // ids in [0, src_vocab)
  std::vector<int> target;  // ids in [0, tgt_vocab), without BOS/EOS
};

struct AdamState {
  std::vector<Matrix> m, v;  // per tensor, tensor_refs order
  std::int64_t step = 0;

  static AdamState zeros(Seq2SeqParams& params);
};

struct Checkpoint {
  Seq2SeqParams params;
  std::int64_t iteration = 0;
  AdamState optimizer;
  std::optional<double> dev_score;

  void save(const std::string& path) const;
  static Checkpoint load(const std::string& path);
};

// ---- forward/backward graph -------------------------------------------

// Encoder annotations, one column per source position (2*hidden x J).
// Throws on empty input.
Matrix encode(const Seq2SeqParams& params, const std::vector<int>& source);

// Single attention query: alignment weights over the annotation columns and
// the context vector. Exposed for tests and for decoding.
struct AttentionResult {
  Vector weights;  // J, nonnegative, sums to 1
  Vector context;  // 2*hidden
};
AttentionResult attend(const Seq2SeqParams& params, const Vector& decoder_state,
                       const Matrix& annotations);

// Teacher-forced loss (sum over steps) and, optionally, exact gradients for
// one pair. `grads` must be zero-initialized with the parameter shapes.
double pair_loss(const Seq2SeqParams& params, const EncodedPair& pair);
double pair_loss_and_grad(const Seq2SeqParams& params, const EncodedPair& pair,
                          Seq2SeqParams& grads);

// Independent scalar reimplementation of the forward pass in extended
// precision; the finite-difference oracle inside gradient_check evaluates
// this, never the Eigen path it is checking.
long double pair_loss_reference(const Seq2SeqParams& params, const EncodedPair& pair);

// ---- training ----------------------------------------------------------

class NmtTrainer {
 public:
  NmtTrainer(Seq2SeqParams params, const TrainingConfig& config);

  // Mean per-token cross-entropy over the batch; applies one clipped Adam
  // update. Throws on non-finite loss.
  double train_step(const std::vector<EncodedPair>& batch);

  const Seq2SeqParams& params() const { return params_; }
  Seq2SeqParams& params() { return params_; }
  const AdamState& optimizer() const { return adam_; }
  AdamState& optimizer() { return adam_; }

 private:
  Seq2SeqParams params_;
  TrainingConfig config_;
  AdamState adam_;
};

// Runs max_iterations train steps over seeded-shuffled batches, storing a
// checkpoint every checkpoint_interval iterations. The first form derives
// the vocabulary sizes from the corpus and uses default dimensions; the
// second starts from caller-initialized parameters.
std::vector<Checkpoint> train_loop(const std::vector<EncodedPair>& corpus,
                                   const TrainingConfig& config);
std::vector<Checkpoint> train_loop_from(Seq2SeqParams params,
                                        const std::vector<EncodedPair>& corpus,
                                        const TrainingConfig& config);

// Decodes the (BPE-encoded) dev corpus with every checkpoint, scores corpus
// BLEU after undoing BPE, returns the argmax index (earliest on ties).
// Dev scores are filled into the checkpoints.
std::size_t select_best(std::vector<Checkpoint>& checkpoints, const ParallelCorpus& dev,
                        const Vocabulary& src_vocab, const Vocabulary& tgt_vocab,
                        const std::string& marker = kBpeMarker);

// ---- gradient check ----------------------------------------------------

struct GradCheckTensorReport {
  std::string name;
  int checked = 0;
  double max_rel_error = 0.0;
};

struct GradCheckReport {
  std::vector<GradCheckTensorReport> tensors;
  double max_rel_error = 0.0;
  bool passed = false;
  std::vector<std::string> failures;  // "tensor[i,j]: rel err"
};

// Central finite differences against the analytic gradient; checks up to
// max_coords_per_tensor coordinates of every tensor (all of them when the
// tensor is small enough).
GradCheckReport gradient_check(const Seq2SeqParams& params, const EncodedPair& pair,
                               double epsilon, double tolerance,
                               int max_coords_per_tensor = 200,
                               std::uint64_t seed = 7);

// ---- decoding ----------------------------------------------------------

struct TranslateResult {
  std::vector<int> target_ids;  // without EOS
  AttentionMatrix attention;    // one row per step incl. the EOS step
  double score = 0.0;           // log-probability / number of steps
};

// Beam search; an ensemble averages the per-step output distributions of all
// member models. Terminates on EOS or max_len.
TranslateResult translate(const std::vector<const Seq2SeqParams*>& ensemble,
                          const std::vector<int>& source, int beam_size, int max_len);
TranslateResult translate(const Seq2SeqParams& params, const std::vector<int>& source,
                          int beam_size, int max_len);

// Token-level convenience wrapper: encodes, decodes, maps ids back.
struct SentenceTranslation {
  Sentence tokens;
  AttentionMatrix attention;
  double score = 0.0;
};
SentenceTranslation translate_sentence(const std::vector<const Seq2SeqParams*>& ensemble,
                                       const Sentence& source, const Vocabulary& src_vocab,
                                       const Vocabulary& tgt_vocab, int beam_size,
                                       int max_len);

// Attention dump: first row source tokens, first column target tokens,
// cells = weights.
std::string attention_to_tsv(const Sentence& source, const Sentence& target,
                             const AttentionMatrix& attention);

}  // namespace premt

#endif  // PREMT_NMT_H
