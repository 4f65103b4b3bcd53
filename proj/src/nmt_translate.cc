#include <algorithm>
#include <cmath>
#include <sstream>

#include "nmt_internal.h"
#include "premt/nmt.h"

namespace premt {

namespace {

struct Hypothesis {
  std::vector<int> tokens;          // emitted target ids, no EOS
  double log_prob = 0.0;            // raw cumulative log probability
  std::vector<Vector> states;       // per ensemble member
  std::vector<Vector> attn_rows;    // averaged over members, one per step
  int prev_id = kBosId;
};

struct Completed {
  std::vector<int> tokens;
  std::vector<Vector> attn_rows;
  double normalized = 0.0;
};

void check_attention_row(const Vector& row) {
  double sum = row.sum();
  if (std::abs(sum - 1.0) > 1e-6 || row.minCoeff() < 0.0) {
    throw std::runtime_error("attention row violates the distribution invariant (sum=" +
                             fmt_double(sum, 9) + ")");
  }
}

}  // namespace

TranslateResult translate(const std::vector<const Seq2SeqParams*>& ensemble,
                          const std::vector<int>& source, int beam_size, int max_len) {
  if (ensemble.empty()) throw std::runtime_error("translate: empty ensemble");
  if (beam_size < 1) throw std::runtime_error("translate: beam_size must be >= 1");
  if (max_len < 1) throw std::runtime_error("translate: max_len must be >= 1");
  const int n_models = static_cast<int>(ensemble.size());
  const int vt = ensemble[0]->dims.tgt_vocab;
  for (const Seq2SeqParams* m : ensemble) {
    if (m->dims.tgt_vocab != vt) {
      throw std::runtime_error("translate: ensemble members disagree on target vocab");
    }
  }

  std::vector<Matrix> ann(n_models), UaA(n_models);
  Hypothesis root;
  for (int m = 0; m < n_models; ++m) {
    ann[m] = encode(*ensemble[m], source);
    UaA[m] = ensemble[m]->attn_U * ann[m];
    root.states.push_back(detail::initial_state(*ensemble[m], ann[m]));
  }

  std::vector<Hypothesis> live = {std::move(root)};
  std::vector<Completed> completed;

  for (int step = 0; step < max_len && !live.empty(); ++step) {
    struct Candidate {
      double log_prob;
      int hyp;
      int token;
    };
    std::vector<Candidate> candidates;
    std::vector<std::vector<Vector>> new_states(live.size());
    std::vector<Vector> step_attn(live.size());

    for (std::size_t h = 0; h < live.size(); ++h) {
      Vector mean_probs = Vector::Zero(vt);
      Vector mean_alpha;
      for (int m = 0; m < n_models; ++m) {
        detail::DecoderStep ds = detail::decoder_step(*ensemble[m], live[h].states[m],
                                                      live[h].prev_id, ann[m], UaA[m]);
        mean_probs += ds.probs;
        if (m == 0) mean_alpha = ds.alpha;
        else mean_alpha += ds.alpha;
        new_states[h].push_back(std::move(ds.state));
      }
      mean_probs /= static_cast<double>(n_models);
      mean_alpha /= static_cast<double>(n_models);
      check_attention_row(mean_alpha);
      step_attn[h] = std::move(mean_alpha);

      // Per-hypothesis top beam_size continuations suffice for the global
      // top beam_size.
      std::vector<int> idx(vt);
      for (int i = 0; i < vt; ++i) idx[i] = i;
      int keep = std::min(beam_size, vt);
      std::partial_sort(idx.begin(), idx.begin() + keep, idx.end(), [&](int a, int b) {
        if (mean_probs(a) != mean_probs(b)) return mean_probs(a) > mean_probs(b);
        return a < b;
      });
      for (int k = 0; k < keep; ++k) {
        candidates.push_back({live[h].log_prob + std::log(mean_probs(idx[k])),
                              static_cast<int>(h), idx[k]});
      }
    }

    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const Candidate& a, const Candidate& b) {
                       return a.log_prob > b.log_prob;
                     });
    if (static_cast<int>(candidates.size()) > beam_size) candidates.resize(beam_size);

    std::vector<Hypothesis> next;
    for (const Candidate& cand : candidates) {
      const Hypothesis& parent = live[cand.hyp];
      if (cand.token == kEosId) {
        Completed done;
        done.tokens = parent.tokens;
        done.attn_rows = parent.attn_rows;
        done.attn_rows.push_back(step_attn[cand.hyp]);
        done.normalized =
            cand.log_prob / static_cast<double>(done.tokens.size() + 1);
        completed.push_back(std::move(done));
      } else {
        Hypothesis hyp;
        hyp.tokens = parent.tokens;
        hyp.tokens.push_back(cand.token);
        hyp.log_prob = cand.log_prob;
        hyp.states = new_states[cand.hyp];
        hyp.attn_rows = parent.attn_rows;
        hyp.attn_rows.push_back(step_attn[cand.hyp]);
        hyp.prev_id = cand.token;
        next.push_back(std::move(hyp));
      }
    }
    live = std::move(next);
  }

  if (completed.empty()) {
    // Ran out of length budget: treat the surviving hypotheses as complete.
    for (const Hypothesis& hyp : live) {
      Completed done;
      done.tokens = hyp.tokens;
      done.attn_rows = hyp.attn_rows;
      done.normalized =
          hyp.log_prob / std::max<double>(1.0, static_cast<double>(hyp.tokens.size()));
      completed.push_back(std::move(done));
    }
  }
  if (completed.empty()) throw std::runtime_error("translate: no hypothesis produced");

  std::size_t best = 0;
  for (std::size_t c = 1; c < completed.size(); ++c) {
    if (completed[c].normalized > completed[best].normalized) best = c;
  }
  TranslateResult result;
  result.target_ids = completed[best].tokens;
  result.score = completed[best].normalized;
  const std::vector<Vector>& rows = completed[best].attn_rows;
  result.attention.weights.resize(rows.size(), source.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    result.attention.weights.row(r) = rows[r].transpose();
  }
  return result;
}

TranslateResult translate(const Seq2SeqParams& params, const std::vector<int>& source,
                          int beam_size, int max_len) {
  return translate(std::vector<const Seq2SeqParams*>{&params}, source, beam_size, max_len);
}

SentenceTranslation translate_sentence(const std::vector<const Seq2SeqParams*>& ensemble,
                                       const Sentence& source, const Vocabulary& src_vocab,
                                       const Vocabulary& tgt_vocab, int beam_size,
                                       int max_len) {
  TranslateResult result = translate(ensemble, src_vocab.encode(source), beam_size, max_len);
  SentenceTranslation out;
  out.tokens = tgt_vocab.decode(result.target_ids);
  out.attention = std::move(result.attention);
  out.score = result.score;
  return out;
}

std::string attention_to_tsv(const Sentence& source, const Sentence& target,
                             const AttentionMatrix& attention) {
  const Matrix& w = attention.weights;
  if (w.cols() != static_cast<Eigen::Index>(source.size())) {
    throw std::runtime_error("attention_to_tsv: column count does not match source length");
  }
  // The final row is the EOS step when there is one more row than target
  // tokens.
  std::ostringstream ss;
  for (const auto& tok : source) ss << '\t' << tok;
  ss << '\n';
  for (Eigen::Index r = 0; r < w.rows(); ++r) {
    if (r < static_cast<Eigen::Index>(target.size())) ss << target[r];
    else ss << kEosToken;
    for (Eigen::Index c = 0; c < w.cols(); ++c) ss << '\t' << fmt_double(w(r, c));
    ss << '\n';
  }
  return ss.str();
}

}  // namespace premt
