// Forward pass and exact reverse-mode gradients for the attentional
// encoder-decoder. The equations live in nmt.h; every cached quantity here
// is named after its symbol there.
#include <cmath>

#include "nmt_internal.h"
#include "premt/nmt.h"

namespace premt {

namespace {

Vector sigmoid(const Vector& v) {
  return v.unaryExpr([](double x) { return 1.0 / (1.0 + std::exp(-x)); });
}

Vector tanh_vec(const Vector& v) {
  return v.unaryExpr([](double x) { return std::tanh(x); });
}

struct GruCache {
  Vector x, h_prev, z, r, c, h;
};

GruCache gru_forward(const GruParams& g, const Vector& x, const Vector& h_prev) {
  GruCache cache;
  cache.x = x;
  cache.h_prev = h_prev;
  cache.z = sigmoid(g.Wz * x + g.Uz * h_prev + g.bz.col(0));
  cache.r = sigmoid(g.Wr * x + g.Ur * h_prev + g.br.col(0));
  cache.c = tanh_vec(g.Wh * x + g.Uh * (cache.r.cwiseProduct(h_prev)) + g.bh.col(0));
  cache.h = (Vector::Ones(h_prev.size()) - cache.z).cwiseProduct(h_prev) +
            cache.z.cwiseProduct(cache.c);
  return cache;
}

// Accumulates parameter gradients; returns dx and dh_prev.
void gru_backward(const GruParams& g, const GruCache& cache, const Vector& dh,
                  GruParams& grad, Vector& dx, Vector& dh_prev) {
  const Vector ones = Vector::Ones(dh.size());
  Vector dz = dh.cwiseProduct(cache.c - cache.h_prev);
  Vector dc = dh.cwiseProduct(cache.z);
  dh_prev = dh.cwiseProduct(ones - cache.z);

  Vector dc_pre = dc.cwiseProduct(ones - cache.c.cwiseProduct(cache.c));
  grad.Wh += dc_pre * cache.x.transpose();
  grad.Uh += dc_pre * (cache.r.cwiseProduct(cache.h_prev)).transpose();
  grad.bh.col(0) += dc_pre;
  Vector drh = g.Uh.transpose() * dc_pre;
  Vector dr = drh.cwiseProduct(cache.h_prev);
  dh_prev += drh.cwiseProduct(cache.r);
  dx = g.Wh.transpose() * dc_pre;

  Vector dz_pre = dz.cwiseProduct(cache.z).cwiseProduct(ones - cache.z);
  grad.Wz += dz_pre * cache.x.transpose();
  grad.Uz += dz_pre * cache.h_prev.transpose();
  grad.bz.col(0) += dz_pre;
  dx += g.Wz.transpose() * dz_pre;
  dh_prev += g.Uz.transpose() * dz_pre;

  Vector dr_pre = dr.cwiseProduct(cache.r).cwiseProduct(ones - cache.r);
  grad.Wr += dr_pre * cache.x.transpose();
  grad.Ur += dr_pre * cache.h_prev.transpose();
  grad.br.col(0) += dr_pre;
  dx += g.Wr.transpose() * dr_pre;
  dh_prev += g.Ur.transpose() * dr_pre;
}

struct EncoderCache {
  std::vector<GruCache> fwd, bwd;
  Matrix ann;  // 2H x J
};

EncoderCache encoder_forward(const Seq2SeqParams& p, const std::vector<int>& source) {
  if (source.empty()) throw std::runtime_error("encode: empty input");
  const int H = p.dims.hidden;
  const int J = static_cast<int>(source.size());
  for (int id : source) {
    if (id < 0 || id >= p.dims.src_vocab) {
      throw std::runtime_error("encode: source id out of range: " + std::to_string(id));
    }
  }
  EncoderCache cache;
  cache.fwd.reserve(J);
  cache.bwd.resize(J);
  Vector h = Vector::Zero(H);
  for (int j = 0; j < J; ++j) {
    cache.fwd.push_back(gru_forward(p.enc_fwd, p.src_embed.row(source[j]).transpose(), h));
    h = cache.fwd.back().h;
  }
  h = Vector::Zero(H);
  for (int j = J - 1; j >= 0; --j) {
    cache.bwd[j] = gru_forward(p.enc_bwd, p.src_embed.row(source[j]).transpose(), h);
    h = cache.bwd[j].h;
  }
  cache.ann.resize(2 * H, J);
  for (int j = 0; j < J; ++j) {
    cache.ann.block(0, j, H, 1) = cache.fwd[j].h;
    cache.ann.block(H, j, H, 1) = cache.bwd[j].h;
  }
  return cache;
}

struct AttnCache {
  Vector q;        // A
  Matrix t;        // A x J, tanh of the alignment layer
  Vector alpha;    // J
  Vector ctx;      // 2H
};

// UaA = attn_U * ann, precomputed once per sentence.
AttnCache attn_forward(const Seq2SeqParams& p, const Vector& s_prev, const Matrix& ann,
                       const Matrix& UaA) {
  AttnCache cache;
  cache.q = p.attn_W * s_prev + p.attn_b.col(0);
  const int J = static_cast<int>(ann.cols());
  cache.t = (UaA.colwise() + cache.q).unaryExpr([](double x) { return std::tanh(x); });
  Vector scores = cache.t.transpose() * p.attn_v.col(0);
  double m = scores.maxCoeff();
  Vector exps = (scores.array() - m).exp();
  cache.alpha = exps / exps.sum();
  cache.ctx = ann * cache.alpha;
  (void)J;
  return cache;
}

// Returns ds_prev; accumulates dann and parameter gradients.
Vector attn_backward(const Seq2SeqParams& p, const AttnCache& cache, const Matrix& ann,
                     const Vector& s_prev, const Vector& dctx, Matrix& dann,
                     Seq2SeqParams& grad) {
  Vector dalpha = ann.transpose() * dctx;
  dann += dctx * cache.alpha.transpose();
  double inner = cache.alpha.dot(dalpha);
  Vector dscores = cache.alpha.cwiseProduct((dalpha.array() - inner).matrix());
  grad.attn_v.col(0) += cache.t * dscores;
  Matrix dT = p.attn_v.col(0) * dscores.transpose();           // A x J
  Matrix dpre = dT.cwiseProduct(Matrix::Ones(dT.rows(), dT.cols()) - cache.t.cwiseProduct(cache.t));
  Vector dq = dpre.rowwise().sum();
  grad.attn_W += dq * s_prev.transpose();
  grad.attn_b.col(0) += dq;
  grad.attn_U += dpre * ann.transpose();
  dann += p.attn_U.transpose() * dpre;
  return p.attn_W.transpose() * dq;
}

struct StepCache {
  int prev_id = 0;
  Vector e_prev;
  AttnCache attn;
  GruCache gru;
  Vector g_act;  // readout tanh
  Vector logp;   // log-softmax over the target vocabulary
};

struct ForwardCache {
  EncoderCache enc;
  Matrix UaA;
  Vector s0_arg, s0;
  std::vector<StepCache> steps;
  double loss = 0.0;  // sum of per-step cross-entropies
};

ForwardCache full_forward(const Seq2SeqParams& p, const EncodedPair& pair) {
  for (int id : pair.target) {
    if (id < 0 || id >= p.dims.tgt_vocab) {
      throw std::runtime_error("target id out of range: " + std::to_string(id));
    }
  }
  ForwardCache fc;
  fc.enc = encoder_forward(p, pair.source);
  fc.UaA = p.attn_U * fc.enc.ann;
  fc.s0_arg = p.init_W * fc.enc.bwd[0].h + p.init_b.col(0);
  fc.s0 = tanh_vec(fc.s0_arg);

  const int steps = static_cast<int>(pair.target.size()) + 1;  // + EOS
  Vector s_prev = fc.s0;
  fc.steps.reserve(steps);
  for (int i = 0; i < steps; ++i) {
    StepCache sc;
    sc.prev_id = i == 0 ? kBosId : pair.target[i - 1];
    sc.e_prev = p.tgt_embed.row(sc.prev_id).transpose();
    sc.attn = attn_forward(p, s_prev, fc.enc.ann, fc.UaA);
    Vector u(p.dims.embed + 2 * p.dims.hidden);
    u << sc.e_prev, sc.attn.ctx;
    sc.gru = gru_forward(p.dec, u, s_prev);
    Vector g_pre = p.out_Us * sc.gru.h + p.out_Vc * sc.attn.ctx + p.out_Cy * sc.e_prev +
                   p.out_b.col(0);
    sc.g_act = tanh_vec(g_pre);
    Vector logits = p.out_W * sc.g_act + p.out_bo.col(0);
    double m = logits.maxCoeff();
    double lse = m + std::log((logits.array() - m).exp().sum());
    sc.logp = logits.array() - lse;
    int target_id = i < steps - 1 ? pair.target[i] : kEosId;
    fc.loss -= sc.logp(target_id);
    s_prev = sc.gru.h;
    fc.steps.push_back(std::move(sc));
  }
  return fc;
}

void full_backward(const Seq2SeqParams& p, const EncodedPair& pair, const ForwardCache& fc,
                   Seq2SeqParams& grad) {
  const int H = p.dims.hidden;
  const int E = p.dims.embed;
  const int J = static_cast<int>(pair.source.size());
  const int steps = static_cast<int>(fc.steps.size());

  Matrix dann = Matrix::Zero(2 * H, J);
  Vector ds_carry = Vector::Zero(H);  // gradient into s_i from later steps

  for (int i = steps - 1; i >= 0; --i) {
    const StepCache& sc = fc.steps[i];
    const Vector& s_prev = i == 0 ? fc.s0 : fc.steps[i - 1].gru.h;
    int target_id = i < steps - 1 ? pair.target[i] : kEosId;

    // Readout and softmax cross-entropy.
    Vector dlogits = sc.logp.array().exp();
    dlogits(target_id) -= 1.0;
    grad.out_W += dlogits * sc.g_act.transpose();
    grad.out_bo.col(0) += dlogits;
    Vector dg = p.out_W.transpose() * dlogits;
    Vector dg_pre =
        dg.cwiseProduct(Vector::Ones(dg.size()) - sc.g_act.cwiseProduct(sc.g_act));
    grad.out_Us += dg_pre * sc.gru.h.transpose();
    grad.out_Vc += dg_pre * sc.attn.ctx.transpose();
    grad.out_Cy += dg_pre * sc.e_prev.transpose();
    grad.out_b.col(0) += dg_pre;

    Vector ds_i = ds_carry + p.out_Us.transpose() * dg_pre;
    Vector dctx = p.out_Vc.transpose() * dg_pre;
    Vector de_prev = p.out_Cy.transpose() * dg_pre;

    // Decoder cell.
    Vector du, ds_prev_gru;
    gru_backward(p.dec, sc.gru, ds_i, grad.dec, du, ds_prev_gru);
    de_prev += du.head(E);
    dctx += du.tail(2 * H);

    // Attention (queried with s_{i-1}).
    Vector ds_prev_attn = attn_backward(p, sc.attn, fc.enc.ann, s_prev, dctx, dann, grad);

    ds_carry = ds_prev_gru + ds_prev_attn;
    grad.tgt_embed.row(sc.prev_id) += de_prev.transpose();
  }

  // Decoder start-state projection.
  Vector ds0_pre = ds_carry.cwiseProduct(Vector::Ones(H) - fc.s0.cwiseProduct(fc.s0));
  grad.init_W += ds0_pre * fc.enc.bwd[0].h.transpose();
  grad.init_b.col(0) += ds0_pre;
  Vector dbwd_extra = p.init_W.transpose() * ds0_pre;

  // Forward encoder chain.
  Vector carry = Vector::Zero(H);
  for (int j = J - 1; j >= 0; --j) {
    Vector dh = dann.block(0, j, H, 1) + carry;
    Vector dx, dh_prev;
    gru_backward(p.enc_fwd, fc.enc.fwd[j], dh, grad.enc_fwd, dx, dh_prev);
    grad.src_embed.row(pair.source[j]) += dx.transpose();
    carry = dh_prev;
  }
  // Backward encoder chain (it reads right to left, so gradients flow left
  // to right).
  carry = Vector::Zero(H);
  for (int j = 0; j < J; ++j) {
    Vector dh = dann.block(H, j, H, 1) + carry;
    if (j == 0) dh += dbwd_extra;
    Vector dx, dh_prev;
    gru_backward(p.enc_bwd, fc.enc.bwd[j], dh, grad.enc_bwd, dx, dh_prev);
    grad.src_embed.row(pair.source[j]) += dx.transpose();
    carry = dh_prev;
  }
}

}  // namespace

Matrix encode(const Seq2SeqParams& params, const std::vector<int>& source) {
  return encoder_forward(params, source).ann;
}

AttentionResult attend(const Seq2SeqParams& params, const Vector& decoder_state,
                       const Matrix& annotations) {
  Matrix UaA = params.attn_U * annotations;
  AttnCache cache = attn_forward(params, decoder_state, annotations, UaA);
  return {cache.alpha, cache.ctx};
}

double pair_loss(const Seq2SeqParams& params, const EncodedPair& pair) {
  return full_forward(params, pair).loss;
}

double pair_loss_and_grad(const Seq2SeqParams& params, const EncodedPair& pair,
                          Seq2SeqParams& grads) {
  ForwardCache fc = full_forward(params, pair);
  full_backward(params, pair, fc, grads);
  return fc.loss;
}

namespace detail {

DecoderStep decoder_step(const Seq2SeqParams& p, const Vector& s_prev, int prev_id,
                         const Matrix& ann, const Matrix& UaA) {
  DecoderStep out;
  Vector e_prev = p.tgt_embed.row(prev_id).transpose();
  AttnCache attn = attn_forward(p, s_prev, ann, UaA);
  Vector u(p.dims.embed + 2 * p.dims.hidden);
  u << e_prev, attn.ctx;
  GruCache gru = gru_forward(p.dec, u, s_prev);
  Vector g_pre =
      p.out_Us * gru.h + p.out_Vc * attn.ctx + p.out_Cy * e_prev + p.out_b.col(0);
  Vector g_act = tanh_vec(g_pre);
  Vector logits = p.out_W * g_act + p.out_bo.col(0);
  double m = logits.maxCoeff();
  Vector exps = (logits.array() - m).exp();
  out.probs = exps / exps.sum();
  out.alpha = attn.alpha;
  out.ctx = attn.ctx;
  out.state = gru.h;
  return out;
}

Vector initial_state(const Seq2SeqParams& p, const Matrix& ann) {
  // The lower half of the first annotation column is the backward encoder's
  // final state.
  const int H = p.dims.hidden;
  Vector bwd1 = ann.block(H, 0, H, 1);
  return tanh_vec(p.init_W * bwd1 + p.init_b.col(0));
}

}  // namespace detail

}  // namespace premt
