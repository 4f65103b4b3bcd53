// Scalar long-double forward pass used as the finite-difference oracle in
// gradient_check. Written independently of the Eigen graph: plain loops, no
// shared code, extended precision so the central differences stay well above
// the rounding floor even for coordinates with near-zero gradients.
#include <cmath>
#include <vector>

#include "premt/nmt.h"

namespace premt {

namespace {

using LD = long double;
using LVec = std::vector<LD>;

LVec matvec(const Matrix& m, const LVec& x, int rows, int cols) {
  LVec y(rows, 0.0L);
  for (int r = 0; r < rows; ++r) {
    LD acc = 0.0L;
    for (int c = 0; c < cols; ++c) acc += static_cast<LD>(m(r, c)) * x[c];
    y[r] = acc;
  }
  return y;
}

void add_bias(LVec& y, const Matrix& b) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += static_cast<LD>(b(i, 0));
}

LVec gru_cell(const GruParams& g, const LVec& x, const LVec& h, int in_dim, int hidden) {
  LVec z = matvec(g.Wz, x, hidden, in_dim);
  LVec zu = matvec(g.Uz, h, hidden, hidden);
  LVec r = matvec(g.Wr, x, hidden, in_dim);
  LVec ru = matvec(g.Ur, h, hidden, hidden);
  for (int i = 0; i < hidden; ++i) {
    z[i] = 1.0L / (1.0L + std::exp(-(z[i] + zu[i] + static_cast<LD>(g.bz(i, 0)))));
    r[i] = 1.0L / (1.0L + std::exp(-(r[i] + ru[i] + static_cast<LD>(g.br(i, 0)))));
  }
  LVec rh(hidden);
  for (int i = 0; i < hidden; ++i) rh[i] = r[i] * h[i];
  LVec c = matvec(g.Wh, x, hidden, in_dim);
  LVec cu = matvec(g.Uh, rh, hidden, hidden);
  LVec out(hidden);
  for (int i = 0; i < hidden; ++i) {
    LD cand = std::tanh(c[i] + cu[i] + static_cast<LD>(g.bh(i, 0)));
    out[i] = (1.0L - z[i]) * h[i] + z[i] * cand;
  }
  return out;
}

LVec embed_row(const Matrix& table, int id, int dim) {
  LVec x(dim);
  for (int i = 0; i < dim; ++i) x[i] = static_cast<LD>(table(id, i));
  return x;
}

}  // namespace

long double pair_loss_reference(const Seq2SeqParams& p, const EncodedPair& pair) {
  const int E = p.dims.embed;
  const int H = p.dims.hidden;
  const int A = p.dims.attn;
  const int R = p.dims.readout;
  const int Vt = p.dims.tgt_vocab;
  const int J = static_cast<int>(pair.source.size());

  // Encoder.
  std::vector<LVec> fwd(J), bwd(J);
  LVec h(H, 0.0L);
  for (int j = 0; j < J; ++j) {
    fwd[j] = gru_cell(p.enc_fwd, embed_row(p.src_embed, pair.source[j], E), h, E, H);
    h = fwd[j];
  }
  h.assign(H, 0.0L);
  for (int j = J - 1; j >= 0; --j) {
    bwd[j] = gru_cell(p.enc_bwd, embed_row(p.src_embed, pair.source[j], E), h, E, H);
    h = bwd[j];
  }
  std::vector<LVec> ann(J, LVec(2 * H));
  for (int j = 0; j < J; ++j) {
    for (int i = 0; i < H; ++i) {
      ann[j][i] = fwd[j][i];
      ann[j][H + i] = bwd[j][i];
    }
  }

  // Decoder start state.
  LVec s = matvec(p.init_W, bwd[0], H, H);
  for (int i = 0; i < H; ++i) s[i] = std::tanh(s[i] + static_cast<LD>(p.init_b(i, 0)));

  const int steps = static_cast<int>(pair.target.size()) + 1;
  LD loss = 0.0L;
  for (int t = 0; t < steps; ++t) {
    int prev_id = t == 0 ? kBosId : pair.target[t - 1];
    int gold = t < steps - 1 ? pair.target[t] : kEosId;
    LVec e_prev = embed_row(p.tgt_embed, prev_id, E);

    // Additive attention.
    LVec q = matvec(p.attn_W, s, A, H);
    add_bias(q, p.attn_b);
    LVec scores(J);
    for (int j = 0; j < J; ++j) {
      LVec u = matvec(p.attn_U, ann[j], A, 2 * H);
      LD acc = 0.0L;
      for (int i = 0; i < A; ++i) {
        acc += static_cast<LD>(p.attn_v(i, 0)) * std::tanh(q[i] + u[i]);
      }
      scores[j] = acc;
    }
    LD m = scores[0];
    for (int j = 1; j < J; ++j) m = std::max(m, scores[j]);
    LD denom = 0.0L;
    LVec alpha(J);
    for (int j = 0; j < J; ++j) {
      alpha[j] = std::exp(scores[j] - m);
      denom += alpha[j];
    }
    LVec ctx(2 * H, 0.0L);
    for (int j = 0; j < J; ++j) {
      LD a = alpha[j] / denom;
      for (int i = 0; i < 2 * H; ++i) ctx[i] += a * ann[j][i];
    }

    // Decoder cell.
    LVec cell_in(E + 2 * H);
    for (int i = 0; i < E; ++i) cell_in[i] = e_prev[i];
    for (int i = 0; i < 2 * H; ++i) cell_in[E + i] = ctx[i];
    s = gru_cell(p.dec, cell_in, s, E + 2 * H, H);

    // Readout and log-softmax.
    LVec g1 = matvec(p.out_Us, s, R, H);
    LVec g2 = matvec(p.out_Vc, ctx, R, 2 * H);
    LVec g3 = matvec(p.out_Cy, e_prev, R, E);
    LVec g(R);
    for (int i = 0; i < R; ++i) {
      g[i] = std::tanh(g1[i] + g2[i] + g3[i] + static_cast<LD>(p.out_b(i, 0)));
    }
    LVec logits = matvec(p.out_W, g, Vt, R);
    add_bias(logits, p.out_bo);
    LD lmax = logits[0];
    for (int v = 1; v < Vt; ++v) lmax = std::max(lmax, logits[v]);
    LD lse = 0.0L;
    for (int v = 0; v < Vt; ++v) lse += std::exp(logits[v] - lmax);
    loss -= logits[gold] - lmax - std::log(lse);
  }
  return loss;
}

}  // namespace premt
