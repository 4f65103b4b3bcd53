#include <cstring>
#include <fstream>
#include <sstream>

#include "premt/nmt.h"

namespace premt {

namespace {

constexpr double kInitRange = 0.08;

Matrix init_matrix(int rows, int cols, Rng& rng) {
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = rng.uniform(-kInitRange, kInitRange);
  }
  return m;
}

GruParams init_gru(int input_dim, int hidden, Rng& rng) {
  GruParams g;
  g.Wz = init_matrix(hidden, input_dim, rng);
  g.Uz = init_matrix(hidden, hidden, rng);
  g.Wr = init_matrix(hidden, input_dim, rng);
  g.Ur = init_matrix(hidden, hidden, rng);
  g.Wh = init_matrix(hidden, input_dim, rng);
  g.Uh = init_matrix(hidden, hidden, rng);
  g.bz = Matrix::Zero(hidden, 1);
  g.br = Matrix::Zero(hidden, 1);
  g.bh = Matrix::Zero(hidden, 1);
  return g;
}

}  // namespace

Seq2SeqParams Seq2SeqParams::init(const NmtDims& dims, Rng& rng) {
  if (dims.src_vocab < kNumReservedIds || dims.tgt_vocab < kNumReservedIds) {
    throw std::runtime_error("Seq2SeqParams::init: vocab sizes must cover reserved ids");
  }
  Seq2SeqParams p;
  p.dims = dims;
  p.src_embed = init_matrix(dims.src_vocab, dims.embed, rng);
  p.tgt_embed = init_matrix(dims.tgt_vocab, dims.embed, rng);
  p.enc_fwd = init_gru(dims.embed, dims.hidden, rng);
  p.enc_bwd = init_gru(dims.embed, dims.hidden, rng);
  p.dec = init_gru(dims.embed + 2 * dims.hidden, dims.hidden, rng);
  p.init_W = init_matrix(dims.hidden, dims.hidden, rng);
  p.init_b = Matrix::Zero(dims.hidden, 1);
  p.attn_W = init_matrix(dims.attn, dims.hidden, rng);
  p.attn_U = init_matrix(dims.attn, 2 * dims.hidden, rng);
  p.attn_b = Matrix::Zero(dims.attn, 1);
  p.attn_v = init_matrix(dims.attn, 1, rng);
  p.out_Us = init_matrix(dims.readout, dims.hidden, rng);
  p.out_Vc = init_matrix(dims.readout, 2 * dims.hidden, rng);
  p.out_Cy = init_matrix(dims.readout, dims.embed, rng);
  p.out_b = Matrix::Zero(dims.readout, 1);
  p.out_W = init_matrix(dims.tgt_vocab, dims.readout, rng);
  p.out_bo = Matrix::Zero(dims.tgt_vocab, 1);
  return p;
}

std::vector<TensorRef> tensor_refs(Seq2SeqParams& p) {
  std::vector<TensorRef> refs;
  refs.push_back({"src_embed", &p.src_embed});
  refs.push_back({"tgt_embed", &p.tgt_embed});
  auto add_gru = [&refs](const std::string& prefix, GruParams& g) {
    refs.push_back({prefix + ".Wz", &g.Wz});
    refs.push_back({prefix + ".Uz", &g.Uz});
    refs.push_back({prefix + ".bz", &g.bz});
    refs.push_back({prefix + ".Wr", &g.Wr});
    refs.push_back({prefix + ".Ur", &g.Ur});
    refs.push_back({prefix + ".br", &g.br});
    refs.push_back({prefix + ".Wh", &g.Wh});
    refs.push_back({prefix + ".Uh", &g.Uh});
    refs.push_back({prefix + ".bh", &g.bh});
  };
  add_gru("enc_fwd", p.enc_fwd);
  add_gru("enc_bwd", p.enc_bwd);
  add_gru("dec", p.dec);
  refs.push_back({"init.W", &p.init_W});
  refs.push_back({"init.b", &p.init_b});
  refs.push_back({"attn.W", &p.attn_W});
  refs.push_back({"attn.U", &p.attn_U});
  refs.push_back({"attn.b", &p.attn_b});
  refs.push_back({"attn.v", &p.attn_v});
  refs.push_back({"out.Us", &p.out_Us});
  refs.push_back({"out.Vc", &p.out_Vc});
  refs.push_back({"out.Cy", &p.out_Cy});
  refs.push_back({"out.b", &p.out_b});
  refs.push_back({"out.W", &p.out_W});
  refs.push_back({"out.bo", &p.out_bo});
  return refs;
}

AdamState AdamState::zeros(Seq2SeqParams& params) {
  AdamState state;
  for (const TensorRef& ref : tensor_refs(params)) {
    state.m.push_back(Matrix::Zero(ref.tensor->rows(), ref.tensor->cols()));
    state.v.push_back(Matrix::Zero(ref.tensor->rows(), ref.tensor->cols()));
  }
  return state;
}

namespace {

void write_tensor(std::ostream& out, const std::string& name, const Matrix& m) {
  out << "tensor " << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
  // Row-major stream of little-endian IEEE-754 doubles.
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      double v = m(r, c);
      out.write(reinterpret_cast<const char*>(&v), sizeof(double));
    }
  }
  out << '\n';
}

Matrix read_tensor(std::istream& in, const std::string& expected_name) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("checkpoint: truncated file");
  std::istringstream header(line);
  std::string tag, name;
  Eigen::Index rows, cols;
  header >> tag >> name >> rows >> cols;
  if (tag != "tensor" || name != expected_name) {
    throw std::runtime_error("checkpoint: expected tensor " + expected_name + ", found: " +
                             line);
  }
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      double v;
      in.read(reinterpret_cast<char*>(&v), sizeof(double));
      if (!in) throw std::runtime_error("checkpoint: truncated tensor " + expected_name);
      m(r, c) = v;
    }
  }
  in.get();  // trailing newline
  return m;
}

}  // namespace

void Checkpoint::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  const NmtDims& d = params.dims;
  out << "#premt-ckpt v1\n";
  out << "embed=" << d.embed << " hidden=" << d.hidden << " attn=" << d.attn
      << " readout=" << d.readout << " src_vocab=" << d.src_vocab
      << " tgt_vocab=" << d.tgt_vocab << '\n';
  out << "iteration=" << iteration << " adam_step=" << optimizer.step << " dev_score="
      << (dev_score ? fmt_double_exact(*dev_score) : std::string("none")) << '\n';
  auto& mutable_params = const_cast<Seq2SeqParams&>(params);
  std::vector<TensorRef> refs = tensor_refs(mutable_params);
  for (const TensorRef& ref : refs) write_tensor(out, ref.name, *ref.tensor);
  for (std::size_t i = 0; i < refs.size(); ++i) {
    write_tensor(out, "adam.m." + refs[i].name, optimizer.m[i]);
  }
  for (std::size_t i = 0; i < refs.size(); ++i) {
    write_tensor(out, "adam.v." + refs[i].name, optimizer.v[i]);
  }
  out << "end\n";
  if (!out) throw std::runtime_error("checkpoint write failed: " + path);
}

Checkpoint Checkpoint::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  std::string line;
  if (!std::getline(in, line) || line != "#premt-ckpt v1") {
    throw std::runtime_error("checkpoint: missing \"#premt-ckpt v1\" header: " + path);
  }
  Checkpoint ckpt;
  NmtDims dims;
  {
    if (!std::getline(in, line)) throw std::runtime_error("checkpoint: truncated header");
    std::istringstream hs(line);
    std::string field;
    while (hs >> field) {
      auto eq = field.find('=');
      if (eq == std::string::npos) continue;
      std::string key = field.substr(0, eq);
      std::string value = field.substr(eq + 1);
      if (key == "embed") dims.embed = std::stoi(value);
      else if (key == "hidden") dims.hidden = std::stoi(value);
      else if (key == "attn") dims.attn = std::stoi(value);
      else if (key == "readout") dims.readout = std::stoi(value);
      else if (key == "src_vocab") dims.src_vocab = std::stoi(value);
      else if (key == "tgt_vocab") dims.tgt_vocab = std::stoi(value);
    }
  }
  {
    if (!std::getline(in, line)) throw std::runtime_error("checkpoint: truncated header");
    std::istringstream hs(line);
    std::string field;
    while (hs >> field) {
      auto eq = field.find('=');
      if (eq == std::string::npos) continue;
      std::string key = field.substr(0, eq);
      std::string value = field.substr(eq + 1);
      if (key == "iteration") ckpt.iteration = std::stoll(value);
      else if (key == "adam_step") ckpt.optimizer.step = std::stoll(value);
      else if (key == "dev_score" && value != "none") {
        ckpt.dev_score = parse_double_exact(value);
      }
    }
  }
  Rng rng(1);
  ckpt.params = Seq2SeqParams::init(dims, rng);  // shapes; contents overwritten
  std::vector<TensorRef> refs = tensor_refs(ckpt.params);
  for (const TensorRef& ref : refs) *ref.tensor = read_tensor(in, ref.name);
  ckpt.optimizer.m.clear();
  ckpt.optimizer.v.clear();
  for (const TensorRef& ref : refs) {
    ckpt.optimizer.m.push_back(read_tensor(in, "adam.m." + ref.name));
  }
  for (const TensorRef& ref : refs) {
    ckpt.optimizer.v.push_back(read_tensor(in, "adam.v." + ref.name));
  }
  return ckpt;
}

}  // namespace premt
