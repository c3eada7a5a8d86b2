#include "ptforge/seq2seq/model.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <thread>

#include "ptforge/error.hpp"
#include "ptforge/util/text.hpp"

namespace ptforge::seq2seq {

std::vector<MatrixXd*> Seq2SeqParams::Tensors() {
  std::vector<MatrixXd*> out;
  for (auto* stack : {&encoder, &decoder})
    for (auto& l : *stack) out.insert(out.end(), {&l.w, &l.u, &l.b});
  out.insert(out.end(), {&proj_w, &proj_b});
  return out;
}

std::vector<const MatrixXd*> Seq2SeqParams::Tensors() const {
  std::vector<const MatrixXd*> out;
  for (auto* t : const_cast<Seq2SeqParams*>(this)->Tensors()) out.push_back(t);
  return out;
}

std::vector<std::string> Seq2SeqParams::TensorNames() const {
  std::vector<std::string> out;
  for (const auto& [name, stack] : {std::pair{"encoder", &encoder}, std::pair{"decoder", &decoder}})
    for (std::size_t l = 0; l < stack->size(); ++l)
      for (const char* t : {"w", "u", "b"}) out.push_back(std::string(name) + std::to_string(l) + "." + t);
  out.insert(out.end(), {"proj.w", "proj.b"});
  return out;
}

std::size_t Seq2SeqParams::NumParameters() const {
  std::size_t n = 0;
  for (const auto* t : Tensors()) n += static_cast<std::size_t>(t->size());
  return n;
}

Seq2SeqParams Seq2SeqParams::ZerosLike() const {
  Seq2SeqParams z = *this;
  for (auto* t : z.Tensors()) t->setZero();
  return z;
}

bool Seq2SeqParams::AllFinite() const {
  for (const auto* t : Tensors())
    if (!t->allFinite()) return false;
  return true;
}

Seq2SeqParams InitParams(fst::SymbolTablePtr letters, fst::SymbolTablePtr phones, const Architecture& arch,
                         uint64_t seed, double init_range) {
  if (!letters || !phones || letters->Size() < 2 || phones->Size() < 2)
    throw ContractError("InitParams: letter and phone tables need at least one symbol");
  if (arch.hidden < 1 || arch.layers < 1) throw ContractError("InitParams: bad architecture");
  Seq2SeqParams p;
  p.letters = std::move(letters);
  p.phones = std::move(phones);
  const int h = arch.hidden, nin = p.InputDim(), np = p.PhoneDim();
  p.hidden = h;
  auto layer = [h](int input) { return LstmLayer{MatrixXd(4 * h, input), MatrixXd(4 * h, h), MatrixXd(4 * h, 1)}; };
  for (int l = 0; l < arch.layers; ++l) p.encoder.push_back(layer(l == 0 ? nin : h));
  for (int l = 0; l < arch.layers; ++l) p.decoder.push_back(layer(l == 0 ? np + h : h));
  p.proj_w = MatrixXd(np, 2 * h + np);
  p.proj_b = MatrixXd(np, 1);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-init_range, init_range);
  for (auto* stack : {&p.encoder, &p.decoder}) {
    for (auto& l : *stack) {
      for (MatrixXd* m : {&l.w, &l.u})
        for (Eigen::Index j = 0; j < m->cols(); ++j)
          for (Eigen::Index i = 0; i < m->rows(); ++i) (*m)(i, j) = u(rng);
      l.b.setZero();
      l.b.block(h, 0, h, 1).setOnes();
    }
  }
  for (Eigen::Index j = 0; j < p.proj_w.cols(); ++j)
    for (Eigen::Index i = 0; i < p.proj_w.rows(); ++i) p.proj_w(i, j) = u(rng);
  p.proj_b.setZero();
  return p;
}

namespace {

VectorXd Sigmoid(const VectorXd& x) { return (1.0 + (-x.array()).exp()).inverse().matrix(); }

struct Step {
  VectorXd x, h_prev, c_prev, i, f, g, o, c, tc, h;
};

// Runs one layer over a whole sequence from state (h0, c0).
std::vector<Step> LayerForward(const LstmLayer& l, const std::vector<VectorXd>& xs, const VectorXd& h0,
                               const VectorXd& c0) {
  const auto hidden = h0.size();
  std::vector<Step> steps(xs.size());
  VectorXd h = h0, c = c0;
  for (std::size_t t = 0; t < xs.size(); ++t) {
    Step& s = steps[t];
    s.x = xs[t];
    s.h_prev = h;
    s.c_prev = c;
    const VectorXd z = l.w * s.x + l.u * h + l.b.col(0);
    s.i = Sigmoid(z.segment(0, hidden));
    s.f = Sigmoid(z.segment(hidden, hidden));
    s.g = z.segment(2 * hidden, hidden).array().tanh();
    s.o = Sigmoid(z.segment(3 * hidden, hidden));
    s.c = s.f.cwiseProduct(s.c_prev) + s.i.cwiseProduct(s.g);
    s.tc = s.c.array().tanh();
    s.h = s.o.cwiseProduct(s.tc);
    h = s.h;
    c = s.c;
  }
  return steps;
}

struct LayerGrads {
  std::vector<VectorXd> dx;
  VectorXd dh0, dc0;  // with respect to the initial state
};

// Backpropagates per-step hidden gradients, plus a cell gradient arriving
// after the last step, through one layer.
LayerGrads LayerBackward(const LstmLayer& l, const std::vector<Step>& steps, const std::vector<VectorXd>& dh_in,
                         const VectorXd& dc_last, LstmLayer& grad) {
  const auto hidden = dc_last.size();
  std::vector<VectorXd> dx(steps.size());
  VectorXd dh_next = VectorXd::Zero(hidden), dc_next = dc_last;
  VectorXd dz(4 * hidden);
  for (std::size_t k = steps.size(); k-- > 0;) {
    const Step& s = steps[k];
    const VectorXd dh = dh_in[k] + dh_next;
    const VectorXd dc = dh.cwiseProduct(s.o).cwiseProduct((1.0 - s.tc.array().square()).matrix()) + dc_next;
    const auto one = VectorXd::Ones(hidden).array();
    dz.segment(0, hidden) = (dc.array() * s.g.array() * s.i.array() * (one - s.i.array())).matrix();
    dz.segment(hidden, hidden) = (dc.array() * s.c_prev.array() * s.f.array() * (one - s.f.array())).matrix();
    dz.segment(2 * hidden, hidden) = (dc.array() * s.i.array() * (one - s.g.array().square())).matrix();
    dz.segment(3 * hidden, hidden) = (dh.array() * s.tc.array() * s.o.array() * (one - s.o.array())).matrix();
    grad.w.noalias() += dz * s.x.transpose();
    grad.u.noalias() += dz * s.h_prev.transpose();
    grad.b.col(0) += dz;
    dx[k] = l.w.transpose() * dz;
    dh_next = l.u.transpose() * dz;
    dc_next = dc.cwiseProduct(s.f);
  }
  return {std::move(dx), std::move(dh_next), std::move(dc_next)};
}

void CheckExample(const Seq2SeqParams& p, const Example& ex) {
  if (ex.letters.empty()) throw DataError("seq2seq: empty letter sequence");
  if (ex.letters.size() > kMaxSequenceLength || ex.phones.size() > kMaxSequenceLength)
    throw DataError("seq2seq: sequence longer than " + std::to_string(kMaxSequenceLength) + " symbols");
  for (Label l : ex.letters)
    if (l <= 0 || l >= p.letters->Size()) throw DataError("seq2seq: letter id out of range");
  for (Label l : ex.phones)
    if (l <= 0 || l >= p.phones->Size()) throw DataError("seq2seq: phone id out of range");
}

std::vector<VectorXd> EncoderInputs(const Seq2SeqParams& p, const std::vector<Label>& letters) {
  std::vector<VectorXd> xs;
  for (auto it = letters.rbegin(); it != letters.rend(); ++it) {
    xs.push_back(VectorXd::Zero(p.InputDim()));
    xs.back()(*it) = 1.0;
  }
  xs.push_back(VectorXd::Zero(p.InputDim()));
  xs.back()(p.EndOfInput()) = 1.0;
  return xs;
}

VectorXd DecoderInput(const Seq2SeqParams& p, Label y_prev, const VectorXd& context) {
  VectorXd x = VectorXd::Zero(p.PhoneDim() + p.hidden);
  x(y_prev) = 1.0;
  x.tail(p.hidden) = context;
  return x;
}

VectorXd ProjectionInput(const Seq2SeqParams& p, const VectorXd& h_top, Label y_prev, const VectorXd& context) {
  VectorXd z = VectorXd::Zero(2 * p.hidden + p.PhoneDim());
  z.head(p.hidden) = h_top;
  z(p.hidden + y_prev) = 1.0;
  z.tail(p.hidden) = context;
  return z;
}

VectorXd Softmax(const VectorXd& logits) {
  const VectorXd e = (logits.array() - logits.maxCoeff()).exp();
  return e / e.sum();
}

// Negative log-likelihood of one example; accumulates scale * gradient.
// Decoder layer l starts from the final state of encoder layer l.
double ExampleLoss(const Seq2SeqParams& p, const Example& ex, Seq2SeqParams* grads, double scale) {
  const int h = p.hidden;
  const std::size_t layers = p.encoder.size();
  const VectorXd zero = VectorXd::Zero(h);

  std::vector<std::vector<Step>> enc(layers);
  std::vector<VectorXd> xs = EncoderInputs(p, ex.letters);
  for (std::size_t l = 0; l < layers; ++l) {
    enc[l] = LayerForward(p.encoder[l], xs, zero, zero);
    xs.clear();
    for (const Step& s : enc[l]) xs.push_back(s.h);
  }
  const VectorXd context = enc.back().back().h;

  std::vector<Label> prev{0}, target;
  for (Label y : ex.phones) prev.push_back(y), target.push_back(y);
  target.push_back(p.Eos());
  const std::size_t steps = target.size();

  std::vector<std::vector<Step>> dec(layers);
  xs.clear();
  for (Label y : prev) xs.push_back(DecoderInput(p, y, context));
  for (std::size_t l = 0; l < layers; ++l) {
    dec[l] = LayerForward(p.decoder[l], xs, enc[l].back().h, enc[l].back().c);
    xs.clear();
    for (const Step& s : dec[l]) xs.push_back(s.h);
  }

  double nll = 0;
  std::vector<VectorXd> proj_in(steps), probs(steps);
  for (std::size_t t = 0; t < steps; ++t) {
    proj_in[t] = ProjectionInput(p, dec.back()[t].h, prev[t], context);
    const VectorXd logits = p.proj_w * proj_in[t] + p.proj_b.col(0);
    const double m = logits.maxCoeff();
    const double lse = m + std::log((logits.array() - m).exp().sum());
    nll -= logits(target[t] - 1) - lse;
    probs[t] = (logits.array() - lse).exp();
  }
  if (!grads) return nll;

  VectorXd dcontext = VectorXd::Zero(h);
  std::vector<VectorXd> dh(steps);
  for (std::size_t t = 0; t < steps; ++t) {
    VectorXd dlogits = probs[t] * scale;
    dlogits(target[t] - 1) -= scale;
    grads->proj_w.noalias() += dlogits * proj_in[t].transpose();
    grads->proj_b.col(0) += dlogits;
    const VectorXd dz = p.proj_w.transpose() * dlogits;
    dh[t] = dz.head(h);
    dcontext += dz.tail(h);
  }
  std::vector<VectorXd> dh0(layers), dc0(layers);
  for (std::size_t l = layers; l-- > 0;) {
    LayerGrads g = LayerBackward(p.decoder[l], dec[l], dh, zero, grads->decoder[l]);
    dh = std::move(g.dx);
    dh0[l] = std::move(g.dh0);
    dc0[l] = std::move(g.dc0);
  }
  for (const VectorXd& dx : dh) dcontext += dx.tail(h);

  const std::size_t enc_steps = enc.front().size();
  std::vector<VectorXd> from_above(enc_steps, zero);
  for (std::size_t l = layers; l-- > 0;) {
    from_above.back() += dh0[l];
    if (l + 1 == layers) from_above.back() += dcontext;
    LayerGrads g = LayerBackward(p.encoder[l], enc[l], from_above, dc0[l], grads->encoder[l]);
    from_above = std::move(g.dx);
  }
  return nll;
}

constexpr std::size_t kChunk = 16;

void AddInto(Seq2SeqParams& acc, const Seq2SeqParams& g) {
  auto a = acc.Tensors();
  auto b = g.Tensors();
  for (std::size_t k = 0; k < a.size(); ++k) *a[k] += *b[k];
}

}  // namespace

DecoderState EncodeState(const Seq2SeqParams& p, const std::vector<Label>& letters) {
  CheckExample(p, {letters, {}});
  const VectorXd zero = VectorXd::Zero(p.hidden);
  DecoderState state;
  std::vector<VectorXd> xs = EncoderInputs(p, letters);
  for (const auto& layer : p.encoder) {
    const auto steps = LayerForward(layer, xs, zero, zero);
    xs.clear();
    for (const Step& s : steps) xs.push_back(s.h);
    state.h.push_back(steps.back().h);
    state.c.push_back(steps.back().c);
  }
  state.context = state.h.back();
  return state;
}

VectorXd Encode(const Seq2SeqParams& p, const std::vector<Label>& letters) { return EncodeState(p, letters).context; }

std::pair<DecoderState, VectorXd> DecoderStep(const Seq2SeqParams& p, const DecoderState& s, Label y_prev) {
  if (y_prev < 0 || y_prev >= p.PhoneDim()) throw ContractError("DecoderStep: previous phone out of range");
  const int h = p.hidden;
  DecoderState next = s;
  VectorXd x = DecoderInput(p, y_prev, s.context);
  for (std::size_t l = 0; l < p.decoder.size(); ++l) {
    const LstmLayer& L = p.decoder[l];
    const VectorXd z = L.w * x + L.u * s.h[l] + L.b.col(0);
    const VectorXd i = Sigmoid(z.segment(0, h)), f = Sigmoid(z.segment(h, h)), o = Sigmoid(z.segment(3 * h, h));
    const VectorXd g = z.segment(2 * h, h).array().tanh();
    next.c[l] = f.cwiseProduct(s.c[l]) + i.cwiseProduct(g);
    next.h[l] = o.cwiseProduct(VectorXd(next.c[l].array().tanh()));
    x = next.h[l];
  }
  const VectorXd logits = p.proj_w * ProjectionInput(p, next.h.back(), y_prev, s.context) + p.proj_b.col(0);
  return {std::move(next), Softmax(logits)};
}

double LossAndGradients(const Seq2SeqParams& p, const std::vector<Example>& batch, Seq2SeqParams* grads,
                        int threads) {
  if (batch.empty()) throw ContractError("LossAndGradients: empty batch");
  for (const Example& ex : batch) CheckExample(p, ex);
  const double scale = 1.0 / static_cast<double>(batch.size());
  const std::size_t chunks = (batch.size() + kChunk - 1) / kChunk;
  std::vector<double> chunk_loss(chunks, 0.0);
  std::vector<Seq2SeqParams> chunk_grads(grads ? chunks : 0);

  auto run = [&](std::size_t c) {
    Seq2SeqParams* g = nullptr;
    if (grads) {
      chunk_grads[c] = p.ZerosLike();
      g = &chunk_grads[c];
    }
    for (std::size_t k = c * kChunk; k < std::min(batch.size(), (c + 1) * kChunk); ++k)
      chunk_loss[c] += ExampleLoss(p, batch[k], g, scale);
  };
  const int workers = std::max(1, std::min<int>(threads, static_cast<int>(chunks)));
  if (workers == 1) {
    for (std::size_t c = 0; c < chunks; ++c) run(c);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t c; (c = next++) < chunks;) run(c);
      });
    for (auto& t : pool) t.join();
  }
  // Chunks are reduced in order so the result does not depend on threads.
  double loss = 0;
  for (std::size_t c = 0; c < chunks; ++c) {
    loss += chunk_loss[c];
    if (grads) {
      if (c == 0) *grads = std::move(chunk_grads[0]);
      else AddInto(*grads, chunk_grads[c]);
    }
  }
  return loss * scale;
}

void WriteCheckpoint(const Seq2SeqParams& p, std::ostream& out) {
  out << "ptforge-seq2seq 1\n";
  out << "hidden " << p.hidden << "\nlayers " << p.encoder.size() << "\n";
  for (const auto& [name, table] : {std::pair{"letters", &p.letters}, std::pair{"phones", &p.phones}}) {
    const auto labels = (*table)->Labels();
    out << name << ' ' << labels.size() << '\n';
    for (Label l : labels) out << (*table)->Symbol(l) << '\n';
  }
  const auto names = p.TensorNames();
  const auto tensors = p.Tensors();
  for (std::size_t k = 0; k < tensors.size(); ++k) {
    const MatrixXd& m = *tensors[k];
    out << "tensor " << names[k] << ' ' << m.rows() << ' ' << m.cols() << '\n';
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) out << (j ? " " : "") << util::FormatDouble17(m(i, j));
      out << '\n';
    }
  }
}

Seq2SeqParams ReadCheckpoint(std::istream& in) {
  std::string line;
  int line_no = 0;
  auto next_line = [&]() -> std::string& {
    if (!std::getline(in, line)) throw ParseError("checkpoint: unexpected end of file", line_no + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
  };
  auto expect = [&](const std::string& key) {
    const auto f = util::SplitWhitespace(next_line());
    if (f.size() != 2 || f[0] != key) throw ParseError("checkpoint: expected '" + key + " <n>'", line_no);
    try {
      return std::stoi(f[1]);
    } catch (const std::exception&) {
      throw ParseError("checkpoint: bad count", line_no);
    }
  };
  while (util::IsCommentLine(next_line())) {
  }
  if (line != "ptforge-seq2seq 1") throw ParseError("checkpoint: unknown header", line_no);
  const int hidden = expect("hidden");
  const int layers = expect("layers");
  fst::SymbolTable tables[2];
  for (int t = 0; t < 2; ++t) {
    const int n = expect(t == 0 ? "letters" : "phones");
    for (int k = 0; k < n; ++k) tables[t].Add(next_line());
  }
  Seq2SeqParams p = InitParams(fst::MakeTable(tables[0]), fst::MakeTable(tables[1]), {hidden, layers}, 0);
  const auto names = p.TensorNames();
  const auto tensors = p.Tensors();
  for (std::size_t k = 0; k < tensors.size(); ++k) {
    MatrixXd& m = *tensors[k];
    const auto head = util::SplitWhitespace(next_line());
    if (head.size() != 4 || head[0] != "tensor" || head[1] != names[k] || head[2] != std::to_string(m.rows()) ||
        head[3] != std::to_string(m.cols()))
      throw ParseError("checkpoint: expected tensor " + names[k] + " " + std::to_string(m.rows()) + " " +
                           std::to_string(m.cols()),
                       line_no);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      const auto vals = util::SplitWhitespace(next_line());
      if (vals.size() != static_cast<std::size_t>(m.cols())) throw ParseError("checkpoint: wrong row width", line_no);
      for (Eigen::Index j = 0; j < m.cols(); ++j) {
        try {
          m(i, j) = util::ParseDouble(vals[j]);
        } catch (const Error&) {
          throw ParseError("checkpoint: bad number '" + vals[j] + "'", line_no);
        }
      }
    }
  }
  if (!p.AllFinite()) throw DataError("checkpoint: non-finite parameter");
  return p;
}

}  // namespace ptforge::seq2seq
