#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "ptforge/fst/wfst.hpp"

namespace ptforge::seq2seq {

using fst::Label;
using Eigen::MatrixXd;
using Eigen::VectorXd;

inline constexpr int kMaxSequenceLength = 64;

// Gate blocks are stacked i, f, g, o.
struct LstmLayer {
  MatrixXd w;  // 4H x input
  MatrixXd u;  // 4H x H
  MatrixXd b;  // 4H x 1
};

// Letters are one-hot coded with index = letter id and index
// letters->Size() for </s>. The decoder reads one-hot previous phones
// (index 0 = <s>) concatenated with the context vector. Softmax outcome
// o - 1 is phone o, and the last one (id phones->Size()) is </s>.
struct Seq2SeqParams {
  fst::SymbolTablePtr letters;
  fst::SymbolTablePtr phones;
  int hidden = 0;
  std::vector<LstmLayer> encoder;
  std::vector<LstmLayer> decoder;
  MatrixXd proj_w;  // P x (H + P + H) over [h_top; onehot(y_prev); c]
  MatrixXd proj_b;  // P x 1

  int InputDim() const { return letters->Size() + 1; }
  int PhoneDim() const { return phones->Size(); }
  Label EndOfInput() const { return letters->Size(); }
  Label Eos() const { return phones->Size(); }

  std::vector<MatrixXd*> Tensors();
  std::vector<const MatrixXd*> Tensors() const;
  std::vector<std::string> TensorNames() const;
  std::size_t NumParameters() const;

  // Same shapes, all zeros.
  Seq2SeqParams ZerosLike() const;
  bool AllFinite() const;
};

struct Architecture {
  int hidden = 100;
  int layers = 2;
};

// Weights U(-range, range) from mt19937_64(seed); biases zero except the
// forget gate at 1.
Seq2SeqParams InitParams(fst::SymbolTablePtr letters, fst::SymbolTablePtr phones, const Architecture& arch,
                         uint64_t seed, double init_range = 0.1);

struct DecoderState {
  std::vector<VectorXd> h;
  std::vector<VectorXd> c;
  VectorXd context;
};

// Reads the letters reversed, then </s>; returns the top-layer hidden
// state after the last step.
VectorXd Encode(const Seq2SeqParams& p, const std::vector<Label>& letters);

// Decoder start state: each layer takes the final (h, c) of the matching
// encoder layer; the context is the top-layer h.
DecoderState EncodeState(const Seq2SeqParams& p, const std::vector<Label>& letters);

// One decoder step fed the previous phone (0 = <s>). Returns the new state
// and the pmf over outcomes.
std::pair<DecoderState, VectorXd> DecoderStep(const Seq2SeqParams& p, const DecoderState& s, Label y_prev);

struct Example {
  std::vector<Label> letters;
  std::vector<Label> phones;
};

// Teacher-forced negative log-likelihood summed over each target sequence
// (phones then </s>) and averaged over the batch. `grads`, when given, must
// have the shapes of `p` and receives the gradient of that mean.
double LossAndGradients(const Seq2SeqParams& p, const std::vector<Example>& batch, Seq2SeqParams* grads,
                        int threads = 1);

// Textual dump: header, symbol tables, then each tensor with its shape and
// values at 17 significant digits.
void WriteCheckpoint(const Seq2SeqParams& p, std::ostream& out);
Seq2SeqParams ReadCheckpoint(std::istream& in);

}  // namespace ptforge::seq2seq
