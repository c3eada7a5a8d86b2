#pragma once

#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "ptforge/fst/wfst.hpp"

namespace ptforge::lm {

using fst::Label;

enum class Smoothing { kWittenBell, kAddK };

struct SmoothingSpec {
  Smoothing method = Smoothing::kWittenBell;
  double k = 0.0;  // add-k only
};

std::string SmoothingName(const SmoothingSpec& s);
SmoothingSpec ParseSmoothing(const std::string& text);  // "witten-bell" or "add-k:<k>"

// Bigram model over a closed vocabulary: every non-epsilon symbol of the
// table, plus sentence markers. Context id 0 stands for <s>; the outcome
// id table->Size() stands for </s>.
class BigramModel {
 public:
  static constexpr Label kBos = 0;

  BigramModel() = default;

  // Takes explicit probability tables: unigram[o] and bigram[c][o] with
  // contexts c in [0, V) and outcomes o in [1, V] (index o - 1), where V is
  // the table size. Zero entries are allowed; rows must sum to one.
  static BigramModel FromProbabilities(fst::SymbolTablePtr symbols, std::vector<double> unigram,
                                       std::vector<std::vector<double>> bigram, SmoothingSpec smoothing,
                                       double tolerance = 1e-9);
  // Every outcome equally likely in every context.
  static BigramModel Uniform(fst::SymbolTablePtr symbols);

  Label Eos() const { return symbols_->Size(); }
  Label NumContexts() const { return symbols_->Size(); }
  Label NumOutcomes() const { return symbols_->Size(); }

  double Prob(Label context, Label next) const { return bigram_[Index(context, next)]; }
  double LogProb(Label context, Label next) const;
  double UnigramProb(Label next) const { return unigram_[next - 1]; }

  const fst::SymbolTablePtr& Symbols() const { return symbols_; }
  const SmoothingSpec& Smoothing() const { return smoothing_; }

  // Training statistics (empty for models built from probabilities).
  double BigramCount(Label context, Label next) const;
  double ContextCount(Label context) const;
  double UnigramCount(Label next) const;

 private:
  friend BigramModel TrainBigram(const std::vector<std::vector<Label>>&, fst::SymbolTablePtr, SmoothingSpec);
  std::size_t Index(Label context, Label next) const {
    return static_cast<std::size_t>(context) * NumOutcomes() + static_cast<std::size_t>(next - 1);
  }
  void CheckNormalized(double tolerance) const;

  fst::SymbolTablePtr symbols_;
  SmoothingSpec smoothing_;
  std::vector<double> unigram_;
  std::vector<double> bigram_;
  std::vector<double> unigram_counts_;
  std::vector<double> bigram_counts_;
};

// Accumulates counts with sentence markers and applies the smoother.
// Sequences must be nonempty and epsilon-free.
BigramModel TrainBigram(const std::vector<std::vector<Label>>& corpus, fst::SymbolTablePtr symbols,
                        SmoothingSpec smoothing = {});
// String corpus; throws DataError listing every out-of-vocabulary symbol.
BigramModel TrainBigram(const std::vector<std::vector<std::string>>& corpus, fst::SymbolTablePtr symbols,
                        SmoothingSpec smoothing = {});

// Natural-log probability including <s> and </s> transitions.
double ScoreSequence(const BigramModel& m, std::span<const Label> seq);
double ScoreSequence(const BigramModel& m, const std::vector<std::string>& seq);

// Deterministic acceptor: state 0 is <s>, state y is context y. Arc x->y
// carries -log p(y|x); final weights carry -log p(</s>|x).
fst::Wfst BigramToFsa(const BigramModel& m);

// Text serialization; probabilities at 9 significant digits.
void WriteModel(const BigramModel& m, std::ostream& out);
BigramModel ReadModel(std::istream& in);

// One sequence per line, space separated.
std::vector<std::vector<std::string>> ReadCorpus(std::istream& in);

}  // namespace ptforge::lm
