#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <utility>
#include <vector>

#include "ptforge/fst/wfst.hpp"

namespace ptforge::channel {

using fst::Label;
using Chunk = std::vector<Label>;

inline constexpr int kMaxChunk = 4;

// Memoryless phone -> letter-chunk emission model. Chunks hold 0..4
// letters; the empty chunk is a deletion.
class ChannelModel {
 public:
  using Pmf = std::map<Chunk, double>;

  ChannelModel(fst::SymbolTablePtr phones, fst::SymbolTablePtr letters, std::map<Label, Pmf> emissions,
               double tolerance = 1e-9);

  const fst::SymbolTablePtr& Phones() const { return phones_; }
  const fst::SymbolTablePtr& Letters() const { return letters_; }
  const std::map<Label, Pmf>& Emissions() const { return emissions_; }
  double Prob(Label phone, const Chunk& chunk) const;

 private:
  fst::SymbolTablePtr phones_;
  fst::SymbolTablePtr letters_;
  std::map<Label, Pmf> emissions_;
};

struct AlignedPair {
  std::vector<Label> phones;
  std::vector<Label> letters;
};

struct EmOptions {
  int iterations = 25;
  uint64_t seed = 0;
  int threads = 1;
  // Longest chunk a phone may emit during training, 1..kMaxChunk.
  int max_chunk = kMaxChunk;
};

struct EmResult {
  ChannelModel model;
  // Training log-likelihood seen by the E-step of each iteration.
  std::vector<double> log_likelihood;
};

// Monotone alignment EM: forward-backward over the (phone, letter) trellis,
// expected-count M-step. Pairs with more than max_chunk letters per phone are
// rejected with a DataError listing them.
EmResult TrainChannelEm(const std::vector<AlignedPair>& pairs, fst::SymbolTablePtr phones,
                        fst::SymbolTablePtr letters, const EmOptions& options = {});

// Total probability of `letters` given `phones` under the model.
double SequenceLikelihood(const ChannelModel& m, const std::vector<Label>& phones,
                          const std::vector<Label>& letters);

// One looping state; each phone->chunk emission is a path reading the
// phone on its first arc and epsilons after, weight -log p.
fst::Wfst ChannelToFst(const ChannelModel& m);

// Drops emissions below min_prob and renormalizes each phone's pmf; the
// most likely chunk of every phone survives. min_prob must lie in [0, 1).
ChannelModel PruneChannel(const ChannelModel& m, double min_prob);

// "phone<TAB>chunk<TAB>prob" with the chunk written as concatenated letters.
void WriteChannel(const ChannelModel& m, std::ostream& out);
ChannelModel ReadChannel(std::istream& in, fst::SymbolTablePtr phones, fst::SymbolTablePtr letters);

}  // namespace ptforge::channel
