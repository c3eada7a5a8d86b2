#pragma once

#include <optional>

#include "ptforge/channel/channel_model.hpp"
#include "ptforge/channel/pt_lattice.hpp"
#include "ptforge/channel/transcripts.hpp"
#include "ptforge/fst/ops.hpp"
#include "ptforge/lm/bigram.hpp"

namespace ptforge::channel {

struct DecodeOptions {
  // Defaults to twice the longest transcript.
  std::optional<int> max_phones;
};

// Acceptor over phone strings of length <= max_phones weighted by
// Pr(letters|phones) Pr(phones) Pr(letters|T) / Pr(letters), the division
// applied only when letter_lm is given. Throws EmptyLatticeError when no
// phone string can explain the confusion network.
PtLattice DecodePt(const ConfusionNetwork& cn, const ChannelModel& channel, const lm::BigramModel* letter_lm,
                   const lm::BigramModel& phone_lm, const DecodeOptions& options = {});

// Acceptor of every phone string with at most `max_len` phones.
fst::Wfst LengthBoundAcceptor(const fst::SymbolTablePtr& phones, int max_len);

// Best phone string. Tropical keeps the single best path (max over letter
// strings and alignments); log picks the string with the largest summed
// path mass.
fst::ScoredSequence BestPathPt(const PtLattice& pt, fst::Semiring semiring = fst::Semiring::kTropical);

}  // namespace ptforge::channel
