#pragma once

#include <istream>
#include <string>
#include <utility>
#include <vector>

#include "ptforge/fst/wfst.hpp"

namespace ptforge::channel {

using fst::Label;

// Mismatched transcripts of one utterance, one string per annotator.
struct TranscriptBundle {
  std::string id;
  std::vector<std::string> transcripts;
};

// UTF-8 text: one line per annotator, blank line between utterances.
// Utterances are numbered utt0001, utt0002, ...
std::vector<TranscriptBundle> ReadBundles(std::istream& in);

// Letter ids of a transcript; whitespace is dropped. Throws DataError on
// characters missing from the table.
std::vector<Label> TranscriptLetters(const std::string& transcript, const fst::SymbolTable& letters);

// Option label kEpsilon is the skip marker.
struct ConfusionSlot {
  std::vector<std::pair<Label, double>> options;  // sorted by label
};

struct ConfusionNetwork {
  fst::SymbolTablePtr letters;
  std::vector<ConfusionSlot> slots;
  std::size_t longest_transcript = 0;
};

// Aligns every transcript against a growing slot sequence seeded by the
// first one (unit-cost edit distance; ties prefer substitution, then
// deletion), turns annotator counts into slot pmfs, then prunes the least
// likely options while the retained mass stays >= prune_mass.
ConfusionNetwork MergeTranscripts(const TranscriptBundle& bundle, fst::SymbolTablePtr letters,
                                  double prune_mass = 1.0);

// Sausage acceptor, one arc per option weighted -log p; skips become
// epsilon arcs.
fst::Wfst ConfnetToFst(const ConfusionNetwork& cn);

}  // namespace ptforge::channel
