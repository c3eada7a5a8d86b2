#pragma once

#include <string>
#include <vector>

#include "ptforge/channel/pt_lattice.hpp"
#include "ptforge/constraints/lexicon.hpp"
#include "ptforge/lm/bigram.hpp"

namespace ptforge::constraints {

enum class Variant { kInventory, kG2P, kG2PDict, kWlm };
Variant ParseVariant(const std::string& name);
const char* VariantName(Variant v);

// Keeps exactly the paths whose phones all lie in `inventory`; surviving
// weights are untouched. Throws EmptyLatticeError naming the offending
// phones when nothing survives.
channel::PtLattice ConstrainPhonemeInventory(const channel::PtLattice& pt, const PhoneInventory& inventory);

// Phone strings spelled by word sequences of `lm` through `lexicon`
// (graphemes -> phones). With discount_lm the language is unweighted and
// made deterministic, so each surviving PT path keeps its weight exactly.
// Without it, the LM weights multiply in.
fst::Wfst LexiconLanguage(const fst::Wfst& lexicon, const fst::Wfst& lm, bool discount_lm);

// Intersects the PT with LexiconLanguage(lexicon, lm, discount_lm).
channel::PtLattice ConstrainLexicon(const channel::PtLattice& pt, const fst::Wfst& lexicon,
                                    const fst::Wfst& lm, bool discount_lm);

// Expands a word bigram into an acceptor over graphemes with "#" between
// words: arc weights -log p(w|v) on the first grapheme of each word.
BuildReport WordBigramToGraphemeFsa(const lm::BigramModel& words, const fst::SymbolTablePtr& graphemes);

// Subset construction for an unweighted acceptor (weights ignored, result
// all One, epsilon-free).
fst::Wfst DeterminizeUnweighted(const fst::Wfst& acceptor);

}  // namespace ptforge::constraints
