#include "ptforge/channel/decode.hpp"

#include "ptforge/error.hpp"

namespace ptforge::channel {

fst::Wfst LengthBoundAcceptor(const fst::SymbolTablePtr& phones, int max_len) {
  if (max_len < 0) throw ContractError("LengthBoundAcceptor: negative bound");
  fst::Wfst out(phones, phones);
  out.AddStates(max_len + 1);
  out.SetStart(0);
  const std::vector<Label> labels = phones->Labels();
  for (int k = 0; k <= max_len; ++k) {
    out.SetFinal(k, fst::Weight::One());
    if (k == max_len) break;
    for (Label l : labels) out.AddArc(k, {l, l, fst::Weight::One(), k + 1});
  }
  return out;
}

PtLattice DecodePt(const ConfusionNetwork& cn, const ChannelModel& channel, const lm::BigramModel* letter_lm,
                   const lm::BigramModel& phone_lm, const DecodeOptions& options) {
  if (!fst::SameTable(channel.Letters(), cn.letters)) {
    throw ContractError("DecodePt: channel and confusion network letter tables differ");
  }
  if (!fst::SameTable(channel.Phones(), phone_lm.Symbols())) {
    throw ContractError("DecodePt: channel and phone LM tables differ");
  }
  if (letter_lm && !fst::SameTable(letter_lm->Symbols(), cn.letters)) {
    throw ContractError("DecodePt: letter LM table differs from the transcript letters");
  }
  const int max_phones = options.max_phones.value_or(2 * static_cast<int>(cn.longest_transcript));

  fst::Wfst lattice = fst::Compose(ChannelToFst(channel), ConfnetToFst(cn));
  if (letter_lm) lattice = fst::Compose(lattice, fst::ScaleWeights(lm::BigramToFsa(*letter_lm), -1.0));
  lattice = fst::Project(lattice, fst::ProjectSide::kInput);
  lattice = fst::Compose(LengthBoundAcceptor(channel.Phones(), max_phones), lattice);
  lattice = fst::Compose(lattice, lm::BigramToFsa(phone_lm));
  if (lattice.Empty()) {
    throw EmptyLatticeError("no phone string of length <= " + std::to_string(max_phones) +
                            " explains the transcripts (phone inventory or channel mismatch)");
  }
  return PtLattice(std::move(lattice));
}

fst::ScoredSequence BestPathPt(const PtLattice& pt, fst::Semiring semiring) {
  if (pt.Empty()) throw NoPathError("BestPathPt: empty lattice");
  if (semiring == fst::Semiring::kLog) return fst::ShortestStringLog(pt.Fst());
  return fst::ShortestPath(pt.Fst(), 1).front();
}

}  // namespace ptforge::channel
