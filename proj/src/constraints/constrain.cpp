#include "ptforge/constraints/constrain.hpp"

#include <cmath>
#include <map>
#include <set>

#include "ptforge/error.hpp"
#include "ptforge/fst/ops.hpp"
#include "ptforge/util/text.hpp"

namespace ptforge::constraints {

using fst::Arc;
using fst::kEpsilon;
using fst::StateId;
using fst::Weight;
using fst::Wfst;

Variant ParseVariant(const std::string& name) {
  if (name == "inventory") return Variant::kInventory;
  if (name == "g2p") return Variant::kG2P;
  if (name == "g2p+dict") return Variant::kG2PDict;
  if (name == "wlm") return Variant::kWlm;
  throw ContractError("unknown constraint '" + name + "' (inventory, g2p, g2p+dict, wlm)");
}

const char* VariantName(Variant v) {
  switch (v) {
    case Variant::kInventory: return "inventory";
    case Variant::kG2P: return "g2p";
    case Variant::kG2PDict: return "g2p+dict";
    case Variant::kWlm: return "wlm";
  }
  return "?";
}

channel::PtLattice ConstrainPhonemeInventory(const channel::PtLattice& pt, const PhoneInventory& inventory) {
  const auto& phones = pt.Phones();
  Wfst filter(phones, phones);
  filter.AddState();
  filter.SetStart(0);
  filter.SetFinal(0, Weight::One());
  for (Label l : inventory) {
    if (l == kEpsilon || !phones->Contains(l)) throw ContractError("inventory phone outside the lattice table");
    filter.AddArc(0, Arc{l, l, Weight::One(), 0});
  }
  Wfst out = fst::Compose(pt.Fst(), filter);
  if (out.Empty()) {
    std::set<std::string> offending;
    const auto& m = pt.Fst();
    for (StateId s = 0; s < m.NumStates(); ++s)
      for (const Arc& a : m.Arcs(s))
        if (a.ilabel != kEpsilon && !inventory.count(a.ilabel)) offending.insert(phones->Symbol(a.ilabel));
    throw EmptyLatticeError("inventory constraint removed every path; phones outside inventory: " +
                            util::Join({offending.begin(), offending.end()}, " "));
  }
  return channel::PtLattice(std::move(out));
}

Wfst DeterminizeUnweighted(const Wfst& a) {
  Wfst out(a.InputSymbols(), a.OutputSymbols());
  if (a.Empty()) return out;
  auto closure = [&a](std::set<StateId> states) {
    std::vector<StateId> stack(states.begin(), states.end());
    while (!stack.empty()) {
      const StateId s = stack.back();
      stack.pop_back();
      for (const Arc& arc : a.Arcs(s)) {
        if (arc.ilabel != kEpsilon || arc.weight.IsZero()) continue;
        if (states.insert(arc.nextstate).second) stack.push_back(arc.nextstate);
      }
    }
    return std::vector<StateId>(states.begin(), states.end());
  };
  std::map<std::vector<StateId>, StateId> ids;
  std::vector<std::vector<StateId>> queue;
  auto id_of = [&](std::vector<StateId> subset) {
    auto it = ids.find(subset);
    if (it != ids.end()) return it->second;
    const StateId s = out.AddState();
    ids.emplace(subset, s);
    queue.push_back(std::move(subset));
    return s;
  };
  out.SetStart(id_of(closure({a.Start()})));
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const std::vector<StateId> subset = queue[head];
    const auto src = static_cast<StateId>(head);
    std::map<Label, std::set<StateId>> moves;
    bool final = false;
    for (StateId s : subset) {
      final = final || a.IsFinal(s);
      for (const Arc& arc : a.Arcs(s))
        if (arc.ilabel != kEpsilon && !arc.weight.IsZero()) moves[arc.ilabel].insert(arc.nextstate);
    }
    if (final) out.SetFinal(src, Weight::One());
    for (auto& [label, targets] : moves) {
      const StateId dst = id_of(closure(std::move(targets)));
      out.AddArc(src, Arc{label, label, Weight::One(), dst});
    }
  }
  return fst::Connect(out);
}

Wfst LexiconLanguage(const Wfst& lexicon, const Wfst& lm, bool discount_lm) {
  const Wfst lm_used = discount_lm ? fst::DiscountWeights(lm) : lm;
  const Wfst lex_used = discount_lm ? fst::DiscountWeights(lexicon) : lexicon;
  Wfst language = fst::Project(fst::Compose(lm_used, lex_used), fst::ProjectSide::kOutput);
  if (discount_lm) language = DeterminizeUnweighted(language);
  return language;
}

channel::PtLattice ConstrainLexicon(const channel::PtLattice& pt, const Wfst& lexicon, const Wfst& lm,
                                    bool discount_lm) {
  // The weighted language is nondeterministic over phones, so the lattice
  // is mapped to graphemes first; the grapheme history then fixes the LM
  // context and the product stays small.
  Wfst out = discount_lm ? fst::Compose(pt.Fst(), LexiconLanguage(lexicon, lm, true))
                         : fst::Project(fst::Compose(fst::Compose(pt.Fst(), fst::Invert(lexicon)), lm),
                                        fst::ProjectSide::kInput);
  if (out.Empty())
    throw EmptyLatticeError(std::string("lexicon constraint removed every path (") +
                            (discount_lm ? "word list" : "word LM") + ")");
  return channel::PtLattice(std::move(out));
}

BuildReport WordBigramToGraphemeFsa(const lm::BigramModel& words, const fst::SymbolTablePtr& graphemes) {
  const auto& vocab = *words.Symbols();
  BuildReport report{Wfst(graphemes, graphemes), {}};
  auto& m = report.fst;
  const Label v = vocab.Size();
  m.AddStates(v);
  m.SetStart(0);
  const Label boundary = graphemes->Id(kWordBoundary);
  std::vector<std::vector<Label>> spell(v);
  for (Label y = 1; y < v; ++y)
    if (!WordGraphemes(vocab.Symbol(y), *graphemes, &spell[y])) report.excluded.push_back(vocab.Symbol(y));
  for (Label ctx = 0; ctx < v; ++ctx) {
    if (ctx != lm::BigramModel::kBos && spell[ctx].empty()) continue;
    for (Label y = 1; y < v; ++y) {
      const double p = words.Prob(ctx, y);
      if (p <= 0 || spell[y].empty()) continue;
      std::vector<Label> g;
      if (ctx != lm::BigramModel::kBos) g.push_back(boundary);
      g.insert(g.end(), spell[y].begin(), spell[y].end());
      StateId cur = ctx;
      for (std::size_t i = 0; i < g.size(); ++i) {
        const StateId next = i + 1 == g.size() ? y : m.AddState();
        m.AddArc(cur, Arc{g[i], g[i], i == 0 ? Weight(-std::log(p)) : Weight::One(), next});
        cur = next;
      }
    }
    const double pe = words.Prob(ctx, words.Eos());
    if (pe > 0) m.SetFinal(ctx, Weight(-std::log(pe)));
  }
  return report;
}

}  // namespace ptforge::constraints
