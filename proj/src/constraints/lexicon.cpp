#include "ptforge/constraints/lexicon.hpp"

#include <algorithm>

#include "ptforge/error.hpp"
#include "ptforge/util/text.hpp"

namespace ptforge::constraints {

using fst::Arc;
using fst::kEpsilon;
using fst::StateId;
using fst::Weight;

G2PRuleSet::G2PRuleSet(fst::SymbolTablePtr graphemes, fst::SymbolTablePtr phones,
                       std::map<std::vector<Label>, std::set<Pron>> rules)
    : graphemes_(std::move(graphemes)), phones_(std::move(phones)), rules_(std::move(rules)) {
  if (rules_.empty()) throw DataError("G2P rule set is empty");
  for (const auto& [g, prons] : rules_) {
    if (g.empty()) throw ContractError("G2P rule with empty grapheme");
    for (Label l : g)
      if (l == kEpsilon || !graphemes_->Contains(l)) throw ContractError("G2P grapheme outside table");
    for (const auto& p : prons)
      for (Label l : p)
        if (l == kEpsilon || !phones_->Contains(l)) throw ContractError("G2P phone outside table");
  }
}

std::size_t G2PRuleSet::NumRules() const {
  std::size_t n = 0;
  for (const auto& [g, prons] : rules_) n += prons.size();
  return n;
}

G2PRuleSet ParseG2PRules(std::istream& in, fst::SymbolTablePtr phones,
                         const std::vector<std::string>& extra_graphemes) {
  fst::SymbolTable graphemes;
  graphemes.Add(kWordBoundary);
  std::vector<std::pair<std::vector<std::string>, Pron>> parsed;
  int lineno = 0;
  for (const auto& line : util::ReadLines(in)) {
    ++lineno;
    if (util::Trim(line).empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw ParseError("expected 'grapheme<TAB>phones'", lineno);
    const std::string grapheme(util::Trim(line.substr(0, tab)));
    if (grapheme.empty()) throw ParseError("empty grapheme", lineno);
    std::vector<std::string> chars;
    try {
      chars = util::Utf8Chars(grapheme);
    } catch (const DataError& e) {
      throw ParseError(e.what(), lineno);
    }
    for (const auto& c : chars)
      if (c == kWordBoundary) throw ParseError("'#' is reserved for word boundaries", lineno);
    Pron pron;
    for (const auto& p : util::SplitWhitespace(line.substr(tab + 1))) {
      auto id = phones->Find(p);
      if (!id || *id == kEpsilon) throw ParseError("unknown phone '" + p + "'", lineno);
      pron.push_back(*id);
    }
    for (const auto& c : chars) graphemes.Add(c);
    parsed.emplace_back(std::move(chars), std::move(pron));
  }
  for (const auto& g : extra_graphemes) graphemes.Add(g);
  auto table = fst::MakeTable(std::move(graphemes));
  std::map<std::vector<Label>, std::set<Pron>> rules;
  for (auto& [chars, pron] : parsed) rules[table->Ids(chars)].insert(std::move(pron));
  if (rules.empty()) throw DataError("G2P rule file has no rules");
  return G2PRuleSet(table, std::move(phones), std::move(rules));
}

WordList ReadWordList(std::istream& in) {
  WordList words;
  std::set<std::string> seen;
  for (const auto& line : util::ReadLines(in)) {
    if (util::IsCommentLine(line)) continue;
    const std::string w(util::Trim(line));
    if (w.empty() || !seen.insert(w).second) continue;
    words.push_back(w);
  }
  return words;
}

PronDict ReadPronDict(std::istream& in, const fst::SymbolTable& phones) {
  PronDict dict;
  int lineno = 0;
  for (const auto& line : util::ReadLines(in)) {
    ++lineno;
    if (util::Trim(line).empty() || util::IsCommentLine(line)) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw ParseError("expected 'word<TAB>phones'", lineno);
    const std::string word(util::Trim(line.substr(0, tab)));
    Pron pron;
    for (const auto& p : util::SplitWhitespace(line.substr(tab + 1))) {
      auto id = phones.Find(p);
      if (!id || *id == kEpsilon) throw ParseError("unknown phone '" + p + "'", lineno);
      pron.push_back(*id);
    }
    if (word.empty() || pron.empty()) throw ParseError("empty word or pronunciation", lineno);
    auto& prons = dict[word];
    if (std::find(prons.begin(), prons.end(), pron) == prons.end()) prons.push_back(std::move(pron));
  }
  return dict;
}

PhoneInventory InventoryFromRules(const G2PRuleSet& rules) {
  PhoneInventory inv;
  for (const auto& [g, prons] : rules.Rules())
    for (const auto& p : prons) inv.insert(p.begin(), p.end());
  return inv;
}

PhoneInventory ParseInventory(const std::vector<std::string>& phones, const fst::SymbolTable& table) {
  PhoneInventory inv;
  for (const auto& p : phones) {
    const Label id = table.Id(p);
    if (id == kEpsilon) throw DataError("epsilon in phone inventory");
    inv.insert(id);
  }
  if (inv.empty()) throw DataError("empty phone inventory");
  return inv;
}

std::set<Pron> EnumeratePronunciations(const G2PRuleSet& rules, const std::vector<Label>& word) {
  std::vector<std::set<Pron>> prefix(word.size() + 1);
  prefix[0].insert(Pron{});
  for (std::size_t i = 0; i < word.size(); ++i) {
    if (prefix[i].empty()) continue;
    for (const auto& [g, prons] : rules.Rules()) {
      if (i + g.size() > word.size() || !std::equal(g.begin(), g.end(), word.begin() + static_cast<long>(i)))
        continue;
      auto& dst = prefix[i + g.size()];
      for (const auto& head : prefix[i]) {
        for (const auto& tail : prons) {
          Pron p = head;
          p.insert(p.end(), tail.begin(), tail.end());
          dst.insert(std::move(p));
        }
      }
    }
  }
  return prefix[word.size()];
}

bool WordGraphemes(const std::string& word, const fst::SymbolTable& graphemes, std::vector<Label>* out) {
  out->clear();
  for (const auto& c : util::Utf8Chars(word)) {
    auto id = graphemes.Find(c);
    if (!id || *id == kEpsilon || c == kWordBoundary) return false;
    out->push_back(*id);
  }
  return !out->empty();
}

namespace {

// Adds a path hub_from -> ... -> hub_to spelling (in, out) with epsilon
// padding; `w` on the first arc.
void AddChain(fst::Wfst& m, StateId from, StateId to, const std::vector<Label>& in,
              const std::vector<Label>& out, Weight w) {
  const std::size_t len = std::max(in.size(), out.size());
  StateId cur = from;
  for (std::size_t i = 0; i < len; ++i) {
    const StateId next = i + 1 == len ? to : m.AddState();
    m.AddArc(cur, Arc{i < in.size() ? in[i] : kEpsilon, i < out.size() ? out[i] : kEpsilon,
                      i == 0 ? w : Weight::One(), next});
    cur = next;
  }
}

}  // namespace

fst::Wfst G2pToFst(const G2PRuleSet& rules) {
  fst::Wfst m(rules.Graphemes(), rules.Phones());
  m.AddState();
  m.SetStart(0);
  m.SetFinal(0, Weight::One());
  m.AddArc(0, Arc{rules.Graphemes()->Id(kWordBoundary), kEpsilon, Weight::One(), 0});
  for (const auto& [g, prons] : rules.Rules())
    for (const auto& p : prons) AddChain(m, 0, 0, g, p, Weight::One());
  return m;
}

BuildReport BuildWordLm(const WordList& words, const fst::SymbolTablePtr& graphemes) {
  if (words.empty()) throw ContractError("BuildWordLm: empty word list");
  BuildReport report{fst::Wfst(graphemes, graphemes), {}};
  auto& m = report.fst;
  m.AddStates(2);
  m.SetStart(0);
  m.SetFinal(1, Weight::One());
  m.AddArc(1, Arc{graphemes->Id(kWordBoundary), graphemes->Id(kWordBoundary), Weight::One(), 0});
  std::vector<Label> g;
  bool any = false;
  for (const auto& w : words) {
    if (!WordGraphemes(w, *graphemes, &g)) {
      report.excluded.push_back(w);
      continue;
    }
    AddChain(m, 0, 1, g, g, Weight::One());
    any = true;
  }
  if (!any) throw DataError("BuildWordLm: no word is spellable with the grapheme table");
  return report;
}

BuildReport BuildDictFst(const PronDict& dict, const G2PRuleSet& fallback, const WordList& vocabulary) {
  if (dict.empty() && vocabulary.empty()) throw ContractError("BuildDictFst: nothing to compile");
  const auto& graphemes = fallback.Graphemes();
  BuildReport report{fst::Wfst(graphemes, fallback.Phones()), {}};
  auto& m = report.fst;
  m.AddStates(2);
  m.SetStart(0);
  m.SetFinal(1, Weight::One());
  m.AddArc(1, Arc{graphemes->Id(kWordBoundary), kEpsilon, Weight::One(), 0});

  std::vector<std::string> words;
  for (const auto& [w, prons] : dict) words.push_back(w);
  for (const auto& w : vocabulary)
    if (!dict.count(w)) words.push_back(w);

  std::vector<Label> g;
  for (const auto& w : words) {
    if (!WordGraphemes(w, *graphemes, &g)) {
      report.excluded.push_back(w);
      continue;
    }
    std::vector<Pron> prons;
    if (auto it = dict.find(w); it != dict.end()) {
      prons = it->second;
    } else {
      const auto all = EnumeratePronunciations(fallback, g);
      prons.assign(all.begin(), all.end());
    }
    if (prons.empty()) {
      report.excluded.push_back(w);
      continue;
    }
    for (const auto& p : prons) AddChain(m, 0, 1, g, p, Weight::One());
  }
  return report;
}

}  // namespace ptforge::constraints
