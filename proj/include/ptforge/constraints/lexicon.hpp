#pragma once

#include <istream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "ptforge/fst/wfst.hpp"

namespace ptforge::constraints {

using fst::Label;
using Pron = std::vector<Label>;

// Separates words in grapheme strings fed through the lexicon machines.
inline constexpr const char* kWordBoundary = "#";

// Unweighted grapheme -> pronunciation rules.
class G2PRuleSet {
 public:
  G2PRuleSet(fst::SymbolTablePtr graphemes, fst::SymbolTablePtr phones,
             std::map<std::vector<Label>, std::set<Pron>> rules);

  const fst::SymbolTablePtr& Graphemes() const { return graphemes_; }
  const fst::SymbolTablePtr& Phones() const { return phones_; }
  const std::map<std::vector<Label>, std::set<Pron>>& Rules() const { return rules_; }
  std::size_t NumRules() const;

 private:
  fst::SymbolTablePtr graphemes_;
  fst::SymbolTablePtr phones_;
  std::map<std::vector<Label>, std::set<Pron>> rules_;
};

// "grapheme<TAB>space-separated phones" lines, '#' comments. The grapheme
// table is built from the rule characters plus the word boundary, then
// extended with `extra_graphemes` (characters of words the rules may not
// cover). Throws ParseError with the line number.
G2PRuleSet ParseG2PRules(std::istream& in, fst::SymbolTablePtr phones,
                         const std::vector<std::string>& extra_graphemes = {});

using WordList = std::vector<std::string>;
// One word per line; duplicates are dropped, first occurrence kept.
WordList ReadWordList(std::istream& in);

// word -> pronunciations, file order preserved.
using PronDict = std::map<std::string, std::vector<Pron>>;
PronDict ReadPronDict(std::istream& in, const fst::SymbolTable& phones);

using PhoneInventory = std::set<Label>;
PhoneInventory InventoryFromRules(const G2PRuleSet& rules);
PhoneInventory ParseInventory(const std::vector<std::string>& phones, const fst::SymbolTable& table);

// Every pronunciation the rules allow for `word`, over all segmentations.
std::set<Pron> EnumeratePronunciations(const G2PRuleSet& rules, const std::vector<Label>& word);

// Grapheme ids of a UTF-8 word; nullopt-like empty result when a character
// is missing from the table.
bool WordGraphemes(const std::string& word, const fst::SymbolTable& graphemes, std::vector<Label>* out);

// Closure over rule paths plus a "#":eps loop; all weights One.
fst::Wfst G2pToFst(const G2PRuleSet& rules);

struct BuildReport {
  fst::Wfst fst;
  std::vector<std::string> excluded;
};

// Unweighted acceptor of W (# W)* over the grapheme table.
BuildReport BuildWordLm(const WordList& words, const fst::SymbolTablePtr& graphemes);

// Word-sequence transducer from graphemes to phones: dictionary words map
// to their listed pronunciations only; the other `vocabulary` words map
// through the fallback rules. Words neither can pronounce are excluded.
BuildReport BuildDictFst(const PronDict& dict, const G2PRuleSet& fallback, const WordList& vocabulary = {});

}  // namespace ptforge::constraints
