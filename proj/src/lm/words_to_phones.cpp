#include "ptforge/lm/words_to_phones.hpp"

#include <set>

#include "ptforge/error.hpp"
#include "ptforge/util/text.hpp"

namespace ptforge::lm {

std::vector<std::vector<fst::Label>> WordsToPhones(const std::vector<std::vector<std::string>>& corpus,
                                                   const constraints::PronDict& dict,
                                                   const constraints::G2PRuleSet& fallback) {
  const auto& phones = *fallback.Phones();
  std::map<std::string, constraints::Pron> cache;
  std::set<std::string> uncovered;
  auto lookup = [&](const std::string& word) -> const constraints::Pron* {
    if (auto it = cache.find(word); it != cache.end()) return &it->second;
    if (auto it = dict.find(word); it != dict.end() && !it->second.empty())
      return &cache.emplace(word, it->second.front()).first->second;
    std::vector<fst::Label> g;
    if (!constraints::WordGraphemes(word, *fallback.Graphemes(), &g)) return nullptr;
    const auto prons = constraints::EnumeratePronunciations(fallback, g);
    if (prons.empty()) return nullptr;
    const constraints::Pron* best = nullptr;
    std::vector<std::string> best_syms;
    for (const auto& p : prons) {
      auto syms = phones.Symbols(p);
      if (!best || syms < best_syms) {
        best = &p;
        best_syms = std::move(syms);
      }
    }
    return &cache.emplace(word, *best).first->second;
  };
  std::vector<std::vector<fst::Label>> out;
  for (const auto& sentence : corpus) {
    std::vector<fst::Label> seq;
    for (const auto& w : sentence) {
      const auto* pron = lookup(w);
      if (!pron) {
        uncovered.insert(w);
        continue;
      }
      seq.insert(seq.end(), pron->begin(), pron->end());
    }
    out.push_back(std::move(seq));
  }
  if (!uncovered.empty())
    throw DataError("words without pronunciation: " + util::Join({uncovered.begin(), uncovered.end()}, " "));
  return out;
}

}  // namespace ptforge::lm
