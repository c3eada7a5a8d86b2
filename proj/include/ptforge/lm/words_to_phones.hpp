#pragma once

#include <string>
#include <vector>

#include "ptforge/constraints/lexicon.hpp"

namespace ptforge::lm {

// Replaces each word by its first dictionary pronunciation, or else by the
// lexicographically first rule pronunciation (compared as phone symbol
// strings). Throws DataError listing uncovered words.
std::vector<std::vector<fst::Label>> WordsToPhones(const std::vector<std::vector<std::string>>& corpus,
                                                   const constraints::PronDict& dict,
                                                   const constraints::G2PRuleSet& fallback);

}  // namespace ptforge::lm
