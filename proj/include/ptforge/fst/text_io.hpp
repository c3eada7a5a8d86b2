#pragma once

#include <istream>
#include <ostream>
#include <string>

#include "ptforge/fst/wfst.hpp"

namespace ptforge::fst {

// AT&T text format with numeric labels: arc lines "src dst ilabel olabel
// [weight]" (weight omitted when One), final lines "state [weight]". The
// start state's arcs come first. Lines beginning with "# " are comments.
void WriteText(const Wfst& fst, std::ostream& out);
Wfst ReadText(std::istream& in, SymbolTablePtr isyms, SymbolTablePtr osyms);

std::string ToText(const Wfst& fst);
Wfst FromText(const std::string& text, SymbolTablePtr isyms, SymbolTablePtr osyms);

}  // namespace ptforge::fst
