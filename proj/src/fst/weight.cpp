#include "ptforge/fst/weight.hpp"

#include "ptforge/util/text.hpp"

namespace ptforge::fst {

std::string FormatWeight(Weight w) { return util::FormatDouble9(w.value()); }

Weight ParseWeight(const std::string& text) { return Weight(util::ParseDouble(text)); }

Semiring ParseSemiring(const std::string& name) {
  if (name == "log") return Semiring::kLog;
  if (name == "tropical") return Semiring::kTropical;
  throw ContractError("unknown semiring '" + name + "' (expected log or tropical)");
}

const char* SemiringName(Semiring sr) { return sr == Semiring::kLog ? "log" : "tropical"; }

}  // namespace ptforge::fst
