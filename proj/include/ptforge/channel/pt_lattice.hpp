#pragma once

#include "ptforge/fst/wfst.hpp"

namespace ptforge::channel {

// Acceptor over phones whose path weights model the posterior over phone
// strings for one utterance.
class PtLattice {
 public:
  // Throws ContractError unless `fst` is an acceptor over its phone table;
  // throws EmptyLatticeError for an empty machine unless allow_empty.
  explicit PtLattice(fst::Wfst fst, bool allow_empty = false);

  const fst::Wfst& Fst() const { return fst_; }
  const fst::SymbolTablePtr& Phones() const { return fst_.InputSymbols(); }
  bool Empty() const { return fst_.Empty(); }

 private:
  fst::Wfst fst_;
};

}  // namespace ptforge::channel
