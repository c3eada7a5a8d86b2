#pragma once

#include <cstdint>
#include <vector>

#include "ptforge/fst/symbol_table.hpp"
#include "ptforge/fst/weight.hpp"

namespace ptforge::fst {

using StateId = int32_t;
inline constexpr StateId kNoState = -1;

struct Arc {
  Label ilabel = kEpsilon;
  Label olabel = kEpsilon;
  Weight weight = Weight::One();
  StateId nextstate = kNoState;

  friend bool operator==(const Arc&, const Arc&) = default;
};

// Mutable weighted transducer. Arcs are stored per source state in
// insertion order; a state is final when its final weight is not Zero.
class Wfst {
 public:
  Wfst() = default;
  Wfst(SymbolTablePtr isyms, SymbolTablePtr osyms)
      : isyms_(std::move(isyms)), osyms_(std::move(osyms)) {}

  StateId AddState();
  void AddStates(StateId n);
  void SetStart(StateId s);
  void SetFinal(StateId s, Weight w);
  void AddArc(StateId src, Arc arc);

  StateId NumStates() const { return static_cast<StateId>(states_.size()); }
  StateId Start() const { return start_; }
  Weight Final(StateId s) const { return states_[s].final; }
  bool IsFinal(StateId s) const { return !states_[s].final.IsZero(); }
  const std::vector<Arc>& Arcs(StateId s) const { return states_[s].arcs; }
  std::vector<Arc>& MutableArcs(StateId s) { return states_[s].arcs; }
  std::size_t NumArcs() const;

  // True when the machine has no start state or no states at all.
  bool Empty() const { return start_ == kNoState || states_.empty(); }
  bool IsAcceptor() const;
  bool IsAcyclic() const;

  const SymbolTablePtr& InputSymbols() const { return isyms_; }
  const SymbolTablePtr& OutputSymbols() const { return osyms_; }
  void SetInputSymbols(SymbolTablePtr t) { isyms_ = std::move(t); }
  void SetOutputSymbols(SymbolTablePtr t) { osyms_ = std::move(t); }

  // Checks arc endpoints, label ranges and the start state; throws
  // ContractError describing the first violation.
  void Validate() const;

  friend bool operator==(const Wfst& a, const Wfst& b);

 private:
  struct State {
    std::vector<Arc> arcs;
    Weight final = Weight::Zero();
    friend bool operator==(const State&, const State&) = default;
  };
  std::vector<State> states_;
  StateId start_ = kNoState;
  SymbolTablePtr isyms_;
  SymbolTablePtr osyms_;
};

// States in topological order; empty optional-like result (false) when the
// machine has a cycle reachable from any state.
bool TopologicalOrder(const Wfst& fst, std::vector<StateId>* order);

}  // namespace ptforge::fst
