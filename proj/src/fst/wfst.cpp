#include "ptforge/fst/wfst.hpp"

#include <string>

#include "ptforge/error.hpp"

namespace ptforge::fst {

StateId Wfst::AddState() {
  states_.emplace_back();
  return NumStates() - 1;
}

void Wfst::AddStates(StateId n) {
  states_.resize(states_.size() + static_cast<std::size_t>(n));
}

void Wfst::SetStart(StateId s) {
  if (s < 0 || s >= NumStates()) throw ContractError("SetStart: no such state");
  start_ = s;
}

void Wfst::SetFinal(StateId s, Weight w) {
  if (s < 0 || s >= NumStates()) throw ContractError("SetFinal: no such state");
  states_[s].final = w;
}

void Wfst::AddArc(StateId src, Arc arc) {
  if (src < 0 || src >= NumStates()) throw ContractError("AddArc: bad source state");
  states_[src].arcs.push_back(arc);
}

std::size_t Wfst::NumArcs() const {
  std::size_t n = 0;
  for (const auto& s : states_) n += s.arcs.size();
  return n;
}

bool Wfst::IsAcceptor() const {
  for (const auto& s : states_)
    for (const auto& a : s.arcs)
      if (a.ilabel != a.olabel) return false;
  return true;
}

bool Wfst::IsAcyclic() const {
  std::vector<StateId> order;
  return TopologicalOrder(*this, &order);
}

void Wfst::Validate() const {
  if (!states_.empty() && start_ == kNoState)
    throw ContractError("Wfst: nonempty machine without start state");
  for (StateId s = 0; s < NumStates(); ++s) {
    for (const auto& a : states_[s].arcs) {
      if (a.nextstate < 0 || a.nextstate >= NumStates())
        throw ContractError("Wfst: arc from state " + std::to_string(s) + " to missing state");
      if (isyms_ && !isyms_->Contains(a.ilabel))
        throw ContractError("Wfst: input label " + std::to_string(a.ilabel) + " not in table");
      if (osyms_ && !osyms_->Contains(a.olabel))
        throw ContractError("Wfst: output label " + std::to_string(a.olabel) + " not in table");
    }
  }
}

bool operator==(const Wfst& a, const Wfst& b) {
  return a.start_ == b.start_ && a.states_ == b.states_ && SameTable(a.isyms_, b.isyms_) &&
         SameTable(a.osyms_, b.osyms_);
}

bool TopologicalOrder(const Wfst& fst, std::vector<StateId>* order) {
  const StateId n = fst.NumStates();
  std::vector<int> indegree(n, 0);
  for (StateId s = 0; s < n; ++s)
    for (const auto& a : fst.Arcs(s)) ++indegree[a.nextstate];
  std::vector<StateId> queue;
  for (StateId s = 0; s < n; ++s)
    if (indegree[s] == 0) queue.push_back(s);
  order->clear();
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const StateId s = queue[head];
    order->push_back(s);
    for (const auto& a : fst.Arcs(s))
      if (--indegree[a.nextstate] == 0) queue.push_back(a.nextstate);
  }
  return static_cast<StateId>(order->size()) == n;
}

}  // namespace ptforge::fst
