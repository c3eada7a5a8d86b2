#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <queue>

#include "ptforge/error.hpp"
#include "ptforge/fst/ops.hpp"

namespace ptforge::fst {

namespace {

// State weights keyed by topological rank.
using Subset = std::map<int, double>;

struct Item {
  double priority;
  std::vector<Label> prefix;
  bool goal;
  Subset subset;
};

struct ItemAfter {
  bool operator()(const Item& a, const Item& b) const {
    if (a.priority != b.priority) return a.priority > b.priority;
    if (a.prefix != b.prefix) return a.prefix > b.prefix;
    return !a.goal && b.goal;
  }
};

double LogAdd(double a, double b) { return LogPlus(Weight(a), Weight(b)).value(); }

}  // namespace

ScoredSequence ShortestStringLog(const Wfst& a) {
  if (a.Empty()) throw NoPathError("ShortestStringLog: empty machine");
  std::vector<StateId> order;
  if (!TopologicalOrder(a, &order)) throw ContractError("ShortestStringLog: machine is cyclic");
  std::vector<int> rank(a.NumStates());
  for (std::size_t i = 0; i < order.size(); ++i) rank[order[i]] = static_cast<int>(i);
  const std::vector<Weight> beta = DistanceToFinal(a, Semiring::kLog);
  if (beta[a.Start()].IsZero()) throw NoPathError("ShortestStringLog: no accepting path");

  auto closure = [&](Subset s) {
    Subset out;
    while (!s.empty()) {
      auto [r, w] = *s.begin();
      s.erase(s.begin());
      out[r] = w;
      for (const Arc& arc : a.Arcs(order[r])) {
        if (arc.olabel != kEpsilon || arc.weight.IsZero()) continue;
        const double v = w + arc.weight.value();
        auto [it, fresh] = s.try_emplace(rank[arc.nextstate], v);
        if (!fresh) it->second = LogAdd(it->second, v);
      }
    }
    return out;
  };
  auto heuristic = [&](const Subset& s) {
    double h = Weight::Zero().value();
    for (const auto& [r, w] : s) {
      if (!beta[order[r]].IsZero()) h = LogAdd(h, w + beta[order[r]].value());
    }
    return h;
  };

  std::priority_queue<Item, std::vector<Item>, ItemAfter> queue;
  Subset start = closure({{rank[a.Start()], 0.0}});
  queue.push({heuristic(start), {}, false, std::move(start)});
  while (!queue.empty()) {
    Item item = queue.top();
    queue.pop();
    if (item.goal) return {std::move(item.prefix), Weight(item.priority)};

    double final_cost = Weight::Zero().value();
    std::map<Label, Subset> moves;
    for (const auto& [r, w] : item.subset) {
      const StateId s = order[r];
      if (a.IsFinal(s)) final_cost = LogAdd(final_cost, w + a.Final(s).value());
      for (const Arc& arc : a.Arcs(s)) {
        if (arc.olabel == kEpsilon || arc.weight.IsZero()) continue;
        Subset& next = moves[arc.olabel];
        const double v = w + arc.weight.value();
        auto [it, fresh] = next.try_emplace(rank[arc.nextstate], v);
        if (!fresh) it->second = LogAdd(it->second, v);
      }
    }
    if (std::isfinite(final_cost)) queue.push({final_cost, item.prefix, true, {}});
    for (auto& [label, next] : moves) {
      Subset closed = closure(std::move(next));
      const double h = heuristic(closed);
      if (!std::isfinite(h)) continue;
      std::vector<Label> prefix = item.prefix;
      prefix.push_back(label);
      queue.push({h, std::move(prefix), false, std::move(closed)});
    }
  }
  throw NoPathError("ShortestStringLog: no accepting path");
}

}  // namespace ptforge::fst
