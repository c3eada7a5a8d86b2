#include "ptforge/fst/ops.hpp"

#include <algorithm>
#include <map>
#include <queue>
#include <set>
#include <string>
#include <unordered_map>

#include "ptforge/error.hpp"

namespace ptforge::fst {

namespace {

struct ComposeKey {
  StateId a;
  StateId b;
  int filter;
  bool operator==(const ComposeKey&) const = default;
};

struct ComposeKeyHash {
  std::size_t operator()(const ComposeKey& k) const {
    std::size_t h = static_cast<std::size_t>(k.a) * 1000003u;
    h ^= static_cast<std::size_t>(k.b) * 8191u + static_cast<std::size_t>(k.filter);
    return h;
  }
};

Wfst EmptyLike(const SymbolTablePtr& isyms, const SymbolTablePtr& osyms) {
  return Wfst(isyms, osyms);
}

}  // namespace

Wfst Compose(const Wfst& a, const Wfst& b) {
  if (!SameTable(a.OutputSymbols(), b.InputSymbols()))
    throw ContractError("Compose: output table of the left machine differs from input table of the right");
  Wfst out(a.InputSymbols(), b.OutputSymbols());
  if (a.Empty() || b.Empty()) return out;

  // Filter states: 0 = free, 1 = left moved alone on an output epsilon,
  // 2 = right moved alone on an input epsilon.
  std::unordered_map<ComposeKey, StateId, ComposeKeyHash> ids;
  std::vector<ComposeKey> queue;
  auto state_of = [&](ComposeKey k) {
    auto it = ids.find(k);
    if (it != ids.end()) return it->second;
    const StateId s = out.AddState();
    ids.emplace(k, s);
    queue.push_back(k);
    return s;
  };
  out.SetStart(state_of({a.Start(), b.Start(), 0}));

  for (std::size_t head = 0; head < queue.size(); ++head) {
    const ComposeKey k = queue[head];
    const StateId src = static_cast<StateId>(head);
    out.SetFinal(src, Times(a.Final(k.a), b.Final(k.b)));
    const auto& barcs = b.Arcs(k.b);
    for (const Arc& ea : a.Arcs(k.a)) {
      if (ea.olabel == kEpsilon) {
        if (k.filter != 2) {
          const StateId dst = state_of({ea.nextstate, k.b, 1});
          out.AddArc(src, {ea.ilabel, kEpsilon, ea.weight, dst});
        }
        if (k.filter == 0) {
          for (const Arc& eb : barcs) {
            if (eb.ilabel != kEpsilon) continue;
            const Weight w = Times(ea.weight, eb.weight);
            if (w.IsZero()) continue;
            const StateId dst = state_of({ea.nextstate, eb.nextstate, 0});
            out.AddArc(src, {ea.ilabel, eb.olabel, w, dst});
          }
        }
      } else {
        for (const Arc& eb : barcs) {
          if (eb.ilabel != ea.olabel) continue;
          const Weight w = Times(ea.weight, eb.weight);
          if (w.IsZero()) continue;
          const StateId dst = state_of({ea.nextstate, eb.nextstate, 0});
          out.AddArc(src, {ea.ilabel, eb.olabel, w, dst});
        }
      }
    }
    if (k.filter != 1) {
      for (const Arc& eb : barcs) {
        if (eb.ilabel != kEpsilon) continue;
        const StateId dst = state_of({k.a, eb.nextstate, 2});
        out.AddArc(src, {kEpsilon, eb.olabel, eb.weight, dst});
      }
    }
  }
  return Connect(out);
}

Wfst Invert(const Wfst& a) {
  Wfst out = a;
  for (StateId s = 0; s < out.NumStates(); ++s)
    for (Arc& arc : out.MutableArcs(s)) std::swap(arc.ilabel, arc.olabel);
  out.SetInputSymbols(a.OutputSymbols());
  out.SetOutputSymbols(a.InputSymbols());
  return out;
}

Wfst Project(const Wfst& a, ProjectSide side) {
  Wfst out = a;
  for (StateId s = 0; s < out.NumStates(); ++s) {
    for (Arc& arc : out.MutableArcs(s)) {
      if (side == ProjectSide::kInput) arc.olabel = arc.ilabel;
      else arc.ilabel = arc.olabel;
    }
  }
  const SymbolTablePtr table = side == ProjectSide::kInput ? a.InputSymbols() : a.OutputSymbols();
  out.SetInputSymbols(table);
  out.SetOutputSymbols(table);
  return out;
}

Wfst Connect(const Wfst& a) {
  const StateId n = a.NumStates();
  Wfst out = EmptyLike(a.InputSymbols(), a.OutputSymbols());
  if (a.Empty()) return out;

  std::vector<char> access(n, 0), coaccess(n, 0);
  std::vector<StateId> stack{a.Start()};
  access[a.Start()] = 1;
  while (!stack.empty()) {
    const StateId s = stack.back();
    stack.pop_back();
    for (const Arc& arc : a.Arcs(s)) {
      if (arc.weight.IsZero() || access[arc.nextstate]) continue;
      access[arc.nextstate] = 1;
      stack.push_back(arc.nextstate);
    }
  }
  std::vector<std::vector<StateId>> reverse(n);
  for (StateId s = 0; s < n; ++s)
    for (const Arc& arc : a.Arcs(s))
      if (!arc.weight.IsZero()) reverse[arc.nextstate].push_back(s);
  for (StateId s = 0; s < n; ++s) {
    if (a.IsFinal(s)) {
      coaccess[s] = 1;
      stack.push_back(s);
    }
  }
  while (!stack.empty()) {
    const StateId s = stack.back();
    stack.pop_back();
    for (StateId p : reverse[s]) {
      if (coaccess[p]) continue;
      coaccess[p] = 1;
      stack.push_back(p);
    }
  }
  if (!access[a.Start()] || !coaccess[a.Start()]) return out;

  std::vector<StateId> remap(n, kNoState);
  for (StateId s = 0; s < n; ++s)
    if (access[s] && coaccess[s]) remap[s] = out.AddState();
  for (StateId s = 0; s < n; ++s) {
    if (remap[s] == kNoState) continue;
    out.SetFinal(remap[s], a.Final(s));
    for (const Arc& arc : a.Arcs(s)) {
      if (arc.weight.IsZero() || remap[arc.nextstate] == kNoState) continue;
      out.AddArc(remap[s], {arc.ilabel, arc.olabel, arc.weight, remap[arc.nextstate]});
    }
  }
  out.SetStart(remap[a.Start()]);
  return out;
}

Wfst DiscountWeights(const Wfst& a) {
  Wfst out = a;
  for (StateId s = 0; s < out.NumStates(); ++s) {
    for (Arc& arc : out.MutableArcs(s))
      if (!arc.weight.IsZero()) arc.weight = Weight::One();
    if (out.IsFinal(s)) out.SetFinal(s, Weight::One());
  }
  return out;
}

Wfst ScaleWeights(const Wfst& a, double factor) {
  auto scale = [factor](Weight w) { return w.IsZero() ? w : Weight(w.value() * factor); };
  Wfst out = a;
  for (StateId s = 0; s < out.NumStates(); ++s) {
    for (Arc& arc : out.MutableArcs(s)) arc.weight = scale(arc.weight);
    out.SetFinal(s, scale(out.Final(s)));
  }
  return out;
}

std::vector<Weight> DistanceToFinal(const Wfst& a, Semiring sr) {
  const StateId n = a.NumStates();
  std::vector<Weight> dist(n, Weight::Zero());
  std::vector<StateId> order;
  if (TopologicalOrder(a, &order)) {
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      const StateId s = *it;
      Weight d = a.Final(s);
      for (const Arc& arc : a.Arcs(s)) d = Plus(d, Times(arc.weight, dist[arc.nextstate]), sr);
      dist[s] = d;
    }
    return dist;
  }
  if (sr == Semiring::kLog) throw ContractError("DistanceToFinal: log semiring needs an acyclic machine");

  // Bellman-Ford over reversed arcs.
  std::vector<std::vector<std::pair<StateId, Weight>>> reverse(n);
  for (StateId s = 0; s < n; ++s)
    for (const Arc& arc : a.Arcs(s)) reverse[arc.nextstate].push_back({s, arc.weight});
  std::vector<int> updates(n, 0);
  std::vector<char> queued(n, 0);
  std::queue<StateId> queue;
  for (StateId s = 0; s < n; ++s) {
    dist[s] = a.Final(s);
    if (!dist[s].IsZero()) {
      queue.push(s);
      queued[s] = 1;
    }
  }
  while (!queue.empty()) {
    const StateId t = queue.front();
    queue.pop();
    queued[t] = 0;
    for (const auto& [s, w] : reverse[t]) {
      const Weight cand = Times(w, dist[t]);
      if (cand.value() < dist[s].value()) {
        dist[s] = cand;
        if (++updates[s] > n) throw ContractError("DistanceToFinal: negative-weight cycle");
        if (!queued[s]) {
          queued[s] = 1;
          queue.push(s);
        }
      }
    }
  }
  return dist;
}

namespace {

struct SearchItem {
  double f;
  double g;
  std::vector<Label> prefix;
  StateId state;  // kNoState marks a completed path
};

// Min-heap order: f, then prefix, then completed before open, then state.
struct SearchItemAfter {
  bool operator()(const SearchItem& x, const SearchItem& y) const {
    if (x.f != y.f) return x.f > y.f;
    if (x.prefix != y.prefix) return x.prefix > y.prefix;
    const bool xc = x.state == kNoState, yc = y.state == kNoState;
    if (xc != yc) return yc;
    return x.state > y.state;
  }
};

}  // namespace

std::vector<ScoredSequence> ShortestPath(const Wfst& a, int n) {
  if (n < 1) throw ContractError("ShortestPath: n must be positive");
  if (a.Empty()) throw NoPathError("ShortestPath: empty machine");
  const std::vector<Weight> h = DistanceToFinal(a, Semiring::kTropical);
  if (h[a.Start()].IsZero()) throw NoPathError("ShortestPath: no accepting path");

  std::priority_queue<SearchItem, std::vector<SearchItem>, SearchItemAfter> heap;
  std::set<std::pair<StateId, std::vector<Label>>> expanded;
  std::set<std::vector<Label>> emitted;
  std::vector<ScoredSequence> results;
  heap.push({h[a.Start()].value(), 0.0, {}, a.Start()});
  while (!heap.empty() && static_cast<int>(results.size()) < n) {
    SearchItem item = heap.top();
    heap.pop();
    if (item.state == kNoState) {
      if (emitted.insert(item.prefix).second)
        results.push_back({item.prefix, Weight(item.g)});
      continue;
    }
    if (!expanded.insert({item.state, item.prefix}).second) continue;
    const Weight fin = a.Final(item.state);
    if (!fin.IsZero()) {
      const double total = item.g + fin.value();
      heap.push({total, total, item.prefix, kNoState});
    }
    for (const Arc& arc : a.Arcs(item.state)) {
      if (arc.weight.IsZero() || h[arc.nextstate].IsZero()) continue;
      SearchItem next;
      next.g = item.g + arc.weight.value();
      next.f = next.g + h[arc.nextstate].value();
      next.prefix = item.prefix;
      if (arc.olabel != kEpsilon) next.prefix.push_back(arc.olabel);
      next.state = arc.nextstate;
      heap.push(std::move(next));
    }
  }
  return results;
}

Weight TotalWeight(const Wfst& a, std::span<const Label> input, std::span<const Label> output,
                   Semiring sr, std::optional<int> max_arcs) {
  if (a.Empty()) return Weight::Zero();
  const std::size_t rows = input.size() + 1, cols = output.size() + 1;
  using Grid = std::vector<Weight>;
  auto idx = [cols](std::size_t i, std::size_t j) { return i * cols + j; };

  auto relax = [&](StateId s, const Grid& from, std::vector<Grid>& to) {
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t j = 0; j < cols; ++j) {
        const Weight w0 = from[idx(i, j)];
        if (w0.IsZero()) continue;
        for (const Arc& arc : a.Arcs(s)) {
          std::size_t ni = i, nj = j;
          if (arc.ilabel != kEpsilon) {
            if (i >= input.size() || input[i] != arc.ilabel) continue;
            ++ni;
          }
          if (arc.olabel != kEpsilon) {
            if (j >= output.size() || output[j] != arc.olabel) continue;
            ++nj;
          }
          Grid& dst = to[arc.nextstate];
          dst[idx(ni, nj)] = Plus(dst[idx(ni, nj)], Times(w0, arc.weight), sr);
        }
      }
    }
  };

  const StateId n = a.NumStates();
  std::vector<StateId> order;
  Weight total = Weight::Zero();
  if (TopologicalOrder(a, &order)) {
    std::vector<Grid> alpha(n, Grid(rows * cols, Weight::Zero()));
    alpha[a.Start()][idx(0, 0)] = Weight::One();
    for (StateId s : order) {
      relax(s, alpha[s], alpha);
      total = Plus(total, Times(alpha[s][idx(rows - 1, cols - 1)], a.Final(s)), sr);
    }
    return total;
  }
  if (!max_arcs) throw ContractError("TotalWeight: cyclic machine needs a path length bound");
  std::vector<Grid> layer(n, Grid(rows * cols, Weight::Zero()));
  layer[a.Start()][idx(0, 0)] = Weight::One();
  for (int len = 0; len <= *max_arcs; ++len) {
    for (StateId s = 0; s < n; ++s)
      total = Plus(total, Times(layer[s][idx(rows - 1, cols - 1)], a.Final(s)), sr);
    if (len == *max_arcs) break;
    std::vector<Grid> next(n, Grid(rows * cols, Weight::Zero()));
    for (StateId s = 0; s < n; ++s) relax(s, layer[s], next);
    layer = std::move(next);
  }
  return total;
}

Wfst LinearFst(std::span<const Label> input, std::span<const Label> output, Weight w,
               SymbolTablePtr isyms, SymbolTablePtr osyms) {
  if (input.empty() && output.empty()) throw ContractError("LinearFst: both sequences empty");
  Wfst out(std::move(isyms), std::move(osyms));
  const std::size_t len = std::max(input.size(), output.size());
  out.AddStates(static_cast<StateId>(len + 1));
  out.SetStart(0);
  for (std::size_t i = 0; i < len; ++i) {
    const Label il = i < input.size() ? input[i] : kEpsilon;
    const Label ol = i < output.size() ? output[i] : kEpsilon;
    out.AddArc(static_cast<StateId>(i), {il, ol, Weight::One(), static_cast<StateId>(i + 1)});
  }
  out.SetFinal(static_cast<StateId>(len), w);
  out.Validate();
  return out;
}

}  // namespace ptforge::fst
