#pragma once

// Test-only brute-force oracles. Nothing here calls into the library's
// algorithms beyond reading machine structure.

#include <cmath>
#include <functional>
#include <algorithm>
#include <map>
#include <random>
#include <utility>
#include <vector>

#include "ptforge/fst/wfst.hpp"

namespace ptforge::testing {

using fst::Label;
using fst::StateId;
using LabelSeq = std::vector<Label>;
using PairKey = std::pair<LabelSeq, LabelSeq>;

struct PathRecord {
  LabelSeq input;
  LabelSeq output;
  double weight;  // arc values summed in path order, then the final weight
};

// Every accepting path with at most `max_arcs` arcs.
inline std::vector<PathRecord> EnumeratePaths(const fst::Wfst& m, int max_arcs) {
  std::vector<PathRecord> out;
  if (m.Empty()) return out;
  LabelSeq in, outl;
  std::function<void(StateId, double, int)> walk = [&](StateId s, double w, int depth) {
    if (m.IsFinal(s)) out.push_back({in, outl, w + m.Final(s).value()});
    if (depth == max_arcs) return;
    for (const auto& arc : m.Arcs(s)) {
      if (arc.weight.IsZero()) continue;
      if (arc.ilabel != fst::kEpsilon) in.push_back(arc.ilabel);
      if (arc.olabel != fst::kEpsilon) outl.push_back(arc.olabel);
      walk(arc.nextstate, w + arc.weight.value(), depth + 1);
      if (arc.ilabel != fst::kEpsilon) in.pop_back();
      if (arc.olabel != fst::kEpsilon) outl.pop_back();
    }
  };
  walk(m.Start(), 0.0, 0);
  return out;
}

inline double LogAdd(double a, double b) {
  if (std::isinf(a) && a > 0) return b;
  if (std::isinf(b) && b > 0) return a;
  // direct form, independent of the library's stable variant
  return -std::log(std::exp(-a) + std::exp(-b));
}

// Log-semiring relation: (input, output) -> -log(sum of path probabilities).
inline std::map<PairKey, double> LogRelation(const fst::Wfst& m, int max_arcs) {
  std::map<PairKey, double> rel;
  for (const auto& p : EnumeratePaths(m, max_arcs)) {
    auto key = PairKey{p.input, p.output};
    auto it = rel.find(key);
    if (it == rel.end()) rel.emplace(key, p.weight);
    else it->second = LogAdd(it->second, p.weight);
  }
  return rel;
}

// Composition by definition: sum over intermediate strings y of A(x,y)B(y,z).
inline std::map<PairKey, double> ComposeRelations(const std::map<PairKey, double>& a,
                                                  const std::map<PairKey, double>& b) {
  std::map<PairKey, double> out;
  for (const auto& [ka, wa] : a) {
    for (const auto& [kb, wb] : b) {
      if (ka.second != kb.first) continue;
      PairKey key{ka.first, kb.second};
      const double w = wa + wb;
      auto it = out.find(key);
      if (it == out.end()) out.emplace(key, w);
      else it->second = LogAdd(it->second, w);
    }
  }
  return out;
}

// Best (minimum) weight per output string, tropical.
inline std::map<LabelSeq, double> BestPerOutput(const fst::Wfst& m, int max_arcs) {
  std::map<LabelSeq, double> best;
  for (const auto& p : EnumeratePaths(m, max_arcs)) {
    auto it = best.find(p.output);
    if (it == best.end() || p.weight < it->second) best[p.output] = p.weight;
  }
  return best;
}

// Sorted (weight, sequence) list, ascending; ties lexicographic.
inline std::vector<std::pair<double, LabelSeq>> RankOutputs(const fst::Wfst& m, int max_arcs) {
  std::vector<std::pair<double, LabelSeq>> ranked;
  for (const auto& [seq, w] : BestPerOutput(m, max_arcs)) ranked.push_back({w, seq});
  std::sort(ranked.begin(), ranked.end());
  return ranked;
}

// Random acyclic machine: arcs only go from lower to higher state ids, so
// every path has at most num_states - 1 arcs.
inline fst::Wfst RandomAcyclic(std::mt19937_64& rng, fst::SymbolTablePtr isyms,
                               fst::SymbolTablePtr osyms, int max_states, int max_arcs,
                               double epsilon_rate, bool acceptor = false) {
  std::uniform_int_distribution<int> nstates_d(2, max_states);
  const int n = nstates_d(rng);
  fst::Wfst m(isyms, osyms);
  m.AddStates(n);
  m.SetStart(0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_real_distribution<double> wd(0.05, 2.5);
  std::uniform_int_distribution<int> narcs_d(1, max_arcs);
  const int narcs = narcs_d(rng);
  for (int k = 0; k < narcs; ++k) {
    std::uniform_int_distribution<int> src_d(0, n - 2);
    const int src = src_d(rng);
    std::uniform_int_distribution<int> dst_d(src + 1, n - 1);
    const int dst = dst_d(rng);
    auto pick = [&](const fst::SymbolTablePtr& t) -> Label {
      if (u(rng) < epsilon_rate) return fst::kEpsilon;
      std::uniform_int_distribution<Label> ld(1, t->Size() - 1);
      return ld(rng);
    };
    const Label il = pick(isyms);
    const Label ol = acceptor ? il : pick(osyms);
    m.AddArc(src, {il, ol, fst::Weight(wd(rng)), dst});
  }
  m.SetFinal(n - 1, fst::Weight(wd(rng)));
  if (u(rng) < 0.5) m.SetFinal(std::uniform_int_distribution<int>(0, n - 2)(rng), fst::Weight(wd(rng)));
  return m;
}

}  // namespace ptforge::testing
