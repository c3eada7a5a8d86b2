#pragma once

#include <optional>
#include <span>
#include <vector>

#include "ptforge/fst/wfst.hpp"

namespace ptforge::fst {

// Epsilon-free output label sequence with its weight.
struct ScoredSequence {
  std::vector<Label> labels;
  Weight weight;
};

enum class ProjectSide { kInput, kOutput };

// Composition with the three-state epsilon filter, followed by Connect.
// Requires a's output table to equal b's input table.
Wfst Compose(const Wfst& a, const Wfst& b);

Wfst Invert(const Wfst& a);

Wfst Project(const Wfst& a, ProjectSide side);

// Removes states that are not both accessible and coaccessible. State order
// is preserved; an empty result has no states.
Wfst Connect(const Wfst& a);

// Maps every non-Zero arc and final weight to One (x^0 = 1, 0^0 = 0).
Wfst DiscountWeights(const Wfst& a);

// Multiplies every non-Zero weight value by `factor` (factor -1 turns
// probabilities p into 1/p).
Wfst ScaleWeights(const Wfst& a, double factor);

// The n best distinct output sequences under the tropical semiring,
// ascending by weight with ties broken lexicographically on label ids.
// Throws NoPathError when the machine accepts nothing. Negative arc
// weights are allowed as long as no cycle has negative total weight.
std::vector<ScoredSequence> ShortestPath(const Wfst& a, int n);

// The output string with the smallest log-semiring total over all paths
// that emit it. Exact A* over weighted state subsets, so the machine must
// be acyclic. Throws NoPathError when it accepts nothing.
ScoredSequence ShortestStringLog(const Wfst& a);

// Plus-sum over accepting paths labeled (input, output). Cyclic machines
// require `max_arcs`, the longest path considered.
Weight TotalWeight(const Wfst& a, std::span<const Label> input,
                   std::span<const Label> output, Semiring sr,
                   std::optional<int> max_arcs = std::nullopt);

// Single-path machine for the pair; the shorter side is padded with
// epsilons at the end and `w` sits on the final state.
Wfst LinearFst(std::span<const Label> input, std::span<const Label> output, Weight w,
               SymbolTablePtr isyms, SymbolTablePtr osyms);

// Per-state distance to the final states (Zero when none is reachable).
// The tropical variant tolerates negative arcs but throws ContractError on
// a negative cycle; the log variant requires an acyclic machine.
std::vector<Weight> DistanceToFinal(const Wfst& a, Semiring sr);

}  // namespace ptforge::fst
