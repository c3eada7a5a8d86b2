#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "ptforge/fst/symbol_table.hpp"

namespace ptforge::eval {

enum class EditOp { kMatch, kSubstitution, kDeletion, kInsertion };

// Positions are -1 on the side an operation does not consume.
struct EditStep {
  EditOp op;
  int hyp_pos;
  int ref_pos;
};

struct EditAlignment {
  std::vector<EditStep> steps;  // in sequence order
  std::size_t matches = 0, substitutions = 0, deletions = 0, insertions = 0;
  std::size_t ref_length = 0;

  std::size_t Cost() const { return substitutions + deletions + insertions; }
};

// Minimal unit-cost alignment. Ties prefer match, then substitution, then
// deletion, then insertion, decided from the start of both sequences.
EditAlignment Align(const std::vector<std::string>& hyp, const std::vector<std::string>& ref);
EditAlignment Align(const std::vector<fst::Label>& hyp, const std::vector<fst::Label>& ref);

struct ErrorCounts {
  std::size_t substitutions = 0, deletions = 0, insertions = 0, ref_length = 0;
  std::size_t Errors() const { return substitutions + deletions + insertions; }
};

using Utterance = std::vector<std::string>;
using ScoredPair = std::pair<Utterance, Utterance>;  // (hyp, ref)

// Counts pooled over the corpus.
ErrorCounts PoolErrors(const std::vector<ScoredPair>& corpus);

// 100 * errors / reference length over pooled counts, unrounded. Throws
// DataError when every reference is empty.
double PhoneErrorRateExact(const std::vector<ScoredPair>& corpus);
// The same, rounded to 2 decimals.
double PhoneErrorRate(const std::vector<ScoredPair>& corpus);

// 100 * (baseline - improved) / baseline to 1 decimal. Throws ContractError
// for a baseline <= 0.
double RelativeReduction(double baseline, double improved);

// Half away from zero at `digits` decimals, robust to binary
// representation of decimal ties such as 8.35.
double RoundHalfAway(double x, int digits);

// One utterance per line, space separated; blank lines are empty
// utterances and comment lines are skipped.
std::vector<Utterance> ReadUtterances(std::istream& in);

// Pairs hypotheses and references by line; throws DataError when the
// counts differ.
std::vector<ScoredPair> PairByLine(std::vector<Utterance> hyps, std::vector<Utterance> refs);

struct ScoreRow {
  std::string system;
  double per;
};

// TSV "system<TAB>PER<TAB>rel_reduction" with a header line. The first row
// is the baseline; its reduction column reads "-".
void WriteScoreReport(const std::vector<ScoreRow>& rows, std::ostream& out);

}  // namespace ptforge::eval
