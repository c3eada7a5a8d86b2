#include "ptforge/eval/score.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "ptforge/error.hpp"
#include "ptforge/util/text.hpp"

namespace ptforge::eval {

namespace {

template <class T>
EditAlignment AlignImpl(const std::vector<T>& hyp, const std::vector<T>& ref) {
  const std::size_t n = hyp.size(), m = ref.size();
  // cost[i][j]: hyp[i..) against ref[j..), so the backtrace runs forward and
  // tie preferences apply from the start of the sequences.
  std::vector<std::vector<std::size_t>> cost(n + 1, std::vector<std::size_t>(m + 1));
  for (std::size_t i = n + 1; i-- > 0;) {
    for (std::size_t j = m + 1; j-- > 0;) {
      if (i == n || j == m) {
        cost[i][j] = (n - i) + (m - j);
        continue;
      }
      cost[i][j] = std::min({cost[i + 1][j + 1] + (hyp[i] == ref[j] ? 0 : 1), cost[i][j + 1] + 1,
                             cost[i + 1][j] + 1});
    }
  }
  EditAlignment a;
  a.ref_length = m;
  std::size_t i = 0, j = 0;
  while (i < n || j < m) {
    const int hi = static_cast<int>(i), rj = static_cast<int>(j);
    if (i < n && j < m && hyp[i] == ref[j] && cost[i][j] == cost[i + 1][j + 1]) {
      a.steps.push_back({EditOp::kMatch, hi, rj});
      ++a.matches, ++i, ++j;
    } else if (i < n && j < m && cost[i][j] == cost[i + 1][j + 1] + 1) {
      a.steps.push_back({EditOp::kSubstitution, hi, rj});
      ++a.substitutions, ++i, ++j;
    } else if (j < m && cost[i][j] == cost[i][j + 1] + 1) {
      a.steps.push_back({EditOp::kDeletion, -1, rj});
      ++a.deletions, ++j;
    } else {
      a.steps.push_back({EditOp::kInsertion, hi, -1});
      ++a.insertions, ++i;
    }
  }
  return a;
}

}  // namespace

EditAlignment Align(const std::vector<std::string>& hyp, const std::vector<std::string>& ref) {
  return AlignImpl(hyp, ref);
}

EditAlignment Align(const std::vector<fst::Label>& hyp, const std::vector<fst::Label>& ref) {
  return AlignImpl(hyp, ref);
}

ErrorCounts PoolErrors(const std::vector<ScoredPair>& corpus) {
  ErrorCounts c;
  for (const auto& [hyp, ref] : corpus) {
    const auto a = Align(hyp, ref);
    c.substitutions += a.substitutions;
    c.deletions += a.deletions;
    c.insertions += a.insertions;
    c.ref_length += a.ref_length;
  }
  return c;
}

double PhoneErrorRateExact(const std::vector<ScoredPair>& corpus) {
  const auto c = PoolErrors(corpus);
  if (c.ref_length == 0) throw DataError("phone error rate undefined: every reference is empty");
  return 100.0 * static_cast<double>(c.Errors()) / static_cast<double>(c.ref_length);
}

double PhoneErrorRate(const std::vector<ScoredPair>& corpus) {
  return RoundHalfAway(PhoneErrorRateExact(corpus), 2);
}

double RelativeReduction(double baseline, double improved) {
  if (!(baseline > 0)) throw ContractError("relative reduction needs a positive baseline");
  return RoundHalfAway(100.0 * (baseline - improved) / baseline, 1);
}

double RoundHalfAway(double x, int digits) {
  const double scale = std::pow(10.0, digits);
  const double scaled = std::abs(x) * scale;
  // Values within a few ulps of a tie count as the tie.
  const double r = std::floor(scaled + 0.5 + 1e-9 * std::max(1.0, scaled));
  return std::copysign(r / scale, x);
}

std::vector<Utterance> ReadUtterances(std::istream& in) {
  std::vector<Utterance> out;
  for (const auto& line : util::ReadLines(in))
    if (!util::IsCommentLine(line)) out.push_back(util::SplitWhitespace(line));
  return out;
}

std::vector<ScoredPair> PairByLine(std::vector<Utterance> hyps, std::vector<Utterance> refs) {
  if (hyps.size() != refs.size())
    throw DataError("hypothesis file has " + std::to_string(hyps.size()) + " lines, reference file has " +
                    std::to_string(refs.size()));
  std::vector<ScoredPair> out;
  for (std::size_t k = 0; k < hyps.size(); ++k) out.emplace_back(std::move(hyps[k]), std::move(refs[k]));
  return out;
}

void WriteScoreReport(const std::vector<ScoreRow>& rows, std::ostream& out) {
  out << "system\tPER\trel_reduction\n";
  char buf[64];
  for (std::size_t k = 0; k < rows.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.2f", RoundHalfAway(rows[k].per, 2));
    out << rows[k].system << '\t' << buf << '\t';
    if (k == 0) {
      out << "-\n";
    } else {
      std::snprintf(buf, sizeof buf, "%.1f", RelativeReduction(rows[0].per, rows[k].per));
      out << buf << '\n';
    }
  }
}

}  // namespace ptforge::eval
