#include "ptforge/lm/bigram.hpp"

#include <cmath>
#include <set>
#include <sstream>

#include "ptforge/error.hpp"
#include "ptforge/util/text.hpp"

namespace ptforge::lm {

using fst::Arc;
using fst::StateId;
using fst::Weight;

std::string SmoothingName(const SmoothingSpec& s) {
  if (s.method == Smoothing::kWittenBell) return "witten-bell";
  return "add-k:" + util::FormatDouble9(s.k);
}

SmoothingSpec ParseSmoothing(const std::string& text) {
  if (text == "witten-bell") return {Smoothing::kWittenBell, 0.0};
  if (text.rfind("add-k:", 0) == 0) {
    const double k = util::ParseDouble(text.substr(6));
    if (k < 0) throw ContractError("add-k needs k >= 0");
    return {Smoothing::kAddK, k};
  }
  throw ContractError("unknown smoothing '" + text + "' (witten-bell | add-k:<k>)");
}

double BigramModel::LogProb(Label context, Label next) const {
  const double p = Prob(context, next);
  return p > 0 ? std::log(p) : -HUGE_VAL;
}

double BigramModel::BigramCount(Label context, Label next) const {
  return bigram_counts_.empty() ? 0.0 : bigram_counts_[Index(context, next)];
}

double BigramModel::ContextCount(Label context) const {
  double total = 0;
  for (Label o = 1; o <= Eos(); ++o) total += BigramCount(context, o);
  return total;
}

double BigramModel::UnigramCount(Label next) const {
  return unigram_counts_.empty() ? 0.0 : unigram_counts_[next - 1];
}

void BigramModel::CheckNormalized(double tolerance) const {
  auto check_row = [tolerance](const double* row, std::size_t n, const std::string& what) {
    double sum = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!(row[i] >= 0.0 && row[i] <= 1.0)) throw ContractError(what + ": probability outside [0,1]");
      sum += row[i];
    }
    if (std::abs(sum - 1.0) > tolerance) throw ContractError(what + ": probabilities sum to " + util::FormatDouble17(sum));
  };
  check_row(unigram_.data(), unigram_.size(), "unigram");
  for (Label c = 0; c < NumContexts(); ++c)
    check_row(bigram_.data() + static_cast<std::size_t>(c) * NumOutcomes(), NumOutcomes(),
              "context " + std::to_string(c));
}

BigramModel BigramModel::FromProbabilities(fst::SymbolTablePtr symbols, std::vector<double> unigram,
                                           std::vector<std::vector<double>> bigram, SmoothingSpec smoothing,
                                           double tolerance) {
  BigramModel m;
  m.symbols_ = std::move(symbols);
  m.smoothing_ = smoothing;
  const auto v = static_cast<std::size_t>(m.symbols_->Size());
  if (unigram.size() != v || bigram.size() != v) throw ContractError("BigramModel: table shape mismatch");
  m.unigram_ = std::move(unigram);
  m.bigram_.reserve(v * v);
  for (auto& row : bigram) {
    if (row.size() != v) throw ContractError("BigramModel: table shape mismatch");
    m.bigram_.insert(m.bigram_.end(), row.begin(), row.end());
  }
  m.CheckNormalized(tolerance);
  return m;
}

BigramModel BigramModel::Uniform(fst::SymbolTablePtr symbols) {
  const auto v = static_cast<std::size_t>(symbols->Size());
  std::vector<double> uni(v, 1.0 / static_cast<double>(v));
  std::vector<std::vector<double>> bi(v, uni);
  return FromProbabilities(std::move(symbols), std::move(uni), std::move(bi), {Smoothing::kAddK, 1.0});
}

BigramModel TrainBigram(const std::vector<std::vector<Label>>& corpus, fst::SymbolTablePtr symbols,
                        SmoothingSpec smoothing) {
  if (corpus.empty()) throw ContractError("TrainBigram: empty corpus");
  BigramModel m;
  m.symbols_ = std::move(symbols);
  m.smoothing_ = smoothing;
  const Label v = m.symbols_->Size();
  const std::size_t nout = static_cast<std::size_t>(v);
  m.unigram_counts_.assign(nout, 0.0);
  m.bigram_counts_.assign(nout * nout, 0.0);
  for (const auto& seq : corpus) {
    if (seq.empty()) throw ContractError("TrainBigram: empty sequence");
    Label prev = BigramModel::kBos;
    for (std::size_t t = 0; t <= seq.size(); ++t) {
      const Label next = t < seq.size() ? seq[t] : m.Eos();
      if (next <= 0 || next > v || (t < seq.size() && next == v))
        throw DataError("TrainBigram: label outside vocabulary: " + std::to_string(next));
      m.bigram_counts_[m.Index(prev, next)] += 1.0;
      m.unigram_counts_[next - 1] += 1.0;
      prev = next;
    }
  }

  double total = 0, types = 0;
  for (double c : m.unigram_counts_) {
    total += c;
    if (c > 0) types += 1;
  }
  const double nv = static_cast<double>(nout);
  m.unigram_.assign(nout, 0.0);
  for (std::size_t o = 0; o < nout; ++o) {
    const double c = m.unigram_counts_[o];
    if (smoothing.method == Smoothing::kWittenBell) m.unigram_[o] = (c + types / nv) / (total + types);
    else m.unigram_[o] = (c + smoothing.k) / (total + smoothing.k * nv);
  }

  m.bigram_.assign(nout * nout, 0.0);
  for (Label ctx = 0; ctx < v; ++ctx) {
    const double* counts = m.bigram_counts_.data() + static_cast<std::size_t>(ctx) * nout;
    double ctx_total = 0, ctx_types = 0;
    for (std::size_t o = 0; o < nout; ++o) {
      ctx_total += counts[o];
      if (counts[o] > 0) ctx_types += 1;
    }
    double* row = m.bigram_.data() + static_cast<std::size_t>(ctx) * nout;
    for (std::size_t o = 0; o < nout; ++o) {
      if (smoothing.method == Smoothing::kWittenBell) {
        row[o] = ctx_total > 0 ? (counts[o] + ctx_types * m.unigram_[o]) / (ctx_total + ctx_types) : m.unigram_[o];
      } else if (ctx_total > 0 || smoothing.k > 0) {
        row[o] = (counts[o] + smoothing.k) / (ctx_total + smoothing.k * nv);
      } else {
        row[o] = m.unigram_counts_[o] / total;  // unseen context, k = 0
      }
    }
  }
  m.CheckNormalized(1e-9);
  return m;
}

BigramModel TrainBigram(const std::vector<std::vector<std::string>>& corpus, fst::SymbolTablePtr symbols,
                        SmoothingSpec smoothing) {
  std::vector<std::vector<Label>> ids;
  std::set<std::string> unknown;
  for (const auto& seq : corpus) {
    std::vector<Label> row;
    for (const auto& s : seq) {
      auto id = symbols->Find(s);
      if (!id || *id == fst::kEpsilon) unknown.insert(s);
      else row.push_back(*id);
    }
    ids.push_back(std::move(row));
  }
  if (!unknown.empty())
    throw DataError("symbols outside vocabulary: " + util::Join({unknown.begin(), unknown.end()}, " "));
  return TrainBigram(ids, std::move(symbols), smoothing);
}

double ScoreSequence(const BigramModel& m, std::span<const Label> seq) {
  double total = 0;
  Label prev = BigramModel::kBos;
  for (Label y : seq) {
    if (y <= 0 || y >= m.Eos()) throw DataError("ScoreSequence: label outside vocabulary: " + std::to_string(y));
    total += m.LogProb(prev, y);
    prev = y;
  }
  return total + m.LogProb(prev, m.Eos());
}

double ScoreSequence(const BigramModel& m, const std::vector<std::string>& seq) {
  std::vector<Label> ids;
  for (const auto& s : seq) {
    auto id = m.Symbols()->Find(s);
    if (!id || *id == fst::kEpsilon) throw DataError("ScoreSequence: unknown symbol '" + s + "'");
    ids.push_back(*id);
  }
  return ScoreSequence(m, ids);
}

fst::Wfst BigramToFsa(const BigramModel& m) {
  fst::Wfst out(m.Symbols(), m.Symbols());
  const Label v = m.Symbols()->Size();
  out.AddStates(v);
  out.SetStart(0);
  for (Label ctx = 0; ctx < v; ++ctx) {
    for (Label y = 1; y < v; ++y) {
      const double p = m.Prob(ctx, y);
      if (p > 0) out.AddArc(ctx, Arc{y, y, Weight(-std::log(p)), y});
    }
    const double pe = m.Prob(ctx, m.Eos());
    out.SetFinal(ctx, pe > 0 ? Weight(-std::log(pe)) : Weight::Zero());
  }
  return out;
}

void WriteModel(const BigramModel& m, std::ostream& out) {
  const auto& t = *m.Symbols();
  auto outcome = [&](Label o) { return o == m.Eos() ? std::string("</s>") : t.Symbol(o); };
  auto context = [&](Label c) { return c == BigramModel::kBos ? std::string("<s>") : t.Symbol(c); };
  out << "\\smoothing\\ " << SmoothingName(m.Smoothing()) << "\n";
  out << "\\vocab\\";
  for (Label i = 1; i < t.Size(); ++i) out << ' ' << t.Symbol(i);
  out << "\n\\data\\\n";
  out << "ngram 1=" << t.Size() << "\n";
  out << "ngram 2=" << static_cast<long>(t.Size()) * t.Size() << "\n\n";
  out << "\\1-grams:\n";
  for (Label o = 1; o <= m.Eos(); ++o) out << util::FormatDouble9(m.UnigramProb(o)) << '\t' << outcome(o) << '\n';
  out << "\n\\2-grams:\n";
  for (Label c = 0; c < m.NumContexts(); ++c)
    for (Label o = 1; o <= m.Eos(); ++o)
      out << util::FormatDouble9(m.Prob(c, o)) << '\t' << context(c) << ' ' << outcome(o) << '\n';
  out << "\n\\end\\\n";
}

BigramModel ReadModel(std::istream& in) {
  const auto lines = util::ReadLines(in);
  SmoothingSpec smoothing;
  fst::SymbolTable table;
  fst::SymbolTablePtr symbols;
  std::vector<double> uni;
  std::vector<std::vector<double>> bi;
  enum { kHeader, kUnigrams, kBigrams, kDone } section = kHeader;
  auto outcome_id = [&](const std::string& s, int lineno) -> Label {
    if (s == "</s>") return symbols->Size();
    auto id = symbols->Find(s);
    if (!id || *id == 0) throw ParseError("unknown symbol '" + s + "'", lineno);
    return *id;
  };
  int lineno = 0;
  for (const auto& raw : lines) {
    ++lineno;
    const std::string line(util::Trim(raw));
    if (line.empty() || util::IsCommentLine(line)) continue;
    if (line.rfind("\\smoothing\\ ", 0) == 0) {
      smoothing = ParseSmoothing(line.substr(12));
    } else if (line.rfind("\\vocab\\", 0) == 0) {
      for (const auto& s : util::SplitWhitespace(line.substr(7))) table.Add(s);
      symbols = fst::MakeTable(table);
      const auto v = static_cast<std::size_t>(symbols->Size());
      uni.assign(v, 0.0);
      bi.assign(v, std::vector<double>(v, 0.0));
    } else if (line == "\\data\\" || line.rfind("ngram ", 0) == 0) {
      continue;
    } else if (line == "\\1-grams:") {
      section = kUnigrams;
    } else if (line == "\\2-grams:") {
      section = kBigrams;
    } else if (line == "\\end\\") {
      section = kDone;
    } else if (section == kUnigrams || section == kBigrams) {
      if (!symbols) throw ParseError("n-grams before \\vocab\\", lineno);
      const auto f = util::SplitWhitespace(line);
      double p = 0;
      try {
        p = util::ParseDouble(f.at(0));
      } catch (const std::exception&) {
        throw ParseError("bad probability", lineno);
      }
      if (section == kUnigrams) {
        if (f.size() != 2) throw ParseError("expected 'prob<TAB>symbol'", lineno);
        uni[outcome_id(f[1], lineno) - 1] = p;
      } else {
        if (f.size() != 3) throw ParseError("expected 'prob<TAB>context next'", lineno);
        const Label c = f[1] == "<s>" ? BigramModel::kBos : outcome_id(f[1], lineno);
        if (c == symbols->Size()) throw ParseError("</s> is not a context", lineno);
        bi[c][outcome_id(f[2], lineno) - 1] = p;
      }
    } else {
      throw ParseError("unexpected line '" + line + "'", lineno);
    }
  }
  if (!symbols) throw DataError("bigram model: missing \\vocab\\ line");
  // Probabilities are kept exactly as printed, so rows sum to one only
  // within the printed precision.
  return BigramModel::FromProbabilities(symbols, std::move(uni), std::move(bi), smoothing, 1e-6);
}

std::vector<std::vector<std::string>> ReadCorpus(std::istream& in) {
  std::vector<std::vector<std::string>> corpus;
  for (const auto& line : util::ReadLines(in)) {
    if (util::IsCommentLine(line)) continue;
    auto toks = util::SplitWhitespace(line);
    if (!toks.empty()) corpus.push_back(std::move(toks));
  }
  return corpus;
}

}  // namespace ptforge::lm
