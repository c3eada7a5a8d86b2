#include "ptforge/fst/text_io.hpp"

#include <sstream>

#include "ptforge/error.hpp"
#include "ptforge/util/text.hpp"

namespace ptforge::fst {

namespace {

void WriteArcs(const Wfst& fst, StateId s, std::ostream& out) {
  for (const Arc& arc : fst.Arcs(s)) {
    out << s << '\t' << arc.nextstate << '\t' << arc.ilabel << '\t' << arc.olabel;
    if (!arc.weight.IsOne()) out << '\t' << FormatWeight(arc.weight);
    out << '\n';
  }
}

void WriteFinal(const Wfst& fst, StateId s, std::ostream& out) {
  out << s;
  if (!fst.Final(s).IsOne()) out << '\t' << FormatWeight(fst.Final(s));
  out << '\n';
}

StateId ParseState(const std::string& s, int lineno) {
  try {
    std::size_t pos = 0;
    const long v = std::stol(s, &pos);
    if (pos != s.size() || v < 0) throw std::invalid_argument(s);
    return static_cast<StateId>(v);
  } catch (const std::exception&) {
    throw ParseError("bad state id '" + s + "'", lineno);
  }
}

Label ParseLabel(const std::string& s, const SymbolTablePtr& table, int lineno) {
  Label id = 0;
  try {
    std::size_t pos = 0;
    id = static_cast<Label>(std::stol(s, &pos));
    if (pos != s.size()) throw std::invalid_argument(s);
  } catch (const std::exception&) {
    throw ParseError("bad label id '" + s + "'", lineno);
  }
  if (id < 0 || (table && !table->Contains(id)))
    throw ParseError("label " + s + " not in symbol table", lineno);
  return id;
}

}  // namespace

void WriteText(const Wfst& fst, std::ostream& out) {
  if (fst.Empty()) return;
  const StateId start = fst.Start();
  const bool start_first_final = fst.Arcs(start).empty();
  if (start_first_final) {
    if (fst.IsFinal(start)) WriteFinal(fst, start, out);
    else out << start << "\tInfinity\n";
  }
  WriteArcs(fst, start, out);
  for (StateId s = 0; s < fst.NumStates(); ++s)
    if (s != start) WriteArcs(fst, s, out);
  if (!start_first_final && fst.IsFinal(start)) WriteFinal(fst, start, out);
  for (StateId s = 0; s < fst.NumStates(); ++s)
    if (s != start && fst.IsFinal(s)) WriteFinal(fst, s, out);
}

Wfst ReadText(std::istream& in, SymbolTablePtr isyms, SymbolTablePtr osyms) {
  Wfst fst(isyms, osyms);
  int lineno = 0;
  bool have_start = false;
  auto ensure = [&fst](StateId s) {
    if (s >= fst.NumStates()) fst.AddStates(s + 1 - fst.NumStates());
  };
  for (const auto& line : util::ReadLines(in)) {
    ++lineno;
    if (util::Trim(line).empty() || util::IsCommentLine(line)) continue;
    const auto f = util::SplitWhitespace(line);
    if (f.size() == 3 || f.size() > 5) throw ParseError("expected 1, 2, 4 or 5 fields", lineno);
    const StateId src = ParseState(f[0], lineno);
    ensure(src);
    if (!have_start) {
      fst.SetStart(src);
      have_start = true;
    }
    if (f.size() <= 2) {
      Weight w = Weight::One();
      if (f.size() == 2) {
        try {
          w = ParseWeight(f[1]);
        } catch (const Error& e) {
          throw ParseError(e.what(), lineno);
        }
      }
      fst.SetFinal(src, w);
      continue;
    }
    const StateId dst = ParseState(f[1], lineno);
    ensure(dst);
    Arc arc;
    arc.ilabel = ParseLabel(f[2], isyms, lineno);
    arc.olabel = ParseLabel(f[3], osyms, lineno);
    arc.nextstate = dst;
    if (f.size() == 5) {
      try {
        arc.weight = ParseWeight(f[4]);
      } catch (const Error& e) {
        throw ParseError(e.what(), lineno);
      }
    }
    fst.AddArc(src, arc);
  }
  return fst;
}

std::string ToText(const Wfst& fst) {
  std::ostringstream out;
  WriteText(fst, out);
  return out.str();
}

Wfst FromText(const std::string& text, SymbolTablePtr isyms, SymbolTablePtr osyms) {
  std::istringstream in(text);
  return ReadText(in, std::move(isyms), std::move(osyms));
}

}  // namespace ptforge::fst
