#include "ptforge/fst/symbol_table.hpp"

#include "ptforge/error.hpp"
#include "ptforge/util/text.hpp"

namespace ptforge::fst {

SymbolTable::SymbolTable() { Add(kEpsilonSymbol); }

SymbolTable::SymbolTable(const std::vector<std::string>& symbols) : SymbolTable() {
  for (const auto& s : symbols) Add(s);
}

Label SymbolTable::Add(std::string_view symbol) {
  if (symbol.empty()) throw ContractError("SymbolTable: empty symbol");
  auto it = ids_.find(std::string(symbol));
  if (it != ids_.end()) return it->second;
  const Label id = Size();
  symbols_.emplace_back(symbol);
  ids_.emplace(symbols_.back(), id);
  return id;
}

std::optional<Label> SymbolTable::Find(std::string_view symbol) const {
  auto it = ids_.find(std::string(symbol));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

Label SymbolTable::Id(std::string_view symbol) const {
  auto id = Find(symbol);
  if (!id) throw DataError("unknown symbol '" + std::string(symbol) + "'");
  return *id;
}

const std::string& SymbolTable::Symbol(Label id) const {
  if (!Contains(id)) throw ContractError("SymbolTable: id out of range: " + std::to_string(id));
  return symbols_[id];
}

std::vector<Label> SymbolTable::Labels() const {
  std::vector<Label> out;
  for (Label i = 1; i < Size(); ++i) out.push_back(i);
  return out;
}

std::vector<Label> SymbolTable::Ids(const std::vector<std::string>& symbols) const {
  std::vector<Label> out;
  out.reserve(symbols.size());
  for (const auto& s : symbols) out.push_back(Id(s));
  return out;
}

std::vector<std::string> SymbolTable::Symbols(const std::vector<Label>& ids) const {
  std::vector<std::string> out;
  out.reserve(ids.size());
  for (Label id : ids) out.push_back(Symbol(id));
  return out;
}

void SymbolTable::Write(std::ostream& out) const {
  for (Label i = 0; i < Size(); ++i) out << symbols_[i] << '\t' << i << '\n';
}

SymbolTable SymbolTable::Read(std::istream& in) {
  SymbolTable table;
  int lineno = 0;
  for (const auto& line : util::ReadLines(in)) {
    ++lineno;
    if (line.empty() || util::IsCommentLine(line)) continue;
    auto fields = util::Split(line, '\t');
    if (fields.size() != 2) throw ParseError("expected 'symbol<TAB>id'", lineno);
    Label id = 0;
    try {
      id = static_cast<Label>(std::stol(fields[1]));
    } catch (const std::exception&) {
      throw ParseError("bad id '" + fields[1] + "'", lineno);
    }
    if (id == 0) {
      if (fields[0] != kEpsilonSymbol) throw ParseError("id 0 must be <eps>", lineno);
      continue;
    }
    if (id != table.Size()) throw ParseError("ids must be contiguous from 0", lineno);
    if (table.Find(fields[0])) throw ParseError("duplicate symbol '" + fields[0] + "'", lineno);
    table.Add(fields[0]);
  }
  return table;
}

}  // namespace ptforge::fst
