#pragma once

#include <cstdint>
#include <istream>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace ptforge::fst {

using Label = int32_t;
inline constexpr Label kEpsilon = 0;
inline constexpr std::string_view kEpsilonSymbol = "<eps>";

// Bijection between contiguous ids and UTF-8 strings. Id 0 is always
// "<eps>".
class SymbolTable {
 public:
  SymbolTable();
  explicit SymbolTable(const std::vector<std::string>& symbols);

  // Returns the id of `symbol`, adding it if absent.
  Label Add(std::string_view symbol);

  std::optional<Label> Find(std::string_view symbol) const;
  // Throws DataError naming the symbol when it is absent.
  Label Id(std::string_view symbol) const;
  const std::string& Symbol(Label id) const;

  bool Contains(Label id) const { return id >= 0 && id < Size(); }
  Label Size() const { return static_cast<Label>(symbols_.size()); }
  // Ids of all non-epsilon symbols.
  std::vector<Label> Labels() const;

  std::vector<Label> Ids(const std::vector<std::string>& symbols) const;
  std::vector<std::string> Symbols(const std::vector<Label>& ids) const;

  // "symbol<TAB>id" per line.
  void Write(std::ostream& out) const;
  static SymbolTable Read(std::istream& in);

  friend bool operator==(const SymbolTable& a, const SymbolTable& b) {
    return a.symbols_ == b.symbols_;
  }

 private:
  std::vector<std::string> symbols_;
  std::unordered_map<std::string, Label> ids_;
};

using SymbolTablePtr = std::shared_ptr<const SymbolTable>;

inline SymbolTablePtr MakeTable(SymbolTable table) {
  return std::make_shared<const SymbolTable>(std::move(table));
}

// Pointer-or-content equality.
inline bool SameTable(const SymbolTablePtr& a, const SymbolTablePtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  return *a == *b;
}

}  // namespace ptforge::fst
