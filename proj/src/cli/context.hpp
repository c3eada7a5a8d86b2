#pragma once

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "ptforge/channel/pt_lattice.hpp"
#include "ptforge/fst/symbol_table.hpp"

namespace ptforge::cli {

namespace fs = std::filesystem;

// Per-invocation state shared by the subcommand adapters.
class Context {
 public:
  Context(std::string subcommand, uint64_t seed, int threads, std::ostream& out, std::ostream& err)
      : subcommand_(std::move(subcommand)), seed_(seed), threads_(threads), out_(out), err_(err) {}

  const std::string& Subcommand() const { return subcommand_; }
  uint64_t Seed() const { return seed_; }
  int Threads() const { return threads_; }
  std::ostream& Out() { return out_; }
  std::ostream& Err() { return err_; }

  // "# ptforge <version> <subcommand> seed=<n>"
  std::string Header() const;

  // Reads a whole file, remembering it as an input. Throws DataError when
  // it cannot be read.
  std::string Read(const fs::path& path);
  // Writes header plus body. Refuses to overwrite a file this invocation
  // read (ContractError).
  void Write(const fs::path& path, const std::string& body);
  void MakeDirectory(const fs::path& dir);

  fst::SymbolTablePtr ReadSymbols(const fs::path& path);
  void WriteSymbols(const fs::path& path, const fst::SymbolTable& table);

 private:
  std::string subcommand_;
  uint64_t seed_;
  int threads_;
  std::ostream& out_;
  std::ostream& err_;
  std::set<fs::path> inputs_;
};

// A directory of per-utterance lattices: phones.syms, index.txt (ids in
// order), <id>.fst, and best.txt with one 1-best phone string per line.
struct LatticeSet {
  fst::SymbolTablePtr phones;
  std::vector<std::string> ids;
  std::vector<channel::PtLattice> lattices;
};

LatticeSet ReadLatticeSet(Context& ctx, const fs::path& dir);
// `best` holds the 1-best phone strings aligned with `ids`.
void WriteLatticeSet(Context& ctx, const fs::path& dir, const fst::SymbolTable& phones,
                     const std::vector<std::string>& ids, const std::vector<const fst::Wfst*>& fsts,
                     const std::vector<std::vector<std::string>>& best);

}  // namespace ptforge::cli
