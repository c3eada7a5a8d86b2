#include "context.hpp"

#include <fstream>
#include <sstream>

#include "ptforge/cli/app.hpp"
#include "ptforge/error.hpp"
#include "ptforge/fst/text_io.hpp"
#include "ptforge/util/text.hpp"

namespace ptforge::cli {

namespace {

fs::path Key(const fs::path& p) {
  std::error_code ec;
  auto k = fs::weakly_canonical(p, ec);
  return ec ? fs::absolute(p) : k;
}

}  // namespace

std::string Context::Header() const {
  return "# ptforge " + std::string(Version()) + " " + subcommand_ + " seed=" + std::to_string(seed_);
}

std::string Context::Read(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read '" + path.string() + "'");
  inputs_.insert(Key(path));
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void Context::Write(const fs::path& path, const std::string& body) {
  if (inputs_.count(Key(path))) throw ContractError("refusing to overwrite input file '" + path.string() + "'");
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << Header() << '\n' << body;
  if (!out) throw DataError("failed writing '" + path.string() + "'");
}

void Context::MakeDirectory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create directory '" + dir.string() + "': " + ec.message());
}

fst::SymbolTablePtr Context::ReadSymbols(const fs::path& path) {
  std::istringstream in(Read(path));
  return fst::MakeTable(fst::SymbolTable::Read(in));
}

void Context::WriteSymbols(const fs::path& path, const fst::SymbolTable& table) {
  std::ostringstream out;
  table.Write(out);
  Write(path, out.str());
}

LatticeSet ReadLatticeSet(Context& ctx, const fs::path& dir) {
  LatticeSet set;
  set.phones = ctx.ReadSymbols(dir / "phones.syms");
  std::istringstream index(ctx.Read(dir / "index.txt"));
  for (const auto& line : util::ReadLines(index)) {
    const std::string id(util::Trim(line));
    if (id.empty() || util::IsCommentLine(line)) continue;
    set.ids.push_back(id);
  }
  for (const auto& id : set.ids) {
    std::istringstream in(ctx.Read(dir / (id + ".fst")));
    set.lattices.emplace_back(fst::ReadText(in, set.phones, set.phones), true);
  }
  return set;
}

void WriteLatticeSet(Context& ctx, const fs::path& dir, const fst::SymbolTable& phones,
                     const std::vector<std::string>& ids, const std::vector<const fst::Wfst*>& fsts,
                     const std::vector<std::vector<std::string>>& best) {
  ctx.MakeDirectory(dir);
  ctx.WriteSymbols(dir / "phones.syms", phones);
  std::string index, hyps;
  for (std::size_t k = 0; k < ids.size(); ++k) {
    index += ids[k] + "\n";
    hyps += util::Join(best[k], " ") + "\n";
    ctx.Write(dir / (ids[k] + ".fst"), fst::ToText(*fsts[k]));
  }
  ctx.Write(dir / "index.txt", index);
  ctx.Write(dir / "best.txt", hyps);
}

}  // namespace ptforge::cli
