#include "commands.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "ptforge/channel/channel_model.hpp"
#include "ptforge/channel/decode.hpp"
#include "ptforge/channel/transcripts.hpp"
#include "ptforge/constraints/constrain.hpp"
#include "ptforge/error.hpp"
#include "ptforge/eval/score.hpp"
#include "ptforge/fst/ops.hpp"
#include "ptforge/fst/text_io.hpp"
#include "ptforge/lm/bigram.hpp"
#include "ptforge/lm/words_to_phones.hpp"
#include "ptforge/seq2seq/decode.hpp"
#include "ptforge/seq2seq/train.hpp"
#include "ptforge/util/text.hpp"

namespace ptforge::cli {

namespace {

using fst::Label;

std::istringstream Stream(Context& ctx, const std::string& path) { return std::istringstream(ctx.Read(path)); }

void Require(const std::string& value, const char* flag) {
  if (value.empty()) throw ContractError(std::string("missing required option --") + flag);
}

std::vector<std::string> Spell(const fst::SymbolTable& t, const std::vector<Label>& ids) { return t.Symbols(ids); }

lm::BigramModel ReadLm(Context& ctx, const std::string& path) {
  auto in = Stream(ctx, path);
  return lm::ReadModel(in);
}

std::vector<std::string> Words(Context& ctx, const std::string& path) {
  auto in = Stream(ctx, path);
  return constraints::ReadWordList(in);
}

void AddChars(std::set<std::string>& out, const std::string& word) {
  for (auto& c : util::Utf8Chars(word))
    if (c != " ") out.insert(c);
}

// Letter table over the non-space characters of every transcript.
fst::SymbolTablePtr TranscriptTable(const std::vector<channel::TranscriptBundle>& bundles) {
  std::set<std::string> chars;
  for (const auto& b : bundles)
    for (const auto& t : b.transcripts)
      for (auto& c : util::Utf8Chars(t))
        if (!util::Trim(c).empty()) chars.insert(c);
  return fst::MakeTable(fst::SymbolTable({chars.begin(), chars.end()}));
}

fst::SymbolTablePtr TableOrDefault(Context& ctx, const std::string& path, fst::SymbolTablePtr fallback) {
  return path.empty() ? std::move(fallback) : ctx.ReadSymbols(path);
}

std::vector<seq2seq::RawPair> Pairs(Context& ctx, const std::string& path) {
  auto in = Stream(ctx, path);
  return seq2seq::ReadPairs(in);
}

seq2seq::Seq2SeqParams ReadModel(Context& ctx, const std::string& path) {
  auto in = Stream(ctx, path);
  return seq2seq::ReadCheckpoint(in);
}

std::string History(const std::vector<seq2seq::EpochRecord>& history) {
  std::string s = "epoch\tlr\ttrain_loss\tdev_loss\n";
  for (const auto& h : history)
    s += std::to_string(h.epoch) + "\t" + util::FormatDouble9(h.lr) + "\t" + util::FormatDouble9(h.train_loss) +
         "\t" + util::FormatDouble9(h.dev_loss) + "\n";
  return s;
}

}  // namespace

void RunMerge(Context& ctx, const MergeArgs& a) {
  Require(a.transcripts, "transcripts");
  Require(a.out, "out");
  auto in = Stream(ctx, a.transcripts);
  const auto bundles = channel::ReadBundles(in);
  const auto letters = TableOrDefault(ctx, a.letters, TranscriptTable(bundles));
  ctx.MakeDirectory(a.out);
  const fs::path dir(a.out);
  ctx.WriteSymbols(dir / "letters.syms", *letters);
  std::string index;
  for (const auto& b : bundles) {
    const auto cn = channel::MergeTranscripts(b, letters, a.prune_mass);
    ctx.Write(dir / (b.id + ".fst"), fst::ToText(channel::ConfnetToFst(cn)));
    index += b.id + "\n";
    ctx.Out() << b.id << "\tslots=" << cn.slots.size() << "\n";
  }
  ctx.Write(dir / "index.txt", index);
}

void RunTrainChannel(Context& ctx, const TrainChannelArgs& a) {
  Require(a.pairs, "pairs");
  Require(a.out, "out");
  const auto raw = Pairs(ctx, a.pairs);
  const auto phones = TableOrDefault(ctx, a.phones, seq2seq::PhoneTable(raw));
  const auto letters = TableOrDefault(ctx, a.letters, seq2seq::LetterTable(raw));
  std::vector<channel::AlignedPair> pairs;
  for (const auto& ex : seq2seq::ToExamples(raw, *letters, *phones)) pairs.push_back({ex.phones, ex.letters});
  channel::EmOptions opts;
  opts.iterations = a.iterations;
  opts.max_chunk = a.max_chunk;
  opts.seed = ctx.Seed();
  opts.threads = ctx.Threads();
  const auto result = channel::TrainChannelEm(pairs, phones, letters, opts);
  std::ostringstream body;
  channel::WriteChannel(a.min_prob > 0 ? channel::PruneChannel(result.model, a.min_prob) : result.model, body);
  ctx.Write(a.out, body.str());
  ctx.WriteSymbols(a.out + ".phones.syms", *phones);
  ctx.WriteSymbols(a.out + ".letters.syms", *letters);
  ctx.Out() << "iteration\tlog_likelihood\n";
  for (std::size_t k = 0; k < result.log_likelihood.size(); ++k)
    ctx.Out() << k + 1 << '\t' << util::FormatDouble17(result.log_likelihood[k]) << '\n';
}

void RunDecodePt(Context& ctx, const DecodeArgs& a) {
  Require(a.transcripts, "transcripts");
  Require(a.channel, "channel");
  Require(a.phone_lm, "phone-lm");
  Require(a.out, "out");
  const auto semiring = fst::ParseSemiring(a.semiring);
  const auto phones = ctx.ReadSymbols(a.channel_phones.empty() ? a.channel + ".phones.syms" : a.channel_phones);
  const auto letters = ctx.ReadSymbols(a.channel_letters.empty() ? a.channel + ".letters.syms" : a.channel_letters);
  auto chan_in = Stream(ctx, a.channel);
  const auto channel = channel::ReadChannel(chan_in, phones, letters);
  const auto phone_lm = ReadLm(ctx, a.phone_lm);
  std::optional<lm::BigramModel> letter_lm;
  if (!a.letter_lm.empty()) letter_lm = ReadLm(ctx, a.letter_lm);
  auto in = Stream(ctx, a.transcripts);
  const auto bundles = channel::ReadBundles(in);

  channel::DecodeOptions opts;
  opts.max_phones = a.max_phones;
  std::vector<std::string> ids;
  std::vector<channel::PtLattice> lattices;
  std::vector<std::vector<std::string>> best;
  for (const auto& b : bundles) {
    const auto cn = channel::MergeTranscripts(b, letters, a.prune_mass);
    lattices.push_back(channel::DecodePt(cn, channel, letter_lm ? &*letter_lm : nullptr, phone_lm, opts));
    best.push_back(Spell(*phones, channel::BestPathPt(lattices.back(), semiring).labels));
    ids.push_back(b.id);
    ctx.Out() << b.id << '\t' << util::Join(best.back(), " ") << '\n';
  }
  std::vector<const fst::Wfst*> fsts;
  for (const auto& l : lattices) fsts.push_back(&l.Fst());
  WriteLatticeSet(ctx, a.out, *phones, ids, fsts, best);
}

void RunConstrain(Context& ctx, const ConstrainArgs& a) {
  Require(a.lattices, "lattices");
  Require(a.constraint, "constraint");
  Require(a.out, "out");
  if (a.on_empty != "error" && a.on_empty != "keep") throw ContractError("--on-empty must be 'error' or 'keep'");
  const auto variant = constraints::ParseVariant(a.constraint);
  const auto semiring = fst::ParseSemiring(a.semiring);
  const LatticeSet set = ReadLatticeSet(ctx, a.lattices);

  // Vocabulary sources extend the grapheme table so every word can be
  // spelled or reported as excluded.
  std::vector<std::string> words;
  if (!a.words.empty()) words = Words(ctx, a.words);
  constraints::PronDict dict;
  if (!a.dict.empty()) {
    auto in = Stream(ctx, a.dict);
    dict = constraints::ReadPronDict(in, *set.phones);
  }
  std::optional<lm::BigramModel> word_lm;
  if (!a.word_lm.empty()) word_lm = ReadLm(ctx, a.word_lm);
  std::set<std::string> chars;
  for (const auto& w : words) AddChars(chars, w);
  for (const auto& [w, p] : dict) AddChars(chars, w);
  if (word_lm)
    for (Label l : word_lm->Symbols()->Labels()) AddChars(chars, word_lm->Symbols()->Symbol(l));

  std::optional<constraints::G2PRuleSet> rules;
  if (!a.rules.empty()) {
    auto in = Stream(ctx, a.rules);
    rules = constraints::ParseG2PRules(in, set.phones, {chars.begin(), chars.end()});
  }
  auto need = [&](bool ok, const char* what) {
    if (!ok) throw ContractError(std::string("--constraint ") + a.constraint + " needs " + what);
  };
  auto report = [&](const constraints::BuildReport& r) {
    for (const auto& w : r.excluded) ctx.Err() << "excluded word: " << w << '\n';
  };

  constraints::PhoneInventory inventory;
  std::optional<fst::Wfst> lexicon, lm;
  bool discount = true;
  switch (variant) {
    case constraints::Variant::kInventory:
      if (!a.inventory.empty()) {
        auto in = Stream(ctx, a.inventory);
        std::vector<std::string> syms;
        for (const auto& line : util::ReadLines(in))
          if (!util::IsCommentLine(line))
            for (auto& s : util::SplitWhitespace(line)) syms.push_back(s);
        inventory = constraints::ParseInventory(syms, *set.phones);
      } else {
        need(rules.has_value(), "--inventory or --rules");
        inventory = constraints::InventoryFromRules(*rules);
      }
      break;
    case constraints::Variant::kG2P: {
      need(rules && !words.empty(), "--rules and --words");
      lexicon = constraints::G2pToFst(*rules);
      auto built = constraints::BuildWordLm(words, rules->Graphemes());
      report(built);
      lm = std::move(built.fst);
      break;
    }
    case constraints::Variant::kG2PDict: {
      need(rules && !dict.empty() && !words.empty(), "--rules, --dict and --words");
      auto lex = constraints::BuildDictFst(dict, *rules, words);
      report(lex);
      lexicon = std::move(lex.fst);
      std::vector<std::string> vocab = words;
      for (const auto& [w, p] : dict)
        if (std::find(vocab.begin(), vocab.end(), w) == vocab.end()) vocab.push_back(w);
      auto built = constraints::BuildWordLm(vocab, rules->Graphemes());
      report(built);
      lm = std::move(built.fst);
      break;
    }
    case constraints::Variant::kWlm: {
      need(rules && word_lm, "--rules and --word-lm");
      if (dict.empty()) {
        lexicon = constraints::G2pToFst(*rules);
      } else {
        std::vector<std::string> vocab;
        for (Label l : word_lm->Symbols()->Labels()) vocab.push_back(word_lm->Symbols()->Symbol(l));
        auto lex = constraints::BuildDictFst(dict, *rules, vocab);
        report(lex);
        lexicon = std::move(lex.fst);
      }
      auto built = constraints::WordBigramToGraphemeFsa(*word_lm, rules->Graphemes());
      report(built);
      lm = std::move(built.fst);
      discount = false;
      break;
    }
  }

  std::vector<channel::PtLattice> out;
  std::vector<std::vector<std::string>> best;
  for (std::size_t k = 0; k < set.ids.size(); ++k) {
    const auto& pt = set.lattices[k];
    try {
      out.push_back(variant == constraints::Variant::kInventory
                        ? constraints::ConstrainPhonemeInventory(pt, inventory)
                        : constraints::ConstrainLexicon(pt, *lexicon, *lm, discount));
      ctx.Out() << set.ids[k] << "\tconstrained\n";
    } catch (const EmptyLatticeError& e) {
      if (a.on_empty == "error") throw EmptyLatticeError(set.ids[k] + ": " + e.what());
      ctx.Err() << set.ids[k] << ": " << e.what() << "; keeping the unconstrained lattice\n";
      ctx.Out() << set.ids[k] << "\tkept\n";
      out.push_back(pt);
    }
    best.push_back(Spell(*set.phones, channel::BestPathPt(out.back(), semiring).labels));
  }
  std::vector<const fst::Wfst*> fsts;
  for (const auto& l : out) fsts.push_back(&l.Fst());
  WriteLatticeSet(ctx, a.out, *set.phones, set.ids, fsts, best);
}

void RunLmTrain(Context& ctx, const LmTrainArgs& a) {
  Require(a.corpus, "corpus");
  Require(a.out, "out");
  const auto smoothing = lm::ParseSmoothing(a.smoothing);
  auto in = Stream(ctx, a.corpus);
  const auto corpus = lm::ReadCorpus(in);
  lm::BigramModel model;
  if (!a.rules.empty()) {
    // Word corpus mapped to phones through dictionary and rules.
    Require(a.symbols, "symbols");
    const auto phones = ctx.ReadSymbols(a.symbols);
    std::set<std::string> chars;
    for (const auto& s : corpus)
      for (const auto& w : s) AddChars(chars, w);
    auto rin = Stream(ctx, a.rules);
    const auto rules = constraints::ParseG2PRules(rin, phones, {chars.begin(), chars.end()});
    constraints::PronDict dict;
    if (!a.dict.empty()) {
      auto din = Stream(ctx, a.dict);
      dict = constraints::ReadPronDict(din, *phones);
    }
    model = lm::TrainBigram(lm::WordsToPhones(corpus, dict, rules), phones, smoothing);
  } else {
    fst::SymbolTablePtr table;
    if (!a.symbols.empty()) {
      table = ctx.ReadSymbols(a.symbols);
    } else {
      std::set<std::string> syms;
      for (const auto& s : corpus) syms.insert(s.begin(), s.end());
      table = fst::MakeTable(fst::SymbolTable({syms.begin(), syms.end()}));
    }
    model = lm::TrainBigram(corpus, table, smoothing);
  }
  std::ostringstream body;
  lm::WriteModel(model, body);
  ctx.Write(a.out, body.str());
  ctx.Out() << "sequences\t" << corpus.size() << "\nvocabulary\t" << model.Symbols()->Size() - 1 << '\n';
}

void RunG2pCompile(Context& ctx, const G2pCompileArgs& a) {
  Require(a.rules, "rules");
  Require(a.phones, "phones");
  Require(a.out, "out");
  const auto phones = ctx.ReadSymbols(a.phones);
  std::set<std::string> chars;
  if (!a.words.empty())
    for (const auto& w : Words(ctx, a.words)) AddChars(chars, w);
  auto in = Stream(ctx, a.rules);
  const auto rules = constraints::ParseG2PRules(in, phones, {chars.begin(), chars.end()});
  const auto m = constraints::G2pToFst(rules);
  ctx.Write(a.out, fst::ToText(m));
  ctx.WriteSymbols(a.out + ".graphemes.syms", *rules.Graphemes());
  ctx.WriteSymbols(a.out + ".phones.syms", *phones);
  ctx.Out() << "rules\t" << rules.NumRules() << "\nstates\t" << m.NumStates() << '\n';
}

void RunSeq2SeqTrain(Context& ctx, const Seq2SeqTrainArgs& a) {
  Require(a.train, "train");
  Require(a.dev, "dev");
  Require(a.out, "out");
  const auto train = Pairs(ctx, a.train), dev = Pairs(ctx, a.dev);
  std::vector<seq2seq::RawPair> all = train;
  all.insert(all.end(), dev.begin(), dev.end());
  const auto letters = seq2seq::LetterTable(all), phones = seq2seq::PhoneTable(all);
  seq2seq::TrainingConfig cfg;
  cfg.lr = a.lr;
  cfg.lr_late = a.lr_late;
  cfg.lr_switch_epoch = a.lr_switch;
  cfg.batch = a.batch;
  cfg.init_range = a.init_range;
  cfg.tolerance = a.tolerance;
  cfg.max_epochs = a.epochs;
  cfg.clip_norm = a.clip;
  cfg.seed = ctx.Seed();
  cfg.threads = ctx.Threads();
  auto init = seq2seq::InitParams(letters, phones, {a.hidden, a.layers}, cfg.seed, cfg.init_range);
  const auto result = seq2seq::Train(std::move(init), seq2seq::ToExamples(train, *letters, *phones),
                                     seq2seq::ToExamples(dev, *letters, *phones), cfg);
  std::ostringstream body;
  seq2seq::WriteCheckpoint(result.params, body);
  ctx.Write(a.out, body.str());
  ctx.Out() << History(result.history) << "converged\t" << (result.converged ? "yes" : "no") << '\n';
}

void RunSeq2SeqAdapt(Context& ctx, const Seq2SeqAdaptArgs& a) {
  Require(a.model, "model");
  Require(a.data, "data");
  Require(a.out, "out");
  const auto params = ReadModel(ctx, a.model);
  const auto target = seq2seq::ToExamples(Pairs(ctx, a.data), *params.letters, *params.phones);
  if (target.empty()) throw DataError("adaptation set is empty");
  std::vector<seq2seq::Example> dev;
  if (!a.dev.empty()) dev = seq2seq::ToExamples(Pairs(ctx, a.dev), *params.letters, *params.phones);
  seq2seq::TrainingConfig cfg;
  cfg.lr_late = a.lr_late;
  cfg.batch = a.batch;
  cfg.clip_norm = a.clip;
  cfg.seed = ctx.Seed();
  cfg.threads = ctx.Threads();
  const auto result = seq2seq::Adapt(params, target, dev, cfg, a.epochs);
  std::ostringstream body;
  seq2seq::WriteCheckpoint(result.params, body);
  ctx.Write(a.out, body.str());
  ctx.Out() << History(result.history);
}

void RunSeq2SeqDecode(Context& ctx, const Seq2SeqDecodeArgs& a) {
  Require(a.model, "model");
  Require(a.input, "input");
  Require(a.out, "out");
  if (a.mode != "beam" && a.mode != "sausage") throw ContractError("--mode must be 'beam' or 'sausage'");
  if (a.beam < 1) throw ContractError("--beam must be at least 1");
  const auto params = ReadModel(ctx, a.model);
  std::optional<lm::BigramModel> lm;
  if (a.lm == "uniform") lm = lm::BigramModel::Uniform(params.phones);
  else if (!a.lm.empty()) lm = ReadLm(ctx, a.lm);
  if (lm && !fst::SameTable(lm->Symbols(), params.phones))
    throw ContractError("phone LM vocabulary differs from the model's phone table");

  auto in = Stream(ctx, a.input);
  std::string hyps;
  int line_no = 0;
  for (const auto& line : util::ReadLines(in)) {
    ++line_no;
    if (util::IsCommentLine(line)) continue;
    std::vector<Label> letters;
    for (const auto& c : util::Utf8Chars(line.substr(0, line.find('\t'))))
      if (!util::Trim(c).empty()) letters.push_back(params.letters->Id(c));
    if (letters.empty()) throw ParseError("empty input line", line_no);
    std::vector<Label> out;
    if (a.mode == "beam") {
      const auto r = seq2seq::BeamDecode(params, letters, lm ? &*lm : nullptr, a.beam, a.max_len);
      if (!r.complete) ctx.Err() << "line " << line_no << ": no hypothesis completed; emitting best partial\n";
      out = r.phones;
    } else {
      fst::Wfst sausage = seq2seq::OutputDistributionsToFst(params, letters, a.max_len);
      if (lm) sausage = fst::Compose(sausage, lm::BigramToFsa(*lm));
      out = fst::ShortestPath(sausage, 1).front().labels;
    }
    hyps += util::Join(params.phones->Symbols(out), " ") + "\n";
  }
  ctx.Write(a.out, hyps);
}

void RunScore(Context& ctx, const ScoreArgs& a) {
  Require(a.ref, "ref");
  if (a.hyps.empty()) throw ContractError("missing required option --hyp");
  auto rin = Stream(ctx, a.ref);
  const auto refs = eval::ReadUtterances(rin);
  std::vector<eval::ScoreRow> rows;
  for (const auto& spec : a.hyps) {
    const auto eq = spec.find('=');
    const std::string name = eq == std::string::npos ? fs::path(spec).stem().string() : spec.substr(0, eq);
    const std::string path = eq == std::string::npos ? spec : spec.substr(eq + 1);
    auto hin = Stream(ctx, path);
    rows.push_back({name, eval::PhoneErrorRate(eval::PairByLine(eval::ReadUtterances(hin), refs))});
  }
  std::ostringstream report;
  eval::WriteScoreReport(rows, report);
  ctx.Out() << ctx.Header() << '\n' << report.str();
  if (!a.out.empty()) ctx.Write(a.out, report.str());
}

}  // namespace ptforge::cli
