#include "ptforge/cli/app.hpp"

#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "commands.hpp"
#include "ptforge/error.hpp"

namespace ptforge::cli {

namespace {

using nlohmann::json;

// One JSON object per line on stderr.
void ReportError(std::ostream& err, const char* kind, const std::string& message) {
  err << json{{"error", kind}, {"message", message}}.dump() << '\n';
}

// Turns a JSON config object into option tokens placed before the command
// line's own, so explicit flags win under last-value-wins parsing.
std::vector<std::string> ConfigTokens(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read config '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw DataError("config '" + path + "': " + e.what());
  }
  if (!j.is_object()) throw DataError("config '" + path + "' must hold a JSON object");
  std::vector<std::string> tokens;
  for (const auto& [key, value] : j.items()) {
    std::string flag = "--" + key;
    std::replace(flag.begin(), flag.end(), '_', '-');
    auto scalar = [](const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); };
    if (value.is_boolean()) {
      if (value.get<bool>()) tokens.push_back(flag);
    } else if (value.is_array()) {
      for (const auto& v : value) tokens.insert(tokens.end(), {flag, scalar(v)});
    } else if (!value.is_null()) {
      tokens.insert(tokens.end(), {flag, scalar(value)});
    }
  }
  return tokens;
}

// Finds "--config PATH" or "--config=PATH".
std::string FindConfig(const std::vector<std::string>& args) {
  for (std::size_t k = 0; k < args.size(); ++k) {
    if (args[k] == "--config" && k + 1 < args.size()) return args[k + 1];
    if (args[k].rfind("--config=", 0) == 0) return args[k].substr(9);
  }
  return {};
}

struct Common {
  std::optional<uint64_t> seed;
  int threads = 1;
  bool deterministic = true;
  std::string config;
};

void AddCommon(CLI::App* sub, Common& c) {
  sub->add_option("--seed", c.seed, "Random seed (falls back to PTFORGE_SEED, then 0)");
  sub->add_option("--threads", c.threads, "Worker threads; results do not depend on it")->check(CLI::PositiveNumber);
  sub->add_flag("--deterministic,!--no-deterministic", c.deterministic,
                "Ordered reductions (always on; accepted for config compatibility)");
  sub->add_option("--config", c.config, "JSON file of option values; flags override it");
}

uint64_t ResolveSeed(const Common& c) {
  if (c.seed) return *c.seed;
  if (const char* env = std::getenv("PTFORGE_SEED"); env && *env) {
    try {
      std::size_t used = 0;
      const auto v = std::stoull(env, &used);
      if (used == std::string(env).size()) return v;
    } catch (const std::exception&) {
    }
    throw ContractError(std::string("PTFORGE_SEED is not an unsigned integer: '") + env + "'");
  }
  return 0;
}

}  // namespace

const char* Version() { return PTFORGE_VERSION; }

int Run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Probabilistic phone transcriptions from mismatched crowdsourcing", "ptforge"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  app.set_version_flag("--version", Version());
  Common common;

  MergeArgs merge;
  auto* s = app.add_subcommand("merge", "Merge transcript bundles into confusion networks");
  s->add_option("--transcripts", merge.transcripts, "Transcript bundle file")->required();
  s->add_option("--letters", merge.letters, "Letter symbol table (default: characters seen)");
  s->add_option("--prune-mass", merge.prune_mass, "Probability mass kept per slot");
  s->add_option("--out", merge.out, "Output directory")->required();
  AddCommon(s, common);

  TrainChannelArgs tc;
  s = app.add_subcommand("train-channel", "Train the phone-to-letter channel with EM");
  s->add_option("--pairs", tc.pairs, "TSV of letters<TAB>phones")->required();
  s->add_option("--phones", tc.phones, "Phone symbol table (default: phones seen)");
  s->add_option("--letters", tc.letters, "Letter symbol table (default: letters seen)");
  s->add_option("--iterations", tc.iterations, "EM iterations")->check(CLI::NonNegativeNumber);
  s->add_option("--max-chunk", tc.max_chunk, "Longest letter chunk per phone, 1..4")->check(CLI::Range(1, 4));
  s->add_option("--min-prob", tc.min_prob, "Drop emissions below this probability, then renormalize");
  s->add_option("--out", tc.out, "Channel TSV; tables go to <out>.phones.syms and <out>.letters.syms")->required();
  AddCommon(s, common);

  DecodeArgs dec;
  s = app.add_subcommand("decode-pt", "Decode transcript bundles into phone lattices");
  s->add_option("--transcripts", dec.transcripts, "Transcript bundle file")->required();
  s->add_option("--channel", dec.channel, "Channel TSV")->required();
  s->add_option("--channel-phones", dec.channel_phones, "Phone table (default: <channel>.phones.syms)");
  s->add_option("--channel-letters", dec.channel_letters, "Letter table (default: <channel>.letters.syms)");
  s->add_option("--phone-lm", dec.phone_lm, "Phone bigram model")->required();
  s->add_option("--letter-lm", dec.letter_lm, "Letter bigram model divided out of the transcripts");
  s->add_option("--prune-mass", dec.prune_mass, "Probability mass kept per slot");
  s->add_option("--max-phones", dec.max_phones, "Phone length bound (default: twice the longest transcript)");
  s->add_option("--semiring", dec.semiring, "1-best semiring: tropical or log");
  s->add_option("--out", dec.out, "Output lattice directory")->required();
  AddCommon(s, common);

  ConstrainArgs con;
  s = app.add_subcommand("constrain", "Apply language-specific constraints to lattices");
  s->add_option("--lattices", con.lattices, "Input lattice directory")->required();
  s->add_option("--constraint", con.constraint, "inventory, g2p, g2p+dict or wlm")->required();
  s->add_option("--rules", con.rules, "G2P rule file");
  s->add_option("--inventory", con.inventory, "Phone inventory file (default: phones of the rules)");
  s->add_option("--words", con.words, "Word list");
  s->add_option("--dict", con.dict, "Pronunciation dictionary");
  s->add_option("--word-lm", con.word_lm, "Word bigram model (wlm)");
  s->add_option("--semiring", con.semiring, "1-best semiring: tropical or log");
  s->add_option("--on-empty", con.on_empty, "error, or keep the unconstrained lattice");
  s->add_option("--out", con.out, "Output lattice directory")->required();
  AddCommon(s, common);

  LmTrainArgs lmt;
  s = app.add_subcommand("lm-train", "Train a bigram model");
  s->add_option("--corpus", lmt.corpus, "One sequence per line")->required();
  s->add_option("--symbols", lmt.symbols, "Symbol table (default: symbols seen)");
  s->add_option("--smoothing", lmt.smoothing, "witten-bell or add-k:<k>");
  s->add_option("--rules", lmt.rules, "Map a word corpus to phones through these G2P rules");
  s->add_option("--dict", lmt.dict, "Pronunciations preferred over the rules");
  s->add_option("--out", lmt.out, "Model file")->required();
  AddCommon(s, common);

  G2pCompileArgs g2p;
  s = app.add_subcommand("g2p-compile", "Compile G2P rules into a transducer");
  s->add_option("--rules", g2p.rules, "G2P rule file")->required();
  s->add_option("--phones", g2p.phones, "Phone symbol table")->required();
  s->add_option("--words", g2p.words, "Word list whose characters join the grapheme table");
  s->add_option("--out", g2p.out, "FST text file; tables go to <out>.graphemes.syms and <out>.phones.syms")
      ->required();
  AddCommon(s, common);

  Seq2SeqTrainArgs st;
  s = app.add_subcommand("seq2seq-train", "Train the encoder-decoder");
  s->add_option("--train", st.train, "TSV of letters<TAB>phones")->required();
  s->add_option("--dev", st.dev, "Development TSV")->required();
  s->add_option("--hidden", st.hidden, "LSTM width")->check(CLI::PositiveNumber);
  s->add_option("--layers", st.layers, "LSTM layers")->check(CLI::PositiveNumber);
  s->add_option("--epochs", st.epochs, "Maximum epochs")->check(CLI::NonNegativeNumber);
  s->add_option("--batch", st.batch, "Minibatch size")->check(CLI::PositiveNumber);
  s->add_option("--lr", st.lr, "Initial learning rate");
  s->add_option("--lr-late", st.lr_late, "Learning rate after the switch");
  s->add_option("--lr-switch", st.lr_switch, "Last epoch at the initial rate");
  s->add_option("--tolerance", st.tolerance, "Relative dev-loss change that counts as converged");
  s->add_option("--init-range", st.init_range, "Uniform initialization half-width");
  s->add_option("--clip", st.clip, "Global gradient norm bound");
  s->add_option("--out", st.out, "Checkpoint file")->required();
  AddCommon(s, common);

  Seq2SeqAdaptArgs sa;
  s = app.add_subcommand("seq2seq-adapt", "Adapt a trained encoder-decoder to target data");
  s->add_option("--model", sa.model, "Checkpoint")->required();
  s->add_option("--data", sa.data, "Target TSV of letters<TAB>phones")->required();
  s->add_option("--dev", sa.dev, "Development TSV for early stopping");
  s->add_option("--epochs", sa.epochs, "Epochs")->check(CLI::NonNegativeNumber);
  s->add_option("--batch", sa.batch, "Minibatch size")->check(CLI::PositiveNumber);
  s->add_option("--lr-late", sa.lr_late, "Learning rate");
  s->add_option("--clip", sa.clip, "Global gradient norm bound");
  s->add_option("--out", sa.out, "Adapted checkpoint")->required();
  AddCommon(s, common);

  Seq2SeqDecodeArgs sd;
  s = app.add_subcommand("seq2seq-decode", "Decode letter sequences into phones");
  s->add_option("--model", sd.model, "Checkpoint")->required();
  s->add_option("--input", sd.input, "One letter sequence per line (text before a tab)")->required();
  s->add_option("--lm", sd.lm, "Phone bigram model, or 'uniform'");
  s->add_option("--mode", sd.mode, "beam, or sausage (greedy lattice composed with the LM)");
  s->add_option("--beam", sd.beam, "Beam width")->check(CLI::PositiveNumber);
  s->add_option("--max-len", sd.max_len, "Maximum output length")->check(CLI::PositiveNumber);
  s->add_option("--out", sd.out, "Hypothesis file")->required();
  AddCommon(s, common);

  ScoreArgs sc;
  s = app.add_subcommand("score", "Phone error rates against references");
  s->add_option("--ref", sc.ref, "Reference file")->required();
  s->add_option("--hyp", sc.hyps, "Hypothesis file, optionally name=path; the first is the baseline")
      ->required()
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  s->add_option("--out", sc.out, "Report file");
  AddCommon(s, common);

  DemoArgs demo;
  s = app.add_subcommand("demo", "Run both pipelines on the bundled synthetic fixtures");
  s->add_option("--fixtures", demo.fixtures, "Fixture directory")->default_val(PTFORGE_FIXTURE_DIR);
  s->add_option("--out", demo.out, "Work directory")->default_val("ptforge-demo");
  s->add_option("--hidden", demo.hidden, "Encoder-decoder width")->check(CLI::PositiveNumber);
  s->add_option("--epochs", demo.epochs, "Encoder-decoder epochs")->check(CLI::NonNegativeNumber);
  AddCommon(s, common);

  std::vector<std::string> args = raw_args;
  try {
    if (!args.empty()) {
      if (const auto config = FindConfig(args); !config.empty()) {
        const auto tokens = ConfigTokens(config);
        args.insert(args.begin() + 1, tokens.begin(), tokens.end());
      }
    }
  } catch (const Error& e) {
    ReportError(err, "data", e.what());
    return kExitData;
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    std::ostringstream usage_out, usage_err;
    const int code = app.exit(e, usage_out, usage_err);
    out << usage_out.str();
    err << usage_err.str();
    if (code == 0) return kExitOk;
    ReportError(err, "usage", e.what());
    return kExitUsage;
  }

  CLI::App* sub = app.get_subcommands().front();
  try {
    Context ctx(sub->get_name(), ResolveSeed(common), common.threads, out, err);
    const std::string& name = sub->get_name();
    if (name == "merge") RunMerge(ctx, merge);
    else if (name == "train-channel") RunTrainChannel(ctx, tc);
    else if (name == "decode-pt") RunDecodePt(ctx, dec);
    else if (name == "constrain") RunConstrain(ctx, con);
    else if (name == "lm-train") RunLmTrain(ctx, lmt);
    else if (name == "g2p-compile") RunG2pCompile(ctx, g2p);
    else if (name == "seq2seq-train") RunSeq2SeqTrain(ctx, st);
    else if (name == "seq2seq-adapt") RunSeq2SeqAdapt(ctx, sa);
    else if (name == "seq2seq-decode") RunSeq2SeqDecode(ctx, sd);
    else if (name == "score") RunScore(ctx, sc);
    else if (name == "demo") RunDemo(ctx, demo);
    return kExitOk;
  } catch (const ContractError& e) {
    ReportError(err, "usage", e.what());
    return kExitUsage;
  } catch (const NumericError& e) {
    ReportError(err, "numeric", e.what());
    return kExitNumeric;
  } catch (const DataError& e) {
    ReportError(err, "data", e.what());
    return kExitData;
  } catch (const std::exception& e) {
    ReportError(err, "data", e.what());
    return kExitData;
  }
}

}  // namespace ptforge::cli
