#include <sstream>

#include "commands.hpp"
#include "ptforge/cli/app.hpp"
#include "ptforge/error.hpp"

namespace ptforge::cli {

namespace {

// Runs one pipeline step through the public entry point, logging its
// standard output under <work>/logs.
void Step(Context& ctx, const fs::path& work, const std::string& log, std::vector<std::string> args) {
  args.insert(args.end(), {"--seed", std::to_string(ctx.Seed()), "--threads", std::to_string(ctx.Threads())});
  std::ostringstream out, err;
  const int code = Run(args, out, err);
  ctx.Write(work / "logs" / (log + ".log"), out.str());
  if (!err.str().empty()) ctx.Err() << "[" << log << "] " << err.str();
  if (code == kExitNumeric) throw NumericError("demo step '" + log + "' failed");
  if (code != kExitOk) throw DataError("demo step '" + log + "' failed with exit code " + std::to_string(code));
}

}  // namespace

void RunDemo(Context& ctx, const DemoArgs& a) {
  const fs::path fx(a.fixtures), work(a.out);
  if (!fs::exists(fx / "transcripts.txt")) throw DataError("no demo fixtures under '" + fx.string() + "'");
  ctx.MakeDirectory(work);
  auto f = [&](const char* name) { return (fx / name).string(); };
  auto w = [&](const std::string& name) { return (work / name).string(); };

  // Phone transcription pipeline.
  Step(ctx, work, "merge", {"merge", "--transcripts", f("transcripts.txt"), "--out", w("confnets")});
  Step(ctx, work, "train-channel",
       {"train-channel", "--pairs", f("channel_pairs.tsv"), "--max-chunk", "2", "--min-prob", "0.001", "--out", w("channel.tsv")});
  Step(ctx, work, "lm-train-phones",
       {"lm-train", "--corpus", f("word_corpus.txt"), "--rules", f("rules.tsv"), "--dict", f("dict.tsv"),
        "--symbols", w("channel.tsv.phones.syms"), "--out", w("phone_lm.txt")});
  Step(ctx, work, "lm-train-words", {"lm-train", "--corpus", f("word_corpus.txt"), "--out", w("word_lm.txt")});
  Step(ctx, work, "decode-pt",
       {"decode-pt", "--transcripts", f("transcripts.txt"), "--channel", w("channel.tsv"), "--phone-lm",
        w("phone_lm.txt"), "--out", w("pt")});
  const std::vector<std::pair<std::string, std::vector<std::string>>> variants{
      {"inventory", {"--rules", f("rules.tsv")}},
      {"g2p", {"--rules", f("rules.tsv"), "--words", f("words.txt")}},
      {"g2p+dict", {"--rules", f("rules.tsv"), "--words", f("words.txt"), "--dict", f("dict.tsv")}},
      {"wlm", {"--rules", f("rules.tsv"), "--word-lm", w("word_lm.txt")}},
  };
  for (const auto& [name, extra] : variants) {
    std::vector<std::string> args{"constrain", "--lattices", w("pt"), "--constraint", name,
                                  "--on-empty", "keep", "--out", w("pt-" + name)};
    args.insert(args.end(), extra.begin(), extra.end());
    Step(ctx, work, "constrain-" + name, args);
  }

  // Encoder-decoder pipeline.
  Step(ctx, work, "seq2seq-train",
       {"seq2seq-train", "--train", f("channel_pairs.tsv"), "--dev", f("dev_pairs.tsv"), "--hidden",
        std::to_string(a.hidden), "--layers", "1", "--batch", "8", "--epochs", std::to_string(a.epochs), "--out", w("seq2seq.ckpt")});
  Step(ctx, work, "seq2seq-decode",
       {"seq2seq-decode", "--model", w("seq2seq.ckpt"), "--input", f("seq2seq_input.txt"), "--lm",
        w("phone_lm.txt"), "--out", w("seq2seq.hyp")});

  std::vector<std::string> score{"score", "--ref", f("reference.txt"), "--out", w("report.tsv"),
                                 "--hyp", "pt=" + w("pt/best.txt")};
  for (const auto& [name, extra] : variants) score.insert(score.end(), {"--hyp", "pt+" + name + "=" + w("pt-" + name + "/best.txt")});
  score.insert(score.end(), {"--hyp", "seq2seq+lm=" + w("seq2seq.hyp")});
  Step(ctx, work, "score", score);

  ctx.Out() << ctx.Read(work / "report.tsv");
}

}  // namespace ptforge::cli
