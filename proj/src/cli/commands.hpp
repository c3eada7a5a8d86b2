#pragma once

#include <optional>
#include <string>
#include <vector>

#include "context.hpp"

namespace ptforge::cli {

struct MergeArgs {
  std::string transcripts, letters, out;
  double prune_mass = 1.0;
};

struct TrainChannelArgs {
  std::string pairs, out, phones, letters;
  int iterations = 25;
  int max_chunk = 4;
  double min_prob = 0.0;
};

struct DecodeArgs {
  std::string transcripts, channel, channel_phones, channel_letters, phone_lm, letter_lm, out;
  std::string semiring = "tropical";
  double prune_mass = 1.0;
  std::optional<int> max_phones;
};

struct ConstrainArgs {
  std::string lattices, constraint, rules, inventory, words, dict, word_lm, out;
  std::string semiring = "tropical";
  std::string on_empty = "error";
};

struct LmTrainArgs {
  std::string corpus, out, symbols, rules, dict;
  std::string smoothing = "witten-bell";
};

struct G2pCompileArgs {
  std::string rules, phones, words, out;
};

struct Seq2SeqTrainArgs {
  std::string train, dev, out;
  int hidden = 100, layers = 2, epochs = 50, batch = 128, lr_switch = 8;
  double lr = 0.4, lr_late = 0.2, tolerance = 1e-7, init_range = 0.1, clip = 5.0;
};

struct Seq2SeqAdaptArgs {
  std::string model, data, dev, out;
  int epochs = 5, batch = 128;
  double lr_late = 0.2, clip = 5.0;
};

struct Seq2SeqDecodeArgs {
  std::string model, input, out, lm;
  std::string mode = "beam";
  int beam = 8, max_len = 64;
};

struct ScoreArgs {
  std::string ref, out;
  std::vector<std::string> hyps;
};

struct DemoArgs {
  std::string fixtures, out;
  int hidden = 64, epochs = 30;
};

void RunMerge(Context& ctx, const MergeArgs& a);
void RunTrainChannel(Context& ctx, const TrainChannelArgs& a);
void RunDecodePt(Context& ctx, const DecodeArgs& a);
void RunConstrain(Context& ctx, const ConstrainArgs& a);
void RunLmTrain(Context& ctx, const LmTrainArgs& a);
void RunG2pCompile(Context& ctx, const G2pCompileArgs& a);
void RunSeq2SeqTrain(Context& ctx, const Seq2SeqTrainArgs& a);
void RunSeq2SeqAdapt(Context& ctx, const Seq2SeqAdaptArgs& a);
void RunSeq2SeqDecode(Context& ctx, const Seq2SeqDecodeArgs& a);
void RunScore(Context& ctx, const ScoreArgs& a);
void RunDemo(Context& ctx, const DemoArgs& a);

}  // namespace ptforge::cli
