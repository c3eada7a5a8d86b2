#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <vector>

#include "ptforge/seq2seq/model.hpp"

namespace ptforge::seq2seq {

struct TrainingConfig {
  double lr = 0.4;
  double lr_late = 0.2;
  int lr_switch_epoch = 8;  // last epoch trained at `lr`
  int batch = 128;          // capped at the dataset size
  double init_range = 0.1;
  double tolerance = 1e-7;  // on the relative dev-loss change
  int max_epochs = 50;
  double clip_norm = 5.0;
  uint64_t seed = 0;
  int threads = 1;
};

struct EpochRecord {
  int epoch = 0;
  double lr = 0;
  double train_loss = 0;  // mean over the epoch's batches, before each update
  double dev_loss = 0;
};

struct TrainResult {
  Seq2SeqParams params;
  std::vector<EpochRecord> history;
  bool converged = false;
};

// SGD with a seeded per-epoch shuffle and global-norm clipping. Stops when
// |dev_prev - dev| / dev_prev < tolerance or after max_epochs. Throws
// NumericError on a non-finite loss.
TrainResult Train(Seq2SeqParams params, const std::vector<Example>& train, const std::vector<Example>& dev,
                  const TrainingConfig& config);

// Continues training on target data at the late rate for up to `epochs`
// epochs; with an empty dev set it runs all of them.
TrainResult Adapt(Seq2SeqParams params, const std::vector<Example>& target, const std::vector<Example>& dev,
                  const TrainingConfig& config, int epochs);

// Scales gradients in place so their global L2 norm is at most max_norm;
// returns the norm before scaling.
double ClipGradients(Seq2SeqParams& grads, double max_norm);

// "letters<TAB>space-separated phones" per line. Letters are UTF-8
// characters with whitespace ignored.
struct RawPair {
  std::string letters;
  std::vector<std::string> phones;
};
std::vector<RawPair> ReadPairs(std::istream& in);
// Tables holding every symbol in the pairs, sorted.
fst::SymbolTablePtr LetterTable(const std::vector<RawPair>& pairs);
fst::SymbolTablePtr PhoneTable(const std::vector<RawPair>& pairs);
std::vector<Example> ToExamples(const std::vector<RawPair>& pairs, const fst::SymbolTable& letters,
                                const fst::SymbolTable& phones);

}  // namespace ptforge::seq2seq
