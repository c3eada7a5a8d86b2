#include "ptforge/seq2seq/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "ptforge/error.hpp"
#include "ptforge/util/text.hpp"

namespace ptforge::seq2seq {

double ClipGradients(Seq2SeqParams& grads, double max_norm) {
  double sq = 0;
  for (const auto* t : std::as_const(grads).Tensors()) sq += t->squaredNorm();
  const double norm = std::sqrt(sq);
  if (norm > max_norm) {
    const double s = max_norm / norm;
    for (auto* t : grads.Tensors()) *t *= s;
  }
  return norm;
}

namespace {

TrainResult Loop(Seq2SeqParams params, const std::vector<Example>& train, const std::vector<Example>& dev,
                 const TrainingConfig& config, int max_epochs, bool adapting) {
  if (train.empty()) throw ContractError("training set is empty");
  if (config.batch < 1 || !(config.lr > 0) || !(config.lr_late > 0) || !(config.clip_norm > 0)) {
    throw ContractError("bad training config");
  }
  TrainResult result{std::move(params), {}, false};
  Seq2SeqParams& p = result.params;
  const std::size_t batch = std::min<std::size_t>(config.batch, train.size());
  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);

  double prev_dev = dev.empty() ? 0.0 : LossAndGradients(p, dev, nullptr, config.threads);
  Seq2SeqParams grads = p.ZerosLike();
  for (int epoch = 1; epoch <= max_epochs; ++epoch) {
    const double lr = adapting || epoch > config.lr_switch_epoch ? config.lr_late : config.lr;
    std::shuffle(order.begin(), order.end(), rng);
    double total = 0;
    std::vector<Example> chunk;
    for (std::size_t start = 0, b = 0; start < order.size(); start += batch, ++b) {
      chunk.clear();
      for (std::size_t k = start; k < std::min(order.size(), start + batch); ++k) chunk.push_back(train[order[k]]);
      const double loss = LossAndGradients(p, chunk, &grads, config.threads);
      if (!std::isfinite(loss))
        throw NumericError("training diverged: loss " + util::FormatDouble9(loss) + " at epoch " +
                           std::to_string(epoch) + ", batch " + std::to_string(b + 1));
      ClipGradients(grads, config.clip_norm);
      auto pt = p.Tensors();
      auto gt = grads.Tensors();
      for (std::size_t k = 0; k < pt.size(); ++k) *pt[k] -= lr * *gt[k];
      total += loss * static_cast<double>(chunk.size());
    }
    if (!p.AllFinite()) throw NumericError("training diverged: non-finite parameters at epoch " + std::to_string(epoch));
    EpochRecord rec{epoch, lr, total / static_cast<double>(train.size()), 0.0};
    if (!dev.empty()) {
      rec.dev_loss = LossAndGradients(p, dev, nullptr, config.threads);
      if (!std::isfinite(rec.dev_loss)) throw NumericError("dev loss is not finite at epoch " + std::to_string(epoch));
    }
    result.history.push_back(rec);
    if (!dev.empty()) {
      const bool done = std::abs(prev_dev - rec.dev_loss) / prev_dev < config.tolerance;
      prev_dev = rec.dev_loss;
      if (done) {
        result.converged = true;
        break;
      }
    }
  }
  return result;
}

}  // namespace

TrainResult Train(Seq2SeqParams params, const std::vector<Example>& train, const std::vector<Example>& dev,
                  const TrainingConfig& config) {
  if (dev.empty()) throw ContractError("Train: dev set is empty");
  return Loop(std::move(params), train, dev, config, config.max_epochs, false);
}

TrainResult Adapt(Seq2SeqParams params, const std::vector<Example>& target, const std::vector<Example>& dev,
                  const TrainingConfig& config, int epochs) {
  if (epochs < 0) throw ContractError("Adapt: negative epoch count");
  return Loop(std::move(params), target, dev, config, epochs, true);
}

std::vector<RawPair> ReadPairs(std::istream& in) {
  std::vector<RawPair> pairs;
  int line_no = 0;
  for (const std::string& line : util::ReadLines(in)) {
    ++line_no;
    if (util::IsCommentLine(line) || util::Trim(line).empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw ParseError("expected 'letters<TAB>phones'", line_no);
    RawPair p;
    for (const auto& ch : util::Utf8Chars(line.substr(0, tab)))
      if (ch != " " && ch != "\t") p.letters += ch;
    p.phones = util::SplitWhitespace(line.substr(tab + 1));
    if (p.letters.empty()) throw ParseError("empty letter sequence", line_no);
    pairs.push_back(std::move(p));
  }
  return pairs;
}

fst::SymbolTablePtr LetterTable(const std::vector<RawPair>& pairs) {
  std::set<std::string> chars;
  for (const auto& p : pairs)
    for (auto& c : util::Utf8Chars(p.letters)) chars.insert(c);
  return fst::MakeTable(fst::SymbolTable({chars.begin(), chars.end()}));
}

fst::SymbolTablePtr PhoneTable(const std::vector<RawPair>& pairs) {
  std::set<std::string> phones;
  for (const auto& p : pairs) phones.insert(p.phones.begin(), p.phones.end());
  return fst::MakeTable(fst::SymbolTable({phones.begin(), phones.end()}));
}

std::vector<Example> ToExamples(const std::vector<RawPair>& pairs, const fst::SymbolTable& letters,
                                const fst::SymbolTable& phones) {
  std::vector<Example> out;
  for (const auto& p : pairs) {
    Example ex;
    for (const auto& c : util::Utf8Chars(p.letters)) ex.letters.push_back(letters.Id(c));
    for (const auto& ph : p.phones) ex.phones.push_back(phones.Id(ph));
    out.push_back(std::move(ex));
  }
  return out;
}

}  // namespace ptforge::seq2seq
