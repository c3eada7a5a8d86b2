#include "ptforge/channel/transcripts.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "ptforge/error.hpp"
#include "ptforge/util/text.hpp"

namespace ptforge::channel {

std::vector<TranscriptBundle> ReadBundles(std::istream& in) {
  std::vector<TranscriptBundle> bundles;
  TranscriptBundle current;
  auto flush = [&] {
    if (current.transcripts.empty()) return;
    char id[32];
    std::snprintf(id, sizeof(id), "utt%04zu", bundles.size() + 1);
    current.id = id;
    bundles.push_back(std::move(current));
    current = {};
  };
  for (const std::string& line : util::ReadLines(in)) {
    if (util::IsCommentLine(line)) continue;
    const std::string_view t = util::Trim(line);
    if (t.empty()) {
      flush();
    } else {
      current.transcripts.emplace_back(t);
    }
  }
  flush();
  return bundles;
}

std::vector<Label> TranscriptLetters(const std::string& transcript, const fst::SymbolTable& letters) {
  std::vector<Label> out;
  for (const std::string& ch : util::Utf8Chars(transcript)) {
    if (ch == " " || ch == "\t") continue;
    const auto id = letters.Find(ch);
    if (!id || *id == fst::kEpsilon) {
      throw DataError("transcript \"" + transcript + "\": letter '" + ch + "' not in the letter table");
    }
    out.push_back(*id);
  }
  return out;
}

ConfusionNetwork MergeTranscripts(const TranscriptBundle& bundle, fst::SymbolTablePtr letters,
                                  double prune_mass) {
  if (bundle.transcripts.empty()) throw ContractError("MergeTranscripts: empty bundle");
  if (!(prune_mass > 0.0 && prune_mass <= 1.0)) {
    throw ContractError("MergeTranscripts: prune_mass must lie in (0, 1]");
  }
  ConfusionNetwork cn;
  cn.letters = letters;

  using Counts = std::map<Label, double>;
  std::vector<Counts> slots;
  double merged = 0;
  for (const std::string& text : bundle.transcripts) {
    const std::vector<Label> y = TranscriptLetters(text, *letters);
    if (y.empty()) throw DataError("utterance " + bundle.id + ": empty transcript");
    cn.longest_transcript = std::max(cn.longest_transcript, y.size());
    if (slots.empty()) {
      for (Label l : y) slots.push_back({{l, 1.0}});
      merged = 1;
      continue;
    }

    const std::size_t n = slots.size(), m = y.size();
    auto sub = [&](std::size_t i, std::size_t j) { return slots[i - 1].count(y[j - 1]) ? 0 : 1; };
    auto del = [&](std::size_t i) { return slots[i - 1].count(fst::kEpsilon) ? 0 : 1; };
    std::vector<std::vector<int>> d(n + 1, std::vector<int>(m + 1, 0));
    for (std::size_t i = 1; i <= n; ++i) d[i][0] = d[i - 1][0] + del(i);
    for (std::size_t j = 1; j <= m; ++j) d[0][j] = d[0][j - 1] + 1;
    for (std::size_t i = 1; i <= n; ++i) {
      for (std::size_t j = 1; j <= m; ++j) {
        d[i][j] = std::min({d[i - 1][j - 1] + sub(i, j), d[i - 1][j] + del(i), d[i][j - 1] + 1});
      }
    }

    std::vector<Counts> next;
    std::size_t i = n, j = m;
    while (i > 0 || j > 0) {
      if (i > 0 && j > 0 && d[i][j] == d[i - 1][j - 1] + sub(i, j)) {
        Counts c = slots[i - 1];
        c[y[j - 1]] += 1;
        next.push_back(std::move(c));
        --i, --j;
      } else if (i > 0 && d[i][j] == d[i - 1][j] + del(i)) {
        Counts c = slots[i - 1];
        c[fst::kEpsilon] += 1;
        next.push_back(std::move(c));
        --i;
      } else {
        next.push_back({{y[j - 1], 1.0}, {fst::kEpsilon, merged}});
        --j;
      }
    }
    std::reverse(next.begin(), next.end());
    slots = std::move(next);
    merged += 1;
  }

  for (const Counts& counts : slots) {
    std::vector<std::pair<Label, double>> opts;
    for (const auto& [l, c] : counts) opts.emplace_back(l, c / merged);
    // Lowest probability first; among ties the larger id goes first.
    std::vector<std::pair<Label, double>> order = opts;
    std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
      return a.second != b.second ? a.second < b.second : a.first > b.first;
    });
    double kept = 0;
    for (const auto& o : opts) kept += o.second;
    std::size_t dropped = 0;
    while (dropped + 1 < order.size() && kept - order[dropped].second >= prune_mass - 1e-12) {
      kept -= order[dropped].second;
      ++dropped;
    }
    ConfusionSlot slot;
    for (const auto& [l, p] : opts) {
      const bool gone = std::any_of(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(dropped),
                                    [&](const auto& o) { return o.first == l; });
      if (!gone) slot.options.emplace_back(l, p / kept);
    }
    cn.slots.push_back(std::move(slot));
  }
  return cn;
}

fst::Wfst ConfnetToFst(const ConfusionNetwork& cn) {
  fst::Wfst out(cn.letters, cn.letters);
  out.AddStates(static_cast<fst::StateId>(cn.slots.size() + 1));
  out.SetStart(0);
  for (std::size_t i = 0; i < cn.slots.size(); ++i) {
    for (const auto& [l, p] : cn.slots[i].options) {
      out.AddArc(static_cast<fst::StateId>(i),
                 {l, l, fst::Weight::FromProb(p), static_cast<fst::StateId>(i + 1)});
    }
  }
  out.SetFinal(static_cast<fst::StateId>(cn.slots.size()), fst::Weight::One());
  return out;
}

}  // namespace ptforge::channel
