#include "ptforge/seq2seq/decode.hpp"

#include <algorithm>
#include <cmath>

#include "ptforge/error.hpp"

namespace ptforge::seq2seq {

namespace {

struct Hyp {
  std::vector<Label> phones;
  DecoderState state;
  double model = 0;
  double lm = 0;
  double Score() const { return model + lm; }
};

bool Better(double score_a, const std::vector<Label>& a, double score_b, const std::vector<Label>& b) {
  if (score_a != score_b) return score_a > score_b;
  return a < b;
}

void CheckLm(const Seq2SeqParams& p, const lm::BigramModel* lm) {
  if (lm && !fst::SameTable(lm->Symbols(), p.phones))
    throw ContractError("seq2seq decode: LM vocabulary differs from the model's phones");
}

Label Argmax(const VectorXd& v) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i)
    if (v(i) > v(best)) best = i;
  return static_cast<Label>(best) + 1;
}

}  // namespace

BeamResult BeamDecode(const Seq2SeqParams& p, const std::vector<Label>& letters, const lm::BigramModel* lm,
                      int beam, int max_len) {
  if (beam < 1) throw ContractError("BeamDecode: beam must be at least 1");
  if (max_len < 1) throw ContractError("BeamDecode: max_len must be at least 1");
  CheckLm(p, lm);
  const Label eos = p.Eos();
  std::vector<Hyp> open{{{}, EncodeState(p, letters), 0.0, 0.0}};
  std::vector<BeamResult> finished;
  Hyp best_partial = open.front();

  while (!open.empty()) {
    std::vector<Hyp> next;
    for (const Hyp& h : open) {
      const Label prev = h.phones.empty() ? lm::BigramModel::kBos : h.phones.back();
      auto [state, pmf] = DecoderStep(p, h.state, prev);
      for (Label o = 1; o <= eos; ++o) {
        const bool end = o == eos;
        if (end && h.phones.empty()) continue;
        if (!end && static_cast<int>(h.phones.size()) == max_len) continue;
        const double m = h.model + std::log(pmf(o - 1));
        const double l = h.lm + (lm ? lm->LogProb(prev, o) : 0.0);
        if (!std::isfinite(m + l)) continue;
        if (end) {
          finished.push_back({h.phones, m, l, m + l, true});
        } else {
          Hyp ext{h.phones, state, m, l};
          ext.phones.push_back(o);
          next.push_back(std::move(ext));
        }
      }
    }
    std::sort(next.begin(), next.end(),
              [](const Hyp& a, const Hyp& b) { return Better(a.Score(), a.phones, b.Score(), b.phones); });
    if (next.size() > static_cast<std::size_t>(beam)) next.resize(beam);
    open = std::move(next);
    if (!open.empty()) best_partial = open.front();
    if (!finished.empty() && !open.empty()) {
      const auto& best = *std::min_element(finished.begin(), finished.end(), [](const auto& a, const auto& b) {
        return Better(a.score, a.phones, b.score, b.phones);
      });
      // Scores only fall as hypotheses grow.
      if (best.score > open.front().Score()) break;
    }
  }
  if (finished.empty()) return {best_partial.phones, best_partial.model, best_partial.lm, best_partial.Score(), false};
  return *std::min_element(finished.begin(), finished.end(),
                           [](const auto& a, const auto& b) { return Better(a.score, a.phones, b.score, b.phones); });
}

BeamResult ScoreHypothesis(const Seq2SeqParams& p, const std::vector<Label>& letters, const lm::BigramModel* lm,
                           const std::vector<Label>& phones) {
  CheckLm(p, lm);
  BeamResult r{phones, 0, 0, 0, true};
  DecoderState state = EncodeState(p, letters);
  Label prev = lm::BigramModel::kBos;
  for (std::size_t t = 0; t <= phones.size(); ++t) {
    const Label o = t < phones.size() ? phones[t] : p.Eos();
    auto [next, pmf] = DecoderStep(p, state, prev);
    r.model_logprob += std::log(pmf(o - 1));
    if (lm) r.lm_logprob += lm->LogProb(prev, o);
    state = std::move(next);
    prev = o;
  }
  r.score = r.model_logprob + r.lm_logprob;
  return r;
}

std::vector<Label> GreedyDecode(const Seq2SeqParams& p, const std::vector<Label>& letters, int max_len) {
  std::vector<Label> out;
  DecoderState state = EncodeState(p, letters);
  Label prev = 0;
  while (static_cast<int>(out.size()) < max_len) {
    auto [next, pmf] = DecoderStep(p, state, prev);
    const Label o = Argmax(pmf);
    if (o == p.Eos()) break;
    out.push_back(o);
    state = std::move(next);
    prev = o;
  }
  return out;
}

fst::Wfst OutputDistributionsToFst(const Seq2SeqParams& p, const std::vector<Label>& letters, int max_len) {
  fst::Wfst out(p.phones, p.phones);
  fst::StateId cur = out.AddState();
  out.SetStart(cur);
  DecoderState state = EncodeState(p, letters);
  Label prev = 0;
  for (int t = 0;; ++t) {
    auto [next, pmf] = DecoderStep(p, state, prev);
    const Label o = Argmax(pmf);
    if (o == p.Eos() || t == max_len) {
      out.SetFinal(cur, fst::Weight::FromProb(pmf(p.Eos() - 1)));
      break;
    }
    const fst::StateId dst = out.AddState();
    for (Label ph = 1; ph <= p.Eos(); ++ph) {
      const double prob = pmf(ph - 1);
      if (prob <= 0) continue;
      const Label label = ph == p.Eos() ? fst::kEpsilon : ph;
      out.AddArc(cur, {label, label, fst::Weight::FromProb(prob), dst});
    }
    cur = dst;
    state = std::move(next);
    prev = o;
  }
  return out;
}

}  // namespace ptforge::seq2seq
