#pragma once

#include <vector>

#include "ptforge/fst/ops.hpp"
#include "ptforge/lm/bigram.hpp"
#include "ptforge/seq2seq/model.hpp"

namespace ptforge::seq2seq {

struct BeamResult {
  std::vector<Label> phones;
  double model_logprob = 0;
  double lm_logprob = 0;
  double score = 0;  // model_logprob + lm_logprob
  bool complete = true;
};

// Beam search over phone prefixes scored by the summed model and LM
// log-probabilities, </s> included. Every output holds at least one phone
// and at most max_len. Completed hypotheses leave the beam; the best one is
// returned, ties broken toward the lexicographically smaller sequence.
// Without a completion the best partial hypothesis comes back with
// complete = false. A null LM contributes nothing.
BeamResult BeamDecode(const Seq2SeqParams& p, const std::vector<Label>& letters, const lm::BigramModel* lm,
                      int beam, int max_len);

// Fused score of a given phone sequence (with </s>).
BeamResult ScoreHypothesis(const Seq2SeqParams& p, const std::vector<Label>& letters, const lm::BigramModel* lm,
                           const std::vector<Label>& phones);

// Argmax decoding, stopping at </s> or after max_len phones.
std::vector<Label> GreedyDecode(const Seq2SeqParams& p, const std::vector<Label>& letters, int max_len);

// Sausage along the greedy path: slot t has one arc per phone weighted
// -log p_t(phone) and an epsilon arc carrying -log p_t(</s>); the final
// weight is -log p(</s>) at the step after the last slot.
fst::Wfst OutputDistributionsToFst(const Seq2SeqParams& p, const std::vector<Label>& letters, int max_len);

}  // namespace ptforge::seq2seq
