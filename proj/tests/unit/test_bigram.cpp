#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "ptforge/constraints/lexicon.hpp"
#include "ptforge/error.hpp"
#include "ptforge/fst/ops.hpp"
#include "ptforge/lm/bigram.hpp"
#include "ptforge/lm/words_to_phones.hpp"

using namespace ptforge;
using namespace ptforge::lm;
using fst::Label;
using Strings = std::vector<std::vector<std::string>>;

namespace {

fst::SymbolTablePtr Table(std::initializer_list<const char*> syms) {
  fst::SymbolTable t;
  for (const char* s : syms) t.Add(s);
  return fst::MakeTable(std::move(t));
}

std::vector<std::vector<Label>> RandomCorpus(std::mt19937_64& rng, Label vocab, int n, int max_len) {
  std::uniform_int_distribution<int> len(1, max_len);
  std::uniform_int_distribution<Label> sym(1, vocab);
  std::vector<std::vector<Label>> corpus(n);
  for (auto& s : corpus) {
    s.resize(len(rng));
    for (auto& x : s) x = sym(rng);
  }
  return corpus;
}

}  // namespace

TEST_CASE("unsmoothed estimates follow the counts, end marker included") {
  auto t = Table({"a", "b"});
  const Label a = 1, b = 2;
  BigramModel m = TrainBigram(Strings{{"a", "b"}, {"a", "a"}}, t, ParseSmoothing("add-k:0"));
  CHECK(m.Prob(a, b) == doctest::Approx(1.0 / 3).epsilon(1e-15));
  CHECK(m.Prob(a, a) == doctest::Approx(1.0 / 3).epsilon(1e-15));
  CHECK(m.Prob(a, m.Eos()) == doctest::Approx(1.0 / 3).epsilon(1e-15));
  CHECK(m.Prob(a, b) == m.Prob(a, a));
  CHECK(m.Prob(BigramModel::kBos, a) == 1.0);
  CHECK(m.Prob(b, m.Eos()) == 1.0);

  BigramModel single = TrainBigram(Strings{{"a"}}, t, ParseSmoothing("add-k:0"));
  CHECK(single.Prob(a, single.Eos()) == 1.0);
  CHECK(single.Prob(a, a) == 0.0);
}

TEST_CASE("witten-bell matches the formula applied by hand") {
  auto t = Table({"a", "b"});
  const Label a = 1, b = 2;
  BigramModel m = TrainBigram(Strings{{"a", "b"}, {"a", "a"}}, t);
  const Label e = m.Eos();
  // Tokens a:3 b:1 </s>:2, three types over three outcomes.
  CHECK(m.UnigramProb(a) == doctest::Approx(4.0 / 9));
  CHECK(m.UnigramProb(b) == doctest::Approx(2.0 / 9));
  CHECK(m.UnigramProb(e) == doctest::Approx(3.0 / 9));
  // Context a: three tokens, three types.
  CHECK(m.Prob(a, a) == doctest::Approx(7.0 / 18));
  CHECK(m.Prob(a, b) == doctest::Approx(5.0 / 18));
  CHECK(m.Prob(a, e) == doctest::Approx(6.0 / 18));
  // Context <s>: two tokens, one type.
  CHECK(m.Prob(BigramModel::kBos, a) == doctest::Approx(22.0 / 27));
  CHECK(m.Prob(BigramModel::kBos, b) == doctest::Approx(2.0 / 27));
  CHECK(m.Prob(BigramModel::kBos, e) == doctest::Approx(3.0 / 27));
  // Context b: one token, one type.
  CHECK(m.Prob(b, e) == doctest::Approx(2.0 / 3));
  CHECK(m.Prob(b, a) == doctest::Approx(2.0 / 9));
  CHECK(m.Prob(b, b) == doctest::Approx(1.0 / 9));
  CHECK(SmoothingName(m.Smoothing()) == "witten-bell");
}

TEST_CASE("every context is normalized under both smoothers") {
  std::mt19937_64 rng(11);
  auto t = Table({"a", "b", "c", "d", "e"});
  for (int trial = 0; trial < 50; ++trial) {
    const auto corpus = RandomCorpus(rng, 4, 1 + trial % 6, 5);  // "e" never seen
    for (const char* s : {"witten-bell", "add-k:0", "add-k:0.5", "add-k:1"}) {
      BigramModel m = TrainBigram(corpus, t, ParseSmoothing(s));
      for (Label ctx = 0; ctx < m.NumContexts(); ++ctx) {
        double total = 0;
        for (Label o = 1; o <= m.NumOutcomes(); ++o) {
          CHECK(m.Prob(ctx, o) >= 0.0);
          total += m.Prob(ctx, o);
        }
        CHECK(std::abs(total - 1.0) <= 1e-9);
      }
    }
  }
}

TEST_CASE("scores agree with path weights through the acceptor") {
  auto t = Table({"a", "b", "c"});
  BigramModel toy = TrainBigram(Strings{{"a", "b"}, {"a", "a"}}, t, ParseSmoothing("add-k:0"));
  const std::vector<Label> ab{1, 2};
  CHECK(ScoreSequence(toy, ab) ==
        doctest::Approx(std::log(toy.Prob(0, 1)) + std::log(toy.Prob(1, 2)) + std::log(toy.Prob(2, toy.Eos()))));
  CHECK(std::isinf(ScoreSequence(toy, std::vector<Label>{})));
  BigramModel wb = TrainBigram(Strings{{"a", "b"}, {"a", "a"}}, t);
  CHECK(ScoreSequence(wb, std::vector<Label>{}) == doctest::Approx(std::log(wb.Prob(0, wb.Eos()))));

  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 40; ++trial) {
    BigramModel m = TrainBigram(RandomCorpus(rng, 3, 4, 4), t, ParseSmoothing(trial % 2 ? "witten-bell" : "add-k:0.3"));
    const fst::Wfst fsa = BigramToFsa(m);
    for (const auto& seq : RandomCorpus(rng, 3, 5, 5)) {
      const fst::Weight w = fst::TotalWeight(fsa, seq, seq, fst::Semiring::kLog, static_cast<int>(seq.size()));
      CHECK(std::abs(-w.value() - ScoreSequence(m, seq)) <= 1e-9);
    }
    // Outgoing mass of every state is one.
    for (fst::StateId s = 0; s < fsa.NumStates(); ++s) {
      double mass = fsa.Final(s).Prob();
      for (const auto& arc : fsa.Arcs(s)) mass += arc.weight.Prob();
      CHECK(std::abs(mass - 1.0) <= 1e-9);
    }
  }
}

TEST_CASE("composing a uniform lattice with the acceptor reranks by LM score") {
  auto t = Table({"a", "b", "c"});
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    BigramModel m = TrainBigram(RandomCorpus(rng, 3, 6, 4), t);
    fst::Wfst lattice(t, t);
    lattice.AddStates(4);
    lattice.SetStart(0);
    for (fst::StateId s = 0; s < 3; ++s) {
      for (Label l = 1; l <= 3; ++l) lattice.AddArc(s, {l, l, fst::Weight::One(), s + 1});
    }
    lattice.SetFinal(3, fst::Weight::One());
    const auto best = fst::ShortestPath(fst::Compose(lattice, BigramToFsa(m)), 1).front();

    double best_score = -1e300;
    std::vector<Label> argmax;
    for (Label x = 1; x <= 3; ++x)
      for (Label y = 1; y <= 3; ++y)
        for (Label z = 1; z <= 3; ++z) {
          const std::vector<Label> s{x, y, z};
          const double score = ScoreSequence(m, s);
          if (score > best_score + 1e-12) best_score = score, argmax = s;
        }
    CHECK(best.labels == argmax);
    CHECK(-best.weight.value() == doctest::Approx(best_score));
  }
}

TEST_CASE("adding a sequence never lowers its add-k probability") {
  auto t = Table({"a", "b", "c"});
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 300; ++trial) {
    auto corpus = RandomCorpus(rng, 3, 1 + trial % 8, 4);
    const auto extra = RandomCorpus(rng, 3, 1, 4).front();
    const SmoothingSpec spec = ParseSmoothing(trial % 3 == 0 ? "add-k:1" : "add-k:0.1");
    const double before = ScoreSequence(TrainBigram(corpus, t, spec), extra);
    corpus.push_back(extra);
    const double after = ScoreSequence(TrainBigram(corpus, t, spec), extra);
    CHECK(after >= before - 1e-12);
  }
}

TEST_CASE("out-of-vocabulary symbols are listed") {
  auto t = Table({"a", "b"});
  try {
    TrainBigram(Strings{{"a", "x"}, {"y", "b", "x"}}, t);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("x") != std::string::npos);
    CHECK(msg.find("y") != std::string::npos);
  }
  BigramModel m = TrainBigram(Strings{{"a"}}, t);
  CHECK_THROWS_AS(ScoreSequence(m, std::vector<std::string>{"q"}), DataError);
}

TEST_CASE("model files round trip at nine significant digits") {
  auto t = Table({"a", "b", "ʃ"});
  std::mt19937_64 rng(3);
  for (const char* s : {"witten-bell", "add-k:0.25"}) {
    BigramModel m = TrainBigram(RandomCorpus(rng, 3, 7, 5), t, ParseSmoothing(s));
    std::ostringstream first;
    WriteModel(m, first);
    std::istringstream in(first.str());
    BigramModel back = ReadModel(in);
    CHECK(*back.Symbols() == *m.Symbols());
    CHECK(SmoothingName(back.Smoothing()) == s);
    for (Label ctx = 0; ctx < m.NumContexts(); ++ctx) {
      for (Label o = 1; o <= m.NumOutcomes(); ++o) {
        CHECK(std::abs(back.Prob(ctx, o) - m.Prob(ctx, o)) <= 5e-9 * m.Prob(ctx, o));
      }
    }
    std::ostringstream second;
    WriteModel(back, second);
    CHECK(second.str() == first.str());
  }
  std::istringstream bad("\\smoothing\\ witten-bell\nnonsense\n");
  CHECK_THROWS_AS(ReadModel(bad), ParseError);
}

TEST_CASE("explicit tables may hold zeros but must be normalized") {
  auto t = Table({"a"});
  BigramModel m = BigramModel::FromProbabilities(t, {0.5, 0.5}, {{1.0, 0.0}, {0.0, 1.0}}, {});
  CHECK(m.Prob(0, 1) == 1.0);
  CHECK(std::isinf(ScoreSequence(m, std::vector<Label>{1, 1})));
  CHECK_THROWS_AS(BigramModel::FromProbabilities(t, {0.5, 0.5}, {{0.9, 0.0}, {0.0, 1.0}}, {}), ContractError);
}

TEST_CASE("words map to dictionary or rule pronunciations") {
  auto phones = Table({"a", "p", "q", "s"});
  std::istringstream rules_text("a\ta\nb\tp\nb\ts\n");
  const constraints::G2PRuleSet rules = constraints::ParseG2PRules(rules_text, phones, {"w"});
  constraints::PronDict dict{{"w", {{2, 3}}}, {"ab", {{4}, {2}}}};

  CHECK(WordsToPhones({{"w", "w"}}, dict, rules) == std::vector<std::vector<Label>>{{2, 3, 2, 3}});
  CHECK(WordsToPhones({{"aa"}}, dict, rules) == std::vector<std::vector<Label>>{{1, 1}});
  // "ab" takes its first dictionary entry; "ba" takes the smaller rule output (p < s).
  CHECK(WordsToPhones({{"ab", "ba", "w"}}, dict, rules) ==
        std::vector<std::vector<Label>>{{4, 2, 1, 2, 3}});
  CHECK_THROWS_AS(WordsToPhones({{"zz"}}, dict, rules), DataError);
}
