#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "ptforge/error.hpp"
#include "ptforge/fst/ops.hpp"
#include "ptforge/fst/text_io.hpp"
#include "support/oracle.hpp"

using namespace ptforge;
using namespace ptforge::fst;
namespace pt = ptforge::testing;

namespace {

SymbolTablePtr Table(std::initializer_list<const char*> syms) {
  SymbolTable t;
  for (const char* s : syms) t.Add(s);
  return MakeTable(std::move(t));
}

// A: a->x (0.5), a->y (0.5) ; B: x->p (1.0), y->q (1.0)
struct Toy {
  SymbolTablePtr in = Table({"a"});
  SymbolTablePtr mid = Table({"x", "y"});
  SymbolTablePtr out = Table({"p", "q"});
  Wfst a{in, mid};
  Wfst b{mid, out};
  Toy() {
    a.AddStates(3);
    a.SetStart(0);
    a.AddArc(0, {1, 1, Weight::FromProb(0.5), 1});
    a.AddArc(0, {1, 2, Weight::FromProb(0.5), 2});
    a.SetFinal(1, Weight::One());
    a.SetFinal(2, Weight::One());
    b.AddStates(3);
    b.SetStart(0);
    b.AddArc(0, {1, 1, Weight::One(), 1});
    b.AddArc(0, {2, 2, Weight::One(), 2});
    b.SetFinal(1, Weight::One());
    b.SetFinal(2, Weight::One());
  }
};

Wfst IdentityAcceptor(const SymbolTablePtr& t) {
  Wfst m(t, t);
  m.AddState();
  m.SetStart(0);
  m.SetFinal(0, Weight::One());
  for (Label l : t->Labels()) m.AddArc(0, {l, l, Weight::One(), 0});
  return m;
}

}  // namespace

TEST_CASE("semiring laws on sampled weights") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> d(-3.0, 10.0);
  for (int i = 0; i < 2000; ++i) {
    const Weight a(d(rng)), b(d(rng)), c(d(rng));
    for (Semiring sr : {Semiring::kLog, Semiring::kTropical}) {
      const double tol = sr == Semiring::kLog ? 1e-9 : 0.0;
      CHECK(Plus(a, b, sr) == Plus(b, a, sr));
      CHECK(std::abs(Plus(Plus(a, b, sr), c, sr).value() - Plus(a, Plus(b, c, sr), sr).value()) <= tol);
      CHECK(std::abs(Times(a, Plus(b, c, sr)).value() - Plus(Times(a, b), Times(a, c), sr).value()) <= 1e-9);
      CHECK(Plus(a, Weight::Zero(), sr) == a);
      CHECK(Times(a, Weight::One()) == a);
      CHECK(Times(a, Weight::Zero()).IsZero());
    }
  }
  CHECK_THROWS_AS(Weight(std::nan("")), ContractError);
  CHECK(LogPlus(Weight::FromProb(0.4), Weight::FromProb(0.6)).value() == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("symbol table basics and io") {
  SymbolTable t({"a", "tʃ", "b"});
  CHECK(t.Symbol(0) == "<eps>");
  CHECK(t.Id("tʃ") == 2);
  CHECK(t.Add("a") == 1);
  CHECK_FALSE(t.Find("z").has_value());
  CHECK_THROWS_AS(t.Id("z"), DataError);
  std::stringstream ss;
  t.Write(ss);
  CHECK(SymbolTable::Read(ss) == t);
  std::istringstream bad("<eps>\t0\nb\t2\n");
  CHECK_THROWS_AS(SymbolTable::Read(bad), ParseError);
}

TEST_CASE("compose examples") {
  Toy toy;
  SUBCASE("identity on the right keeps the relation") {
    Wfst c = Compose(toy.a, IdentityAcceptor(toy.mid));
    CHECK(pt::LogRelation(c, 6) == pt::LogRelation(toy.a, 6));
  }
  SUBCASE("empty machine annihilates") {
    Wfst c = Compose(toy.a, Wfst(toy.mid, toy.out));
    CHECK(c.Empty());
    CHECK(c.NumStates() == 0);
  }
  SUBCASE("three-state toy") {
    Wfst c = Compose(toy.a, toy.b);
    const auto expected = pt::ComposeRelations(pt::LogRelation(toy.a, 3), pt::LogRelation(toy.b, 3));
    const Label a = 1, p = 1;
    CHECK(expected.at({{a}, {p}}) == doctest::Approx(-std::log(0.5)).epsilon(1e-12));
    const Label in[] = {a}, out[] = {p};
    CHECK(TotalWeight(c, in, out, Semiring::kLog).value() == doctest::Approx(-std::log(0.5)).epsilon(1e-12));
  }
  SUBCASE("table mismatch is a contract error") {
    CHECK_THROWS_AS(Compose(toy.a, toy.a), ContractError);
  }
}

TEST_CASE("compose with epsilons does not double count") {
  auto t = Table({"a", "b"});
  // A: a:eps then eps:b ; B: eps:a then b:b. Several interleavings exist.
  Wfst a(t, t), b(t, t);
  a.AddStates(3);
  a.SetStart(0);
  a.AddArc(0, {1, 0, Weight(0.3), 1});
  a.AddArc(1, {0, 2, Weight(0.2), 2});
  a.SetFinal(2, Weight::One());
  b.AddStates(3);
  b.SetStart(0);
  b.AddArc(0, {0, 1, Weight(0.7), 1});
  b.AddArc(1, {2, 2, Weight(0.1), 2});
  b.SetFinal(2, Weight::One());
  Wfst c = Compose(a, b);
  const auto paths = pt::EnumeratePaths(c, 10);
  REQUIRE(paths.size() == 1);
  CHECK(paths[0].weight == doctest::Approx(1.3));
}

TEST_CASE("compose matches path enumeration on random machines") {
  std::mt19937_64 rng(5);
  auto t = Table({"a", "b", "c"});
  for (int trial = 0; trial < 200; ++trial) {
    Wfst a = pt::RandomAcyclic(rng, t, t, 5, 8, 0.25);
    Wfst b = pt::RandomAcyclic(rng, t, t, 5, 8, 0.25);
    const auto expected = pt::ComposeRelations(pt::LogRelation(a, 4), pt::LogRelation(b, 4));
    Wfst c = Compose(a, b);
    std::size_t nonzero = 0;
    for (const auto& [key, w] : expected) {
      const Weight got = TotalWeight(c, key.first, key.second, Semiring::kLog);
      CHECK(std::abs(got.value() - w) <= 1e-9);
      ++nonzero;
    }
    // and nothing extra
    for (const auto& [key, w] : pt::LogRelation(c, 8)) CHECK(expected.count(key) == 1);
  }
}

TEST_CASE("invert") {
  Toy toy;
  CHECK(Invert(Invert(toy.a)) == toy.a);
  auto t1 = Table({"a"}), t2 = Table({"x"});
  const Label a[] = {1}, x[] = {1};
  Wfst lin = LinearFst(a, x, Weight(0.25), t1, t2);
  CHECK(Invert(lin) == LinearFst(x, a, Weight(0.25), t2, t1));
  Wfst c = Compose(toy.a, toy.b);
  Wfst ci = Compose(Invert(toy.b), Invert(toy.a));
  for (const auto& [key, w] : pt::LogRelation(c, 4)) {
    CHECK(TotalWeight(ci, key.second, key.first, Semiring::kLog).value() == doctest::Approx(w).epsilon(1e-12));
  }
}

TEST_CASE("project") {
  Toy toy;
  Wfst acc = Project(toy.a, ProjectSide::kInput);
  CHECK(acc.IsAcceptor());
  CHECK(Project(acc, ProjectSide::kInput) == acc);
  CHECK(Project(Project(toy.a, ProjectSide::kOutput), ProjectSide::kOutput) == Project(toy.a, ProjectSide::kOutput));
  auto t1 = Table({"a"}), t2 = Table({"x"});
  const Label a[] = {1}, x[] = {1};
  Wfst px = Project(LinearFst(a, x, Weight::One(), t1, t2), ProjectSide::kOutput);
  CHECK(px == LinearFst(x, x, Weight::One(), t2, t2));

  // output projection sums over inputs
  auto t = Table({"a", "b"});
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    Wfst m = pt::RandomAcyclic(rng, t, t, 5, 8, 0.2);
    std::map<pt::LabelSeq, double> by_output;
    for (const auto& [key, w] : pt::LogRelation(m, 4)) {
      auto it = by_output.find(key.second);
      by_output[key.second] = it == by_output.end() ? w : pt::LogAdd(it->second, w);
    }
    Wfst p = Project(m, ProjectSide::kOutput);
    for (const auto& [seq, w] : by_output)
      CHECK(std::abs(TotalWeight(p, seq, seq, Semiring::kLog).value() - w) <= 1e-9);
  }
}

TEST_CASE("shortest path examples") {
  auto t = Table({"a", "b", "c", "d"});
  SUBCASE("single path") {
    const Label s[] = {1, 2};
    auto best = ShortestPath(LinearFst(s, s, Weight(0.7), t, t), 1);
    REQUIRE(best.size() == 1);
    CHECK(best[0].labels == std::vector<Label>{1, 2});
    CHECK(best[0].weight == Weight(0.7));
  }
  Wfst m(t, t);
  m.AddStates(4);
  m.SetStart(0);
  m.AddArc(0, {1, 1, Weight(1.0), 1});
  m.AddArc(1, {2, 2, Weight::One(), 3});
  m.AddArc(0, {3, 3, Weight(2.0), 2});
  m.AddArc(2, {2, 2, Weight::One(), 3});
  m.AddArc(0, {4, 4, Weight(3.0), 3});
  m.SetFinal(3, Weight::One());
  SUBCASE("three paths, n=1") {
    auto best = ShortestPath(m, 1);
    REQUIRE(best.size() == 1);
    CHECK(best[0].labels == std::vector<Label>{1, 2});
    CHECK(best[0].weight.value() == 1.0);
  }
  SUBCASE("n larger than the number of paths") {
    auto best = ShortestPath(m, 10);
    REQUIRE(best.size() == 3);
    CHECK(best[2].labels == std::vector<Label>{4});
    CHECK(best[2].weight.value() == 3.0);
  }
  SUBCASE("empty machine") { CHECK_THROWS_AS(ShortestPath(Wfst(t, t), 1), NoPathError); }
  SUBCASE("ties are lexicographic") {
    Wfst tie(t, t);
    tie.AddStates(2);
    tie.SetStart(0);
    tie.AddArc(0, {3, 3, Weight(1.0), 1});
    tie.AddArc(0, {2, 2, Weight(1.0), 1});
    tie.AddArc(0, {4, 4, Weight(1.0), 1});
    tie.SetFinal(1, Weight::One());
    auto best = ShortestPath(tie, 3);
    CHECK(best[0].labels == std::vector<Label>{2});
    CHECK(best[1].labels == std::vector<Label>{3});
    CHECK(best[2].labels == std::vector<Label>{4});
  }
  SUBCASE("negative arcs and positive cycles") {
    Wfst c(t, t);
    c.AddStates(3);
    c.SetStart(0);
    c.AddArc(0, {1, 1, Weight(2.0), 1});
    c.AddArc(1, {2, 2, Weight(-1.5), 2});
    c.AddArc(1, {3, 3, Weight(0.5), 1});  // positive loop
    c.AddArc(0, {4, 4, Weight(0.8), 2});
    c.SetFinal(2, Weight::One());
    auto best = ShortestPath(c, 3);
    REQUIRE(best.size() == 3);
    CHECK(best[0].labels == std::vector<Label>{1, 2});
    CHECK(best[0].weight.value() == doctest::Approx(0.5));
    CHECK(best[1].labels == std::vector<Label>{4});
    CHECK(best[2].labels == std::vector<Label>{1, 3, 2});
  }
}

TEST_CASE("shortest path agrees with enumeration") {
  std::mt19937_64 rng(17);
  auto t = Table({"a", "b", "c"});
  for (int trial = 0; trial < 300; ++trial) {
    Wfst m = pt::RandomAcyclic(rng, t, t, 5, 8, 0.2);
    const auto ranked = pt::RankOutputs(m, 10);
    if (ranked.empty()) {
      CHECK_THROWS_AS(ShortestPath(m, 1), NoPathError);
      continue;
    }
    auto got = ShortestPath(m, 100);
    REQUIRE(got.size() == ranked.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
      CHECK(got[i].weight.value() == ranked[i].first);
      CHECK(got[i].labels == ranked[i].second);
    }
  }
}

TEST_CASE("discount weights") {
  auto t = Table({"a"});
  Wfst m(t, t);
  m.AddStates(2);
  m.SetStart(0);
  m.AddArc(0, {1, 1, Weight::FromProb(0.3), 1});
  m.AddArc(0, {1, 1, Weight::Zero(), 1});
  m.SetFinal(1, Weight(0.4));
  Wfst d = DiscountWeights(m);
  CHECK(d.Arcs(0)[0].weight == Weight::One());
  CHECK(d.Arcs(0)[1].weight.IsZero());
  CHECK(d.Final(1) == Weight::One());
  CHECK(DiscountWeights(d) == d);
  CHECK(d.NumArcs() == m.NumArcs());

  // discounted factor leaves composed path weights untouched
  std::mt19937_64 rng(23);
  auto t3 = Table({"a", "b"});
  for (int trial = 0; trial < 50; ++trial) {
    Wfst pt_lat = pt::RandomAcyclic(rng, t3, t3, 5, 8, 0.0, true);
    Wfst lm = pt::RandomAcyclic(rng, t3, t3, 5, 8, 0.0, true);
    Wfst c = Compose(DiscountWeights(lm), pt_lat);
    const auto lm_rel = pt::LogRelation(lm, 4);
    const auto pt_best = pt::BestPerOutput(pt_lat, 4);
    for (const auto& p : pt::EnumeratePaths(c, 8)) {
      REQUIRE(lm_rel.count({p.input, p.input}) == 1);
      const double orig = pt_best.at(p.output);
      CHECK(p.weight >= orig - 1e-12);
    }
    for (const auto& [seq, w] : pt::BestPerOutput(c, 8)) CHECK(w == doctest::Approx(pt_best.at(seq)).epsilon(1e-12));
  }
}

TEST_CASE("total weight") {
  auto t = Table({"a", "b"});
  Wfst m(t, t);
  m.AddStates(2);
  m.SetStart(0);
  m.AddArc(0, {1, 2, Weight::FromProb(0.4), 1});
  m.AddArc(0, {1, 2, Weight::FromProb(0.6), 1});
  m.SetFinal(1, Weight::One());
  const Label a[] = {1}, b[] = {2};
  CHECK(TotalWeight(m, a, a, Semiring::kLog).IsZero());
  CHECK(TotalWeight(m, a, b, Semiring::kLog).value() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(TotalWeight(m, a, b, Semiring::kTropical) == Weight::FromProb(0.6));
  const Label ab[] = {1, 2};
  CHECK(TotalWeight(LinearFst(ab, ab, Weight(1.25), t, t), ab, ab, Semiring::kLog) == Weight(1.25));

  Wfst loop(t, t);
  loop.AddState();
  loop.SetStart(0);
  loop.SetFinal(0, Weight::One());
  loop.AddArc(0, {1, 1, Weight::FromProb(0.5), 0});
  CHECK_THROWS_AS(TotalWeight(loop, a, a, Semiring::kLog), ContractError);
  CHECK(TotalWeight(loop, a, a, Semiring::kLog, 3) == Weight::FromProb(0.5));
}

TEST_CASE("linear fst") {
  auto t = Table({"a", "b", "x", "y"});
  const Label ab[] = {1, 2}, xy[] = {3, 4}, x[] = {3};
  Wfst m = LinearFst(ab, xy, Weight::One(), t, t);
  CHECK(m.NumStates() == 3);
  Wfst pad = LinearFst(ab, x, Weight::One(), t, t);
  CHECK(pad.Arcs(1)[0].olabel == kEpsilon);
  auto best = ShortestPath(LinearFst(ab, xy, Weight(0.5), t, t), 1);
  CHECK(best[0].labels == std::vector<Label>{3, 4});
  CHECK(best[0].weight == Weight(0.5));
  CHECK_THROWS_AS(LinearFst({}, {}, Weight::One(), t, t), ContractError);
}

TEST_CASE("text format round trip") {
  std::mt19937_64 rng(99);
  auto t = Table({"a", "b", "c"});
  for (int trial = 0; trial < 50; ++trial) {
    Wfst m = pt::RandomAcyclic(rng, t, t, 5, 8, 0.3);
    const std::string text = ToText(m);
    Wfst back = FromText(text, t, t);
    CHECK(ToText(back) == text);
    CHECK(back.Start() == m.Start());
    for (const auto& [key, w] : pt::LogRelation(m, 4))
      CHECK(TotalWeight(back, key.first, key.second, Semiring::kLog).value() == doctest::Approx(w).epsilon(1e-8));
  }
  std::istringstream bad("0 1 7 1\n");
  CHECK_THROWS_AS(ReadText(bad, t, t), ParseError);
  std::istringstream commented("# ptforge test\n0\t1\t1\t1\t0.5\n1\n");
  Wfst c = ReadText(commented, t, t);
  CHECK(c.NumStates() == 2);
  CHECK(c.Arcs(0)[0].weight == Weight(0.5));
}

TEST_CASE("log best string matches summed path enumeration") {
  auto syms = Table({"a", "b", "c"});
  std::mt19937_64 rng(77);
  int checked = 0;
  for (int trial = 0; trial < 300; ++trial) {
    Wfst m = pt::RandomAcyclic(rng, syms, syms, 7, 14, 0.2, true);
    std::map<pt::LabelSeq, double> mass;
    for (const auto& p : pt::EnumeratePaths(m, 16)) {
      auto [it, fresh] = mass.try_emplace(p.output, p.weight);
      if (!fresh) it->second = pt::LogAdd(it->second, p.weight);
    }
    if (mass.empty()) {
      CHECK_THROWS_AS(ShortestStringLog(m), NoPathError);
      continue;
    }
    const auto best = std::min_element(mass.begin(), mass.end(),
                                       [](const auto& x, const auto& y) { return x.second < y.second; });
    const ScoredSequence got = ShortestStringLog(m);
    CHECK(got.weight.value() == doctest::Approx(best->second).epsilon(1e-12));
    CHECK(mass.at(got.labels) == doctest::Approx(best->second).epsilon(1e-12));
    ++checked;
  }
  CHECK(checked > 100);
}
