#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <set>
#include <sstream>

#include "ptforge/channel/decode.hpp"
#include "ptforge/cli/app.hpp"
#include "ptforge/constraints/constrain.hpp"
#include "ptforge/error.hpp"
#include "ptforge/eval/score.hpp"
#include "ptforge/fst/text_io.hpp"
#include "ptforge/seq2seq/decode.hpp"
#include "ptforge/seq2seq/train.hpp"
#include "ptforge/util/text.hpp"

namespace py = pybind11;
using namespace ptforge;
using fst::Label;

namespace {

using Phones = std::vector<std::string>;
using Pair = std::pair<std::string, Phones>;  // (letters, phones)

fst::SymbolTablePtr TableOf(const std::set<std::string>& symbols) {
  return fst::MakeTable(fst::SymbolTable({symbols.begin(), symbols.end()}));
}

std::set<std::string> Chars(const std::string& s) {
  std::set<std::string> out;
  for (const auto& c : util::Utf8Chars(s))
    if (!util::Trim(c).empty()) out.insert(c);
  return out;
}

std::vector<seq2seq::RawPair> Raw(const std::vector<Pair>& pairs) {
  std::vector<seq2seq::RawPair> out;
  for (const auto& [l, p] : pairs) out.push_back({l, p});
  return out;
}

std::string Chunk(const fst::SymbolTable& letters, const channel::Chunk& c) {
  std::string s;
  for (Label l : c) s += letters.Symbol(l);
  return s;
}

py::tuple Scored(const fst::SymbolTable& t, const fst::ScoredSequence& s) {
  return py::make_tuple(t.Symbols(s.labels), s.weight.value());
}

struct Model {
  seq2seq::Seq2SeqParams params;
};

std::vector<seq2seq::Example> Examples(const Model& m, const std::vector<Pair>& pairs) {
  return seq2seq::ToExamples(Raw(pairs), *m.params.letters, *m.params.phones);
}

py::list History(const seq2seq::TrainResult& r) {
  py::list out;
  for (const auto& e : r.history) {
    out.append(py::dict(py::arg("epoch") = e.epoch, py::arg("lr") = e.lr, py::arg("train_loss") = e.train_loss,
                        py::arg("dev_loss") = e.dev_loss));
  }
  return out;
}

seq2seq::TrainingConfig Config(double lr, double lr_late, int lr_switch, int batch, double clip, uint64_t seed,
                               int threads) {
  seq2seq::TrainingConfig c;
  c.lr = lr;
  c.lr_late = lr_late;
  c.lr_switch_epoch = lr_switch;
  c.batch = batch;
  c.clip_norm = clip;
  c.seed = seed;
  c.threads = threads;
  return c;
}

// Rule set whose grapheme table also spells every word in `words`.
constraints::G2PRuleSet Rules(const std::string& text, const fst::SymbolTablePtr& phones,
                              const std::vector<std::string>& words) {
  std::set<std::string> chars;
  for (const auto& w : words) chars.merge(Chars(w));
  std::istringstream in(text);
  return constraints::ParseG2PRules(in, phones, {chars.begin(), chars.end()});
}

constraints::PronDict Dict(const std::map<std::string, std::vector<Phones>>& d, const fst::SymbolTable& phones) {
  constraints::PronDict out;
  for (const auto& [w, prons] : d)
    for (const auto& p : prons) out[w].push_back(phones.Ids(p));
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Probabilistic phone transcriptions from mismatched crowdsourcing";
  m.attr("__version__") = cli::Version();

  auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ContractError>(m, "ContractError", error.ptr());
  auto data = py::register_exception<DataError>(m, "DataError", error.ptr());
  py::register_exception<ParseError>(m, "ParseError", data.ptr());
  py::register_exception<NoPathError>(m, "NoPathError", data.ptr());
  py::register_exception<EmptyLatticeError>(m, "EmptyLatticeError", data.ptr());
  py::register_exception<NumericError>(m, "NumericError", error.ptr());

  py::class_<lm::BigramModel>(m, "BigramModel")
      .def_static(
          "from_text",
          [](const std::string& text) {
            std::istringstream in(text);
            return lm::ReadModel(in);
          },
          py::arg("text"))
      .def_static(
          "uniform", [](const std::vector<std::string>& symbols) { return lm::BigramModel::Uniform(TableOf({symbols.begin(), symbols.end()})); },
          py::arg("symbols"))
      .def("symbols", [](const lm::BigramModel& b) { return b.Symbols()->Symbols(b.Symbols()->Labels()); })
      .def(
          "prob",
          [](const lm::BigramModel& b, const std::optional<std::string>& prev, const std::optional<std::string>& next) {
            const Label c = prev ? b.Symbols()->Id(*prev) : lm::BigramModel::kBos;
            return b.Prob(c, next ? b.Symbols()->Id(*next) : b.Eos());
          },
          py::arg("prev"), py::arg("next"), "p(next | prev); None stands for <s> as prev and </s> as next")
      .def(
          "score", [](const lm::BigramModel& b, const Phones& seq) { return lm::ScoreSequence(b, seq); },
          py::arg("sequence"), "Natural-log probability with sentence markers")
      .def("to_text", [](const lm::BigramModel& b) {
        std::ostringstream out;
        lm::WriteModel(b, out);
        return out.str();
      });

  m.def(
      "train_bigram",
      [](const std::vector<Phones>& corpus, std::optional<std::vector<std::string>> symbols,
         const std::string& smoothing) {
        std::set<std::string> vocab;
        if (symbols) vocab.insert(symbols->begin(), symbols->end());
        else
          for (const auto& s : corpus) vocab.insert(s.begin(), s.end());
        return lm::TrainBigram(corpus, TableOf(vocab), lm::ParseSmoothing(smoothing));
      },
      py::arg("corpus"), py::arg("symbols") = py::none(), py::arg("smoothing") = "witten-bell");

  py::class_<channel::ChannelModel>(m, "ChannelModel")
      .def(
          "prob",
          [](const channel::ChannelModel& c, const std::string& phone, const std::string& chunk) {
            channel::Chunk ids;
            for (const auto& ch : util::Utf8Chars(chunk)) ids.push_back(c.Letters()->Id(ch));
            return c.Prob(c.Phones()->Id(phone), ids);
          },
          py::arg("phone"), py::arg("chunk"))
      .def("emissions",
           [](const channel::ChannelModel& c) {
             std::map<std::string, std::map<std::string, double>> out;
             for (const auto& [p, pmf] : c.Emissions())
               for (const auto& [chunk, prob] : pmf) out[c.Phones()->Symbol(p)][Chunk(*c.Letters(), chunk)] = prob;
             return out;
           })
      .def("prune", &channel::PruneChannel, py::arg("min_prob"))
      .def("to_tsv", [](const channel::ChannelModel& c) {
        std::ostringstream out;
        channel::WriteChannel(c, out);
        return out.str();
      });

  m.def(
      "train_channel",
      [](const std::vector<Pair>& pairs, int iterations, int max_chunk, uint64_t seed, int threads) {
        std::set<std::string> letters, phones;
        for (const auto& [l, p] : pairs) letters.merge(Chars(l)), phones.insert(p.begin(), p.end());
        const auto lt = TableOf(letters), pt = TableOf(phones);
        std::vector<channel::AlignedPair> aligned;
        for (const auto& [l, p] : pairs) aligned.push_back({pt->Ids(p), channel::TranscriptLetters(l, *lt)});
        channel::EmOptions opts;
        opts.iterations = iterations;
        opts.max_chunk = max_chunk;
        opts.seed = seed;
        opts.threads = threads;
        auto r = channel::TrainChannelEm(aligned, pt, lt, opts);
        return py::make_tuple(std::move(r.model), r.log_likelihood);
      },
      py::arg("pairs"), py::arg("iterations") = 25, py::arg("max_chunk") = channel::kMaxChunk, py::arg("seed") = 0,
      py::arg("threads") = 1, "EM on (letters, phones) pairs; returns (model, log-likelihood per iteration)");

  py::class_<channel::PtLattice>(m, "PtLattice")
      .def(
          "best",
          [](const channel::PtLattice& l, const std::string& semiring) {
            return Scored(*l.Phones(), channel::BestPathPt(l, fst::ParseSemiring(semiring)));
          },
          py::arg("semiring") = "tropical", "(phones, -log weight) of the best string")
      .def(
          "n_best",
          [](const channel::PtLattice& l, int n) {
            py::list out;
            for (const auto& s : fst::ShortestPath(l.Fst(), n)) out.append(Scored(*l.Phones(), s));
            return out;
          },
          py::arg("n"))
      .def("num_states", [](const channel::PtLattice& l) { return l.Fst().NumStates(); })
      .def("to_text", [](const channel::PtLattice& l) { return fst::ToText(l.Fst()); });

  m.def(
      "decode_pt",
      [](const std::vector<std::string>& transcripts, const channel::ChannelModel& ch, const lm::BigramModel& phone_lm,
         const lm::BigramModel* letter_lm, std::optional<int> max_phones, double prune_mass) {
        const auto cn = channel::MergeTranscripts({"utt", transcripts}, ch.Letters(), prune_mass);
        return channel::DecodePt(cn, ch, letter_lm, phone_lm, {max_phones});
      },
      py::arg("transcripts"), py::arg("channel"), py::arg("phone_lm"), py::arg("letter_lm") = nullptr,
      py::arg("max_phones") = py::none(), py::arg("prune_mass") = 1.0,
      "Merges one utterance's transcripts and decodes them into a phone lattice");

  m.def(
      "constrain_inventory",
      [](const channel::PtLattice& l, const Phones& inventory) {
        return constraints::ConstrainPhonemeInventory(l, constraints::ParseInventory(inventory, *l.Phones()));
      },
      py::arg("lattice"), py::arg("inventory"));

  m.def(
      "constrain_lexicon",
      [](const channel::PtLattice& l, const std::string& rules, const std::vector<std::string>& words,
         const std::map<std::string, std::vector<Phones>>& pron_dict) {
        std::vector<std::string> vocab = words;
        for (const auto& [w, p] : pron_dict)
          if (std::find(vocab.begin(), vocab.end(), w) == vocab.end()) vocab.push_back(w);
        const auto r = Rules(rules, l.Phones(), vocab);
        const auto lexicon = pron_dict.empty() ? constraints::G2pToFst(r)
                                               : constraints::BuildDictFst(Dict(pron_dict, *l.Phones()), r, words).fst;
        return constraints::ConstrainLexicon(l, lexicon, constraints::BuildWordLm(vocab, r.Graphemes()).fst, true);
      },
      py::arg("lattice"), py::arg("rules"), py::arg("words"), py::arg("pron_dict") = std::map<std::string, std::vector<Phones>>{},
      "Keeps phone strings spelled by word sequences; rules is the text of a G2P rule file");

  m.def(
      "constrain_wlm",
      [](const channel::PtLattice& l, const std::string& rules, const lm::BigramModel& word_lm,
         const std::map<std::string, std::vector<Phones>>& pron_dict) {
        const auto vocab = word_lm.Symbols()->Symbols(word_lm.Symbols()->Labels());
        const auto r = Rules(rules, l.Phones(), vocab);
        const auto lexicon = pron_dict.empty() ? constraints::G2pToFst(r)
                                               : constraints::BuildDictFst(Dict(pron_dict, *l.Phones()), r, vocab).fst;
        return constraints::ConstrainLexicon(l, lexicon, constraints::WordBigramToGraphemeFsa(word_lm, r.Graphemes()).fst,
                                             false);
      },
      py::arg("lattice"), py::arg("rules"), py::arg("word_lm"),
      py::arg("pron_dict") = std::map<std::string, std::vector<Phones>>{},
      "Weights phone strings by a word bigram over their spellings");

  py::class_<Model>(m, "Seq2Seq")
      .def_static(
          "train",
          [](const std::vector<Pair>& train, const std::vector<Pair>& dev, int hidden, int layers, int epochs, int batch,
             double lr, double lr_late, int lr_switch, double init_range, double clip, uint64_t seed, int threads) {
            std::vector<Pair> all = train;
            all.insert(all.end(), dev.begin(), dev.end());
            const auto raw = Raw(all);
            Model out{seq2seq::InitParams(seq2seq::LetterTable(raw), seq2seq::PhoneTable(raw), {hidden, layers}, seed,
                                          init_range)};
            auto config = Config(lr, lr_late, lr_switch, batch, clip, seed, threads);
            config.init_range = init_range;
            config.max_epochs = epochs;
            auto r = seq2seq::Train(out.params, Examples(out, train), Examples(out, dev), config);
            out.params = std::move(r.params);
            return py::make_tuple(std::move(out), History(r));
          },
          py::arg("train"), py::arg("dev"), py::arg("hidden") = 100, py::arg("layers") = 2, py::arg("epochs") = 50,
          py::arg("batch") = 128, py::arg("lr") = 0.4, py::arg("lr_late") = 0.2, py::arg("lr_switch") = 8,
          py::arg("init_range") = 0.1, py::arg("clip") = 5.0, py::arg("seed") = 0, py::arg("threads") = 1,
          "Returns (model, per-epoch history)")
      .def_static(
          "from_text",
          [](const std::string& text) {
            std::istringstream in(text);
            return Model{seq2seq::ReadCheckpoint(in)};
          },
          py::arg("text"))
      .def("to_text",
           [](const Model& s) {
             std::ostringstream out;
             seq2seq::WriteCheckpoint(s.params, out);
             return out.str();
           })
      .def(
          "adapt",
          [](const Model& s, const std::vector<Pair>& data, const std::vector<Pair>& dev, int epochs, int batch,
             double lr_late, double clip, uint64_t seed) {
            auto r = seq2seq::Adapt(s.params, Examples(s, data), Examples(s, dev),
                                    Config(lr_late, lr_late, 0, batch, clip, seed, 1), epochs);
            return py::make_tuple(Model{std::move(r.params)}, History(r));
          },
          py::arg("data"), py::arg("dev") = std::vector<Pair>{}, py::arg("epochs") = 5, py::arg("batch") = 128,
          py::arg("lr_late") = 0.2, py::arg("clip") = 5.0, py::arg("seed") = 0)
      .def(
          "loss", [](const Model& s, const std::vector<Pair>& pairs) {
            return seq2seq::LossAndGradients(s.params, Examples(s, pairs), nullptr);
          },
          py::arg("pairs"), "Mean teacher-forced negative log-likelihood")
      .def(
          "decode",
          [](const Model& s, const std::string& letters, const lm::BigramModel* lm, int beam, int max_len) {
            const auto r = seq2seq::BeamDecode(s.params, channel::TranscriptLetters(letters, *s.params.letters), lm,
                                               beam, max_len);
            return py::make_tuple(s.params.phones->Symbols(r.phones), r.score);
          },
          py::arg("letters"), py::arg("lm") = nullptr, py::arg("beam") = 8, py::arg("max_len") = 64,
          "(phones, fused log score) from beam search")
      .def("num_parameters", [](const Model& s) { return s.params.NumParameters(); });

  m.def(
      "align",
      [](const Phones& hyp, const Phones& ref) {
        const auto a = eval::Align(hyp, ref);
        return py::dict(py::arg("matches") = a.matches, py::arg("substitutions") = a.substitutions,
                        py::arg("deletions") = a.deletions, py::arg("insertions") = a.insertions,
                        py::arg("ref_length") = a.ref_length);
      },
      py::arg("hyp"), py::arg("ref"));
  m.def(
      "phone_error_rate",
      [](const std::vector<Phones>& hyps, const std::vector<Phones>& refs, bool rounded) {
        const auto pairs = eval::PairByLine(hyps, refs);
        return rounded ? eval::PhoneErrorRate(pairs) : eval::PhoneErrorRateExact(pairs);
      },
      py::arg("hyps"), py::arg("refs"), py::arg("rounded") = true, "Pooled PER in percent");
  m.def("relative_reduction", &eval::RelativeReduction, py::arg("baseline"), py::arg("improved"));

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = cli::Run(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs a ptforge subcommand in-process; returns (exit code, stdout, stderr)");
}
