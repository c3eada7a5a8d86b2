#include "ptforge/channel/channel_model.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <sstream>
#include <thread>

#include "ptforge/error.hpp"
#include "ptforge/util/text.hpp"

namespace ptforge::channel {

ChannelModel::ChannelModel(fst::SymbolTablePtr phones, fst::SymbolTablePtr letters,
                           std::map<Label, Pmf> emissions, double tolerance)
    : phones_(std::move(phones)), letters_(std::move(letters)) {
  if (!phones_ || !letters_) throw ContractError("ChannelModel: missing symbol table");
  for (auto& [phone, pmf] : emissions) {
    if (phone == fst::kEpsilon || !phones_->Contains(phone)) {
      throw ContractError("ChannelModel: bad phone id " + std::to_string(phone));
    }
    double total = 0;
    Pmf kept;
    for (const auto& [chunk, p] : pmf) {
      if (chunk.size() > static_cast<std::size_t>(kMaxChunk)) {
        throw ContractError("ChannelModel: chunk longer than 4 letters");
      }
      for (Label l : chunk) {
        if (l == fst::kEpsilon || !letters_->Contains(l)) throw ContractError("ChannelModel: bad letter id");
      }
      if (!(p >= 0.0 && p <= 1.0 + tolerance)) throw ContractError("ChannelModel: probability out of range");
      total += p;
      if (p > 0) kept.emplace(chunk, p);
    }
    if (std::abs(total - 1.0) > tolerance) {
      throw ContractError("ChannelModel: emissions of phone " + phones_->Symbol(phone) + " sum to " +
                          util::FormatDouble17(total));
    }
    emissions_.emplace(phone, std::move(kept));
  }
}

double ChannelModel::Prob(Label phone, const Chunk& chunk) const {
  auto it = emissions_.find(phone);
  if (it == emissions_.end()) return 0.0;
  auto jt = it->second.find(chunk);
  return jt == it->second.end() ? 0.0 : jt->second;
}

namespace {

// Letter positions reachable after i of n phones when there are m letters.
std::pair<int, int> Window(int i, int n, int m, int c) {
  return {std::max(0, m - c * (n - i)), std::min(m, c * i)};
}

// One trellis edge: phone i (1-based) covers letters [from, to).
struct Edge {
  int i, from, to;
  std::size_t param;
};

struct Trellis {
  int n, m;
  std::vector<Edge> edges;  // ordered by i
};

struct Params {
  std::vector<Label> phone;  // owner of each parameter
  std::vector<Chunk> chunk;
  std::vector<double> prob;
};

constexpr std::size_t kBlock = 64;

}  // namespace

EmResult TrainChannelEm(const std::vector<AlignedPair>& pairs, fst::SymbolTablePtr phones,
                        fst::SymbolTablePtr letters, const EmOptions& options) {
  if (pairs.empty()) throw ContractError("TrainChannelEm: no training pairs");
  if (options.iterations < 1) throw ContractError("TrainChannelEm: iterations must be positive");
  const int c = options.max_chunk;
  if (c < 1 || c > kMaxChunk) throw ContractError("TrainChannelEm: max_chunk must lie in 1..4");
  std::vector<std::string> bad;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto& p = pairs[k];
    if (p.phones.empty() || p.letters.empty()) throw ContractError("TrainChannelEm: empty sequence in pair " + std::to_string(k));
    if (p.letters.size() > static_cast<std::size_t>(c) * p.phones.size()) bad.push_back(std::to_string(k));
  }
  if (!bad.empty()) {
    throw DataError("more than " + std::to_string(c) + " letters per phone in training pairs: " + util::Join(bad, ", "));
  }

  Params params;
  std::map<std::pair<Label, Chunk>, std::size_t> index;
  std::vector<Trellis> trellises;
  trellises.reserve(pairs.size());
  for (const AlignedPair& p : pairs) {
    Trellis t{static_cast<int>(p.phones.size()), static_cast<int>(p.letters.size()), {}};
    for (int i = 1; i <= t.n; ++i) {
      const Label phone = p.phones[i - 1];
      const auto [lo0, hi0] = Window(i - 1, t.n, t.m, c);
      const auto [lo1, hi1] = Window(i, t.n, t.m, c);
      for (int from = lo0; from <= hi0; ++from) {
        for (int to = std::max(from, lo1); to <= std::min(hi1, from + c); ++to) {
          Chunk chunk(p.letters.begin() + from, p.letters.begin() + to);
          auto [it, fresh] = index.try_emplace({phone, chunk}, params.phone.size());
          if (fresh) {
            params.phone.push_back(phone);
            params.chunk.push_back(std::move(chunk));
          }
          t.edges.push_back({i, from, to, it->second});
        }
      }
    }
    trellises.push_back(std::move(t));
  }

  // Uniform over the chunk lengths seen for each phone, uniform within a
  // length, then jittered.
  const std::size_t num_params = params.phone.size();
  params.prob.assign(num_params, 0.0);
  {
    std::map<Label, std::map<std::size_t, int>> per_length;
    for (std::size_t q = 0; q < num_params; ++q) ++per_length[params.phone[q]][params.chunk[q].size()];
    std::mt19937_64 rng(options.seed);
    std::uniform_real_distribution<double> jitter(-1e-3, 1e-3);
    std::map<Label, double> totals;
    for (std::size_t q = 0; q < num_params; ++q) {
      const auto& lengths = per_length[params.phone[q]];
      params.prob[q] = (1.0 / lengths.size()) / lengths.at(params.chunk[q].size()) * (1.0 + jitter(rng));
      totals[params.phone[q]] += params.prob[q];
    }
    for (std::size_t q = 0; q < num_params; ++q) params.prob[q] /= totals[params.phone[q]];
  }

  const std::size_t num_blocks = (pairs.size() + kBlock - 1) / kBlock;
  std::vector<std::vector<double>> block_counts(num_blocks);
  std::vector<double> block_ll(num_blocks);
  std::vector<std::string> block_error(num_blocks);

  auto run_block = [&](std::size_t b) {
    std::vector<double>& counts = block_counts[b];
    counts.assign(num_params, 0.0);
    double ll = 0;
    std::vector<double> alpha, beta;
    for (std::size_t k = b * kBlock; k < std::min(pairs.size(), (b + 1) * kBlock); ++k) {
      const Trellis& t = trellises[k];
      const int width = t.m + 1;
      alpha.assign(static_cast<std::size_t>((t.n + 1) * width), 0.0);
      beta.assign(alpha.size(), 0.0);
      alpha[0] = 1.0;
      for (const Edge& e : t.edges) {
        alpha[e.i * width + e.to] += alpha[(e.i - 1) * width + e.from] * params.prob[e.param];
      }
      beta[t.n * width + t.m] = 1.0;
      for (auto it = t.edges.rbegin(); it != t.edges.rend(); ++it) {
        beta[(it->i - 1) * width + it->from] += params.prob[it->param] * beta[it->i * width + it->to];
      }
      const double z = alpha[t.n * width + t.m];
      if (!(z > 0.0) || !std::isfinite(z)) {
        block_error[b] = "training pair " + std::to_string(k) + " has likelihood " + util::FormatDouble17(z);
        return;
      }
      for (const Edge& e : t.edges) {
        counts[e.param] += alpha[(e.i - 1) * width + e.from] * params.prob[e.param] * beta[e.i * width + e.to] / z;
      }
      ll += std::log(z);
    }
    block_ll[b] = ll;
  };

  const int threads = std::max(1, std::min<int>(options.threads, static_cast<int>(num_blocks)));
  std::vector<double> history;
  for (int iter = 0; iter < options.iterations; ++iter) {
    std::fill(block_error.begin(), block_error.end(), std::string());
    if (threads == 1) {
      for (std::size_t b = 0; b < num_blocks; ++b) run_block(b);
    } else {
      std::atomic<std::size_t> next{0};
      std::vector<std::thread> pool;
      for (int w = 0; w < threads; ++w) {
        pool.emplace_back([&] {
          for (std::size_t b; (b = next++) < num_blocks;) run_block(b);
        });
      }
      for (auto& th : pool) th.join();
    }
    for (const std::string& e : block_error) {
      if (!e.empty()) throw NumericError("channel EM: " + e);
    }
    // Blocks are reduced in index order so the result does not depend on
    // the thread count.
    std::vector<double> counts(num_params, 0.0);
    double ll = 0;
    for (std::size_t b = 0; b < num_blocks; ++b) {
      for (std::size_t q = 0; q < num_params; ++q) counts[q] += block_counts[b][q];
      ll += block_ll[b];
    }
    history.push_back(ll);
    std::map<Label, double> totals;
    for (std::size_t q = 0; q < num_params; ++q) totals[params.phone[q]] += counts[q];
    for (std::size_t q = 0; q < num_params; ++q) params.prob[q] = counts[q] / totals[params.phone[q]];
  }

  std::map<Label, ChannelModel::Pmf> emissions;
  for (std::size_t q = 0; q < num_params; ++q) {
    emissions[params.phone[q]][params.chunk[q]] = params.prob[q];
  }
  return {ChannelModel(std::move(phones), std::move(letters), std::move(emissions), 1e-9), std::move(history)};
}

double SequenceLikelihood(const ChannelModel& m, const std::vector<Label>& phones,
                          const std::vector<Label>& letters) {
  const int n = static_cast<int>(phones.size()), len = static_cast<int>(letters.size());
  std::vector<double> alpha(len + 1, 0.0), next;
  alpha[0] = 1.0;
  for (int i = 0; i < n; ++i) {
    next.assign(len + 1, 0.0);
    for (int from = 0; from <= len; ++from) {
      if (alpha[from] == 0.0) continue;
      for (int to = from; to <= std::min(len, from + kMaxChunk); ++to) {
        const Chunk chunk(letters.begin() + from, letters.begin() + to);
        next[to] += alpha[from] * m.Prob(phones[i], chunk);
      }
    }
    alpha.swap(next);
  }
  return alpha[len];
}

fst::Wfst ChannelToFst(const ChannelModel& m) {
  fst::Wfst out(m.Phones(), m.Letters());
  const fst::StateId hub = out.AddState();
  out.SetStart(hub);
  out.SetFinal(hub, fst::Weight::One());
  for (const auto& [phone, pmf] : m.Emissions()) {
    for (const auto& [chunk, p] : pmf) {
      const fst::Weight w = fst::Weight::FromProb(p);
      if (chunk.empty()) {
        out.AddArc(hub, {phone, fst::kEpsilon, w, hub});
        continue;
      }
      fst::StateId src = hub;
      for (std::size_t k = 0; k < chunk.size(); ++k) {
        const fst::StateId dst = k + 1 == chunk.size() ? hub : out.AddState();
        out.AddArc(src, {k == 0 ? phone : fst::kEpsilon, chunk[k], k == 0 ? w : fst::Weight::One(), dst});
        src = dst;
      }
    }
  }
  return out;
}

ChannelModel PruneChannel(const ChannelModel& m, double min_prob) {
  if (!(min_prob >= 0 && min_prob < 1)) throw ContractError("PruneChannel: min_prob must lie in [0, 1)");
  std::map<Label, ChannelModel::Pmf> kept;
  for (const auto& [phone, pmf] : m.Emissions()) {
    const auto best = std::max_element(pmf.begin(), pmf.end(),
                                       [](const auto& a, const auto& b) { return a.second < b.second; });
    auto& out = kept[phone];
    double total = 0;
    for (const auto& [chunk, p] : pmf) {
      if (p < min_prob && chunk != best->first) continue;
      out.emplace(chunk, p);
      total += p;
    }
    for (auto& [chunk, p] : out) p /= total;
  }
  return ChannelModel(m.Phones(), m.Letters(), std::move(kept));
}

void WriteChannel(const ChannelModel& m, std::ostream& out) {
  for (const auto& [phone, pmf] : m.Emissions()) {
    for (const auto& [chunk, p] : pmf) {
      std::string text;
      for (Label l : chunk) text += m.Letters()->Symbol(l);
      out << m.Phones()->Symbol(phone) << '\t' << text << '\t' << util::FormatDouble9(p) << '\n';
    }
  }
}

ChannelModel ReadChannel(std::istream& in, fst::SymbolTablePtr phones, fst::SymbolTablePtr letters) {
  std::map<Label, ChannelModel::Pmf> emissions;
  int line_no = 0;
  for (const std::string& line : util::ReadLines(in)) {
    ++line_no;
    if (util::IsCommentLine(line) || util::Trim(line).empty()) continue;
    const std::vector<std::string> f = util::Split(line, '\t');
    if (f.size() != 3) throw ParseError("channel: expected phone<TAB>chunk<TAB>prob", line_no);
    const auto phone = phones->Find(f[0]);
    if (!phone || *phone == fst::kEpsilon) throw ParseError("channel: unknown phone '" + f[0] + "'", line_no);
    Chunk chunk;
    for (const std::string& ch : util::Utf8Chars(f[1])) {
      const auto l = letters->Find(ch);
      if (!l || *l == fst::kEpsilon) throw ParseError("channel: unknown letter '" + ch + "'", line_no);
      chunk.push_back(*l);
    }
    double p;
    try {
      p = util::ParseDouble(f[2]);
    } catch (const Error&) {
      throw ParseError("channel: bad probability '" + f[2] + "'", line_no);
    }
    if (!emissions[*phone].emplace(std::move(chunk), p).second) {
      throw ParseError("channel: duplicate entry", line_no);
    }
  }
  try {
    return ChannelModel(std::move(phones), std::move(letters), std::move(emissions), 1e-6);
  } catch (const ContractError& e) {
    throw DataError(e.what());
  }
}

}  // namespace ptforge::channel
