#include "pihc/sin_tout.hpp"

#include <algorithm>
#include <cstdint>
#include <map>

#include "pihc/matching.hpp"

namespace pihc {

const char* to_string(FailStage stage) {
  switch (stage) {
    case FailStage::AOutsideWindow: return "a_outside_window";
    case FailStage::NotHandsome: return "not_handsome";
    case FailStage::PathBuildFailed: return "path_build_failed";
    case FailStage::MatchingFailed: return "matching_failed";
    case FailStage::HCNotFound: return "hc_not_found";
  }
  return "unknown";
}

IntMatrix cyclic_two_matrix(int dim) {
  if (dim < 2) throw std::invalid_argument("cyclic choice matrix needs dim >= 2");
  IntMatrix m(dim);
  for (int i = 0; i < dim; ++i) {
    m.at(i, (i + 1) % dim) = 2;
    m.at(i, (i + dim - 1) % dim) = 2;
  }
  return m;
}

namespace {

// distinct uniform picks from bins[j] excluding self when it lives there
std::vector<int> pick_distinct(const std::vector<int>& bin, int self_pos, int count, Rng& rng) {
  const int avail = static_cast<int>(bin.size()) - (self_pos >= 0 ? 1 : 0);
  std::vector<int> out;
  out.reserve(count);
  for (std::uint64_t raw : rng.sample_distinct(avail, count)) {
    int idx = static_cast<int>(raw);
    if (self_pos >= 0 && idx >= self_pos) ++idx;
    out.push_back(bin[idx]);
  }
  return out;
}

}  // namespace

SinToutInstance sample_sin_tout(const std::vector<std::vector<int>>& bins, const IntMatrix& s,
                                const IntMatrix& t, Rng& rng) {
  const int k = static_cast<int>(bins.size());
  if (k == 0) throw std::invalid_argument("need at least one bin");
  if (s.dim() != k || t.dim() != k) throw std::invalid_argument("matrix dimension != bin count");

  SinToutInstance inst;
  inst.k = k;
  inst.bins = bins;
  inst.s_counts = s;
  inst.t_counts = t;

  std::size_t n = 0;
  for (const auto& bin : bins) n += bin.size();
  inst.bin_of.assign(n, -1);
  std::vector<int> pos_in_bin(n, -1);
  for (int i = 0; i < k; ++i) {
    for (int pos = 0; pos < static_cast<int>(bins[i].size()); ++pos) {
      const int v = bins[i][pos];
      if (v < 0 || v >= static_cast<int>(n) || inst.bin_of[v] != -1)
        throw std::invalid_argument("bins must partition 0..n-1");
      inst.bin_of[v] = i;
      pos_in_bin[v] = pos;
    }
  }

  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      const int avail = static_cast<int>(bins[j].size()) - (i == j ? 1 : 0);
      if (s.at(i, j) < 0 || t.at(i, j) < 0) throw std::invalid_argument("negative choice count");
      if (s.at(i, j) > avail || t.at(i, j) > avail)
        throw BinTooSmall("bin " + std::to_string(j) + " cannot supply " +
                          std::to_string(std::max(s.at(i, j), t.at(i, j))) + " choices");
    }
  }

  inst.choices.resize(n);
  for (int i = 0; i < k; ++i) {
    for (int v : bins[i]) {
      VertexChoices& ch = inst.choices[v];
      ch.tails.resize(k);
      ch.heads.resize(k);
      for (int j = 0; j < k; ++j) {
        const int self = i == j ? pos_in_bin[v] : -1;
        ch.tails[j] = pick_distinct(bins[j], self, s.at(i, j), rng);
        ch.heads[j] = pick_distinct(bins[j], self, t.at(i, j), rng);
      }
    }
  }
  return inst;
}

LabeledDigraph instance_digraph(const SinToutInstance& inst) {
  std::map<std::pair<int, int>, std::uint8_t> merged;
  for (int v = 0; v < inst.n(); ++v) {
    for (const auto& pool : inst.choices[v].tails)
      for (int tail : pool) merged[{tail, v}] |= LabelIn;
    for (const auto& pool : inst.choices[v].heads)
      for (int head : pool) merged[{v, head}] |= LabelOut;
  }
  std::vector<Arc> arcs;
  arcs.reserve(merged.size());
  for (const auto& [pair, labels] : merged)
    arcs.push_back({pair.first, pair.second, labels});
  return LabeledDigraph(inst.n(), std::move(arcs));
}

BipartiteTwoOut sample_walkup(int m, Rng& rng) {
  if (m < 2) throw std::invalid_argument("two distinct picks need m >= 2");
  BipartiteTwoOut g;
  g.left_picks.resize(m);
  g.right_picks.resize(m);
  for (int u = 0; u < m; ++u)
    for (std::uint64_t w : rng.sample_distinct(m, 2)) g.left_picks[u].push_back(static_cast<int>(w));
  for (int w = 0; w < m; ++w)
    for (std::uint64_t u : rng.sample_distinct(m, 2)) g.right_picks[w].push_back(static_cast<int>(u));
  return g;
}

std::optional<std::vector<int>> find_perfect_matching(const BipartiteTwoOut& g) {
  if (g.left_picks.size() != g.right_picks.size())
    throw std::invalid_argument("bipartite sides differ in size");
  const int m = g.size();
  std::vector<std::vector<int>> adj = g.left_picks;
  for (int w = 0; w < m; ++w)
    for (int u : g.right_picks[w]) adj[u].push_back(w);
  for (auto& lst : adj) {
    std::sort(lst.begin(), lst.end());
    lst.erase(std::unique(lst.begin(), lst.end()), lst.end());
  }
  MatchingResult match = max_bipartite_matching(adj, m);
  if (!match.perfect()) return std::nullopt;
  return std::move(match.left_match);
}

DirectionSplit split_two_bins(const SinToutInstance& inst) {
  if (inst.k != 2) throw std::invalid_argument("direction split needs exactly two bins");
  for (int i = 0; i < 2; ++i) {
    if (inst.s_counts.at(i, i) != 0 || inst.t_counts.at(i, i) != 0 ||
        inst.s_counts.at(i, 1 - i) != 2 || inst.t_counts.at(i, 1 - i) != 2)
      throw std::invalid_argument("direction split needs choice counts (0 2; 2 0)");
  }
  std::vector<int> pos(inst.n(), -1);
  for (const auto& bin : inst.bins)
    for (int p = 0; p < static_cast<int>(bin.size()); ++p) pos[bin[p]] = p;

  auto project = [&](const std::vector<int>& vs) {
    std::vector<int> out;
    out.reserve(vs.size());
    for (int v : vs) out.push_back(pos[v]);
    return out;
  };

  DirectionSplit split;
  for (int u : inst.bins[0]) {
    split.forward.left_picks.push_back(project(inst.choices[u].heads[1]));
    split.backward.right_picks.push_back(project(inst.choices[u].tails[1]));
  }
  for (int w : inst.bins[1]) {
    split.forward.right_picks.push_back(project(inst.choices[w].tails[0]));
    split.backward.left_picks.push_back(project(inst.choices[w].heads[0]));
  }
  return split;
}

Result<PathFamily> chain_matchings(const SinToutInstance& inst, const Pattern& p) {
  const int k = inst.k;
  if (k < 3) throw std::invalid_argument("chained construction needs k >= 3");
  if (static_cast<int>(p.length()) != k)
    throw std::invalid_argument("pattern length must equal bin count");
  const int m = static_cast<int>(inst.bins[0].size());
  for (const auto& bin : inst.bins)
    if (static_cast<int>(bin.size()) != m) throw std::invalid_argument("bins must be equal size");

  std::vector<int> pos(inst.n(), -1);
  for (const auto& bin : inst.bins)
    for (int i = 0; i < m; ++i) pos[bin[i]] = i;

  std::vector<int> next(inst.n(), -1);
  for (int step = 0; step + 1 < k; ++step) {
    const auto& lefts = inst.bins[step];
    const auto& rights = inst.bins[step + 1];
    const bool forward = p.at(step) == Dir::Forward;
    // union of both choice pools that realize an arc oriented as the pattern
    std::vector<std::vector<int>> adj(m);
    for (int li = 0; li < m; ++li) {
      const VertexChoices& ch = inst.choices[lefts[li]];
      for (int w : forward ? ch.heads[step + 1] : ch.tails[step + 1]) adj[li].push_back(pos[w]);
    }
    for (int ri = 0; ri < m; ++ri) {
      const VertexChoices& ch = inst.choices[rights[ri]];
      for (int u : forward ? ch.tails[step] : ch.heads[step]) adj[pos[u]].push_back(ri);
    }
    for (auto& lst : adj) {
      std::sort(lst.begin(), lst.end());
      lst.erase(std::unique(lst.begin(), lst.end()), lst.end());
    }
    MatchingResult match = max_bipartite_matching(adj, m);
    if (!match.perfect())
      return Failure{FailStage::MatchingFailed, step,
                     "no perfect matching between bins " + std::to_string(step) + " and " +
                         std::to_string(step + 1)};
    for (int li = 0; li < m; ++li) next[lefts[li]] = rights[match.left_match[li]];
  }

  PathFamily family;
  family.paths.reserve(m);
  for (int v : inst.bins[0]) {
    std::vector<int> path;
    path.reserve(k);
    for (int u = v; u != -1; u = next[u]) path.push_back(u);
    family.paths.push_back(std::move(path));
  }
  return family;
}

Result<CycleWitness> hc_on_contracted(const PathFamily& paths, const SinToutInstance& inst,
                                      const Pattern& p, Rng& rng, const SearchBudget& budget) {
  const int k = inst.k;
  if (static_cast<int>(p.length()) != k)
    throw std::invalid_argument("pattern length must equal bin count");
  const int m = static_cast<int>(paths.paths.size());
  if (m == 0) throw std::invalid_argument("empty path family");
  for (const auto& path : paths.paths)
    if (static_cast<int>(path.size()) != k)
      throw std::invalid_argument("every path must have one vertex per bin");

  // locate each bin-1 vertex's path (all are starts) and each end
  std::vector<int> start_path(inst.n(), -1), end_path(inst.n(), -1);
  for (int a = 0; a < m; ++a) {
    start_path[paths.paths[a].front()] = a;
    end_path[paths.paths[a].back()] = a;
  }

  // contracted arc a -> b means path a precedes path b: the wrap arc between
  // a's end (last bin) and b's start (first bin), oriented as the wrap step
  const bool wrap_forward = p.at(k - 1) == Dir::Forward;
  std::optional<std::vector<int>> order;
  if (m == 1) {
    // one path closes on itself when a wrap choice joins its two ends; the
    // contracted digraph cannot express that self-arc
    const auto& path = paths.paths[0];
    const VertexChoices& back = inst.choices[path.back()];
    const VertexChoices& front = inst.choices[path.front()];
    const auto& from_back = wrap_forward ? back.heads[0] : back.tails[0];
    const auto& from_front = wrap_forward ? front.tails[k - 1] : front.heads[k - 1];
    if (std::find(from_back.begin(), from_back.end(), path.front()) != from_back.end() ||
        std::find(from_front.begin(), from_front.end(), path.back()) != from_front.end())
      order = std::vector<int>{0};
  } else {
    std::vector<std::vector<int>> out_adj(m);
    for (int a = 0; a < m; ++a) {
      const VertexChoices& ch = inst.choices[paths.paths[a].back()];
      for (int w : wrap_forward ? ch.heads[0] : ch.tails[0]) {
        const int b = start_path[w];
        if (b != a) out_adj[a].push_back(b);
      }
    }
    for (int b = 0; b < m; ++b) {
      const VertexChoices& ch = inst.choices[paths.paths[b].front()];
      for (int w : wrap_forward ? ch.tails[k - 1] : ch.heads[k - 1]) {
        const int a = end_path[w];
        if (a != b) out_adj[a].push_back(b);
      }
    }
    for (auto& lst : out_adj) {
      std::sort(lst.begin(), lst.end());
      lst.erase(std::unique(lst.begin(), lst.end()), lst.end());
    }

    if (m <= 18) {
      std::vector<Arc> arcs;
      for (int a = 0; a < m; ++a)
        for (int b : out_adj[a]) arcs.push_back({a, b, LabelOut});
      order = exact_directed_hc(LabeledDigraph(m, std::move(arcs)));
    } else {
      order = heuristic_directed_hc(m, out_adj, rng, budget);
    }
  }
  if (!order)
    return Failure{FailStage::HCNotFound, -1, "no directed cycle through the contracted paths"};

  CycleWitness witness;
  witness.vertices.reserve(static_cast<std::size_t>(m) * k);
  witness.orientations.reserve(static_cast<std::size_t>(m) * k);
  for (int a : *order) {
    const auto& path = paths.paths[a];
    witness.vertices.insert(witness.vertices.end(), path.begin(), path.end());
    for (int i = 0; i < k; ++i) witness.orientations.push_back(p.at(i));
  }
  if (!verify_pi_hc(instance_digraph(inst), witness, p))
    throw std::logic_error("contracted construction produced an invalid cycle");
  return witness;
}

}  // namespace pihc
