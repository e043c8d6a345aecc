#include "pihc/pipeline.hpp"

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <string>
#include <utility>

namespace pihc {

namespace {

std::vector<std::vector<int>> undirected_adjacency(const LabeledDigraph& d) {
  std::vector<std::vector<int>> adj(d.n());
  for (const Arc& a : d.arcs()) {
    adj[a.tail].push_back(a.head);
    adj[a.head].push_back(a.tail);
  }
  for (auto& list : adj) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }
  return adj;
}

// Breadth-first ball over a prebuilt undirected adjacency, bounded by radius
// and a visit cutoff. dist doubles as the visited stamp and must be reset by
// the caller for the returned vertices.
struct BallSearch {
  const std::vector<std::vector<int>>& adj;
  std::vector<int> dist;
  std::vector<int> parent;
  std::vector<int> order;

  explicit BallSearch(const std::vector<std::vector<int>>& a)
      : adj(a), dist(a.size(), -1), parent(a.size(), -1) {}

  // returns true when the cutoff truncated the search
  bool run(int source, int radius, int cutoff, int banned_from = -1, int banned_to = -1) {
    for (int v : order) dist[v] = -1;
    order.clear();
    dist[source] = 0;
    parent[source] = -1;
    order.push_back(source);
    bool truncated = false;
    for (std::size_t q = 0; q < order.size(); ++q) {
      const int u = order[q];
      if (dist[u] == radius) continue;
      for (int w : adj[u]) {
        if (dist[w] >= 0) continue;
        if ((u == banned_from && w == banned_to) || (u == banned_to && w == banned_from)) continue;
        if (static_cast<int>(order.size()) >= cutoff) {
          truncated = true;
          continue;
        }
        dist[w] = dist[u] + 1;
        parent[w] = u;
        order.push_back(w);
      }
    }
    return truncated;
  }
};

}  // namespace

std::vector<std::vector<int>> BinAssignment::members() const {
  std::vector<std::vector<int>> out(k_eff);
  for (int b = 0; b < k_eff; ++b) out[b].reserve(sizes[b]);
  for (int v = 0; v < n(); ++v) out[bin_of[v]].push_back(v);
  return out;
}

void BinAssignment::swap_vertices(int u, int v) {
  const int bu = bin_of[u];
  const int bv = bin_of[v];
  if (bu == bv) return;
  bin_of[u] = bv;
  bin_of[v] = bu;
  swap_log.push_back({u, bu, bv});
  swap_log.push_back({v, bv, bu});
}

BinAssignment assign_bins(int n, const Pattern& p) {
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  return assign_bins(order, p);
}

BinAssignment assign_bins(const std::vector<int>& vertex_order, const Pattern& p) {
  const int n = static_cast<int>(vertex_order.size());
  std::vector<char> seen(n, 0);
  for (int v : vertex_order) {
    if (v < 0 || v >= n || seen[v])
      throw std::invalid_argument("vertex order must be a permutation of 0..n-1");
    seen[v] = 1;
  }

  BinAssignment bins;
  switch (classify(p)) {
    case PatternClass::Alternating: {
      if (n % 2 != 0) throw DivisibilityError("alternating pattern needs an even vertex count");
      bins.k_eff = 4;
      const int q = n / 4;
      const int extra = (n % 4 == 2) ? 1 : 0;
      bins.sizes = {q + extra, q + extra, q, q};
      break;
    }
    case PatternClass::NonAlternating: {
      const int k = static_cast<int>(p.length());
      if (n % k != 0) throw DivisibilityError("pattern length must divide the vertex count");
      bins.k_eff = k;
      bins.sizes.assign(k, n / k);
      break;
    }
    default:
      throw std::invalid_argument("construction needs a primitive pattern of length >= 2");
  }

  bins.bin_of.assign(n, 0);
  int b = 0;
  int filled = 0;
  for (int v : vertex_order) {
    while (filled == bins.sizes[b]) {
      ++b;
      filled = 0;
    }
    bins.bin_of[v] = b;
    ++filled;
  }
  return bins;
}

VertexClassification classify_vertices(const LabeledDigraph& at_lower_edge,
                                       const BinAssignment& bins) {
  const int n = at_lower_edge.n();
  const int k = bins.k_eff;
  const int need = 4 * k + 2;

  VertexClassification out;
  out.k_eff = k;
  out.cls.assign(n, VertexClass::Good);
  out.d_out.assign(n, std::vector<int>(k, 0));
  out.d_in.assign(n, std::vector<int>(k, 0));

  for (const Arc& a : at_lower_edge.arcs()) {
    if (a.labels & LabelOut) ++out.d_out[a.tail][bins.bin_of[a.head]];
    if (a.labels & LabelIn) ++out.d_in[a.head][bins.bin_of[a.tail]];
  }

  for (int v = 0; v < n; ++v) {
    bool good = true;
    for (int b = 0; b < k && good; ++b)
      good = out.d_out[v][b] >= need && out.d_in[v][b] >= need;
    if (good) {
      ++out.good_count;
    } else if (at_lower_edge.total_degree(v) <= 4 * k + 2) {
      out.cls[v] = VertexClass::Dangerous;
      ++out.dangerous_count;
    } else {
      out.cls[v] = VertexClass::Bad;
      ++out.bad_count;
    }
  }
  return out;
}

std::pair<std::vector<int>, bool> undirected_ball(const LabeledDigraph& d, int v, int radius,
                                                  int cutoff) {
  const auto adj = undirected_adjacency(d);
  BallSearch bfs(adj);
  const bool truncated = bfs.run(v, radius, cutoff);
  return {bfs.order, truncated};
}

HandsomeReport check_handsome(const LabeledDigraph& d, const VertexClassification& cls) {
  const int n = d.n();
  const int k = cls.k_eff;
  const int radius = 10 * k;
  const int cutoff = 40 * k * k;

  HandsomeReport rep;
  const auto adj = undirected_adjacency(d);
  BallSearch bfs(adj);

  for (int v = 0; v < n && rep.h1; ++v) {
    const bool truncated = bfs.run(v, radius, cutoff);
    int non_good = 0;
    for (int u : bfs.order)
      if (u != v && !cls.good(u)) ++non_good;
    if (truncated && non_good < 4 * k) {
      rep.h1 = false;
      rep.h1_vertex = v;
      rep.message = "ball around vertex " + std::to_string(v) +
                    " hit the visit cutoff before the non-good count was settled";
    } else if (non_good >= 4 * k) {
      rep.h1 = false;
      rep.h1_vertex = v;
      rep.message = "vertex " + std::to_string(v) + " has " + std::to_string(non_good) +
                    " non-good vertices within distance " + std::to_string(radius);
    }
  }

  for (int v = 0; v < n && rep.h2; ++v) {
    if (cls.cls[v] != VertexClass::Dangerous) continue;
    const bool truncated = bfs.run(v, radius, cutoff);
    for (int u : bfs.order) {
      if (u != v && !cls.good(u)) {
        rep.h2 = false;
        rep.h2_vertex = v;
        rep.h2_witness = u;
        rep.message = "dangerous vertex " + std::to_string(v) + " has non-good vertex " +
                      std::to_string(u) + " within distance " + std::to_string(radius);
        break;
      }
    }
    if (rep.h2 && truncated) {
      rep.h2 = false;
      rep.h2_vertex = v;
      rep.message = "ball around dangerous vertex " + std::to_string(v) +
                    " hit the visit cutoff before its surroundings were settled";
    }
  }

  if (!rep.h1 || !rep.h2) return rep;
  rep.h3_checked = true;

  // cycle_state: 0 unknown, 1 on a short cycle, 2 certified off all of them
  std::vector<char> cycle_state(n, 0);
  BallSearch cyc(adj);
  auto short_cycle_through = [&](int x, std::vector<int>& cycle, bool& uncertain) -> bool {
    cycle.clear();
    uncertain = false;
    if (cycle_state[x] == 2) return false;
    for (int y : d.out_neighbors(x)) {
      if (d.has_arc(y, x)) {
        cycle = {x, y};
        cycle_state[x] = 1;
        return true;
      }
    }
    for (int y : adj[x]) {
      const bool truncated = cyc.run(x, radius - 1, cutoff, x, y);
      if (cyc.dist[y] >= 0 && cyc.dist[y] + 1 <= radius) {
        for (int u = y; u >= 0; u = cyc.parent[u]) cycle.push_back(u);
        std::reverse(cycle.begin(), cycle.end());
        cycle_state[x] = 1;
        return true;
      }
      if (truncated) {
        uncertain = true;
        return false;
      }
    }
    cycle_state[x] = 2;
    return false;
  };

  for (int v = 0; v < n && rep.h3; ++v) {
    if (cls.good(v)) continue;
    const bool truncated = bfs.run(v, radius, cutoff);
    if (truncated) {
      rep.h3 = false;
      rep.h3_witness = v;
      rep.message = "ball around non-good vertex " + std::to_string(v) +
                    " hit the visit cutoff before nearby cycles were settled";
      break;
    }
    for (int x : bfs.order) {
      std::vector<int> cycle;
      bool uncertain = false;
      if (short_cycle_through(x, cycle, uncertain)) {
        rep.h3 = false;
        rep.h3_witness = v;
        rep.h3_cycle = cycle;
        rep.message = "cycle of length " + std::to_string(cycle.size()) + " through vertex " +
                      std::to_string(x) + " lies within distance " + std::to_string(radius) +
                      " of non-good vertex " + std::to_string(v);
        break;
      }
      if (uncertain) {
        rep.h3 = false;
        rep.h3_witness = v;
        rep.message = "cycle search near vertex " + std::to_string(x) +
                      " hit the visit cutoff";
        break;
      }
    }
  }
  return rep;
}

LabeledDigraph DStar::combined() const {
  std::vector<Arc> arcs(at_lower_edge.arcs().begin(), at_lower_edge.arcs().end());
  arcs.insert(arcs.end(), disclosed.begin(), disclosed.end());
  return LabeledDigraph(at_lower_edge.n(), std::move(arcs));
}

Result<DStar> expose_until_A(const ProcessTrace& trace, const VertexClassification& cls,
                             DegreeVariant variant) {
  const int n = trace.n();
  const auto [p_lo, p_hi] = p_window(variant, n);
  const std::int64_t m_lower = trace.count_at_or_below(split_round_p(p_lo));
  const std::int64_t m_upper = trace.count_at_or_below(split_round_p(p_hi));
  const std::int64_t m_star = trace.hitting_index(variant);

  if (!(m_lower < m_star && m_star < m_upper))
    return Failure{FailStage::AOutsideWindow, -1,
                   "degree event hits at arc " + std::to_string(m_star) +
                       " outside the open window (" + std::to_string(m_lower) + ", " +
                       std::to_string(m_upper) + ")"};

  DStar out{trace.prefix_at(p_lo), {}, m_lower, m_star, m_upper};
  const double s_star = trace.arrival_stamp_at(m_star - 1);
  for (std::int64_t i = m_lower; i < m_star; ++i) {
    const auto [tail, head] = trace.arrival(i);
    if (cls.cls[tail] != VertexClass::Dangerous && cls.cls[head] != VertexClass::Dangerous)
      continue;
    std::uint8_t labels = 0;
    if (trace.x_in(tail, head) <= s_star) labels |= LabelIn;
    if (trace.x_out(tail, head) <= s_star) labels |= LabelOut;
    out.disclosed.push_back(
        {static_cast<std::int32_t>(tail), static_cast<std::int32_t>(head), labels});
  }
  return out;
}

ExposureState::ExposureState(const LabeledDigraph& at_lower_edge)
    : d_(&at_lower_edge), discovered_(at_lower_edge.n(), 0) {}

std::span<const std::int32_t> ExposureState::out_neighbors(int v) const {
  if (!discovered(v)) throw std::logic_error("neighbour read of an undiscovered vertex");
  return d_->out_neighbors(v);
}

std::span<const std::int32_t> ExposureState::in_neighbors(int v) const {
  if (!discovered(v)) throw std::logic_error("neighbour read of an undiscovered vertex");
  return d_->in_neighbors(v);
}

int ExposureState::undiscovered_count(int v, int bin, bool outgoing,
                                      const BinAssignment& bins) const {
  if (discovered(v)) return 0;
  int count = 0;
  if (outgoing) {
    for (int h : d_->out_neighbors(v))
      if (!discovered(h) && bins.bin_of[h] == bin && (d_->labels(v, h) & LabelOut)) ++count;
  } else {
    for (int t : d_->in_neighbors(v))
      if (!discovered(t) && bins.bin_of[t] == bin && (d_->labels(t, v) & LabelIn)) ++count;
  }
  return count;
}

std::vector<int> ExposureState::undiscovered_pool(int v, int bin, bool outgoing,
                                                  const BinAssignment& bins) const {
  if (!extraction_)
    throw std::logic_error("endpoint read of undiscovered arcs before extraction");
  if (discovered(v)) throw std::logic_error("choice pool requested for a discovered vertex");
  ++pool_reads_;
  std::vector<int> pool;
  if (outgoing) {
    for (int h : d_->out_neighbors(v))
      if (!discovered(h) && bins.bin_of[h] == bin && (d_->labels(v, h) & LabelOut))
        pool.push_back(h);
  } else {
    for (int t : d_->in_neighbors(v))
      if (!discovered(t) && bins.bin_of[t] == bin && (d_->labels(t, v) & LabelIn))
        pool.push_back(t);
  }
  return pool;
}

namespace {

// One candidate family for the centre step: pick w1 from *first and w3 from
// *second (distinct vertices), with the pattern boundary at 0-based jj.
struct CentreCase {
  int jj;
  const std::vector<int>* first;
  const std::vector<int>* second;
  std::uint64_t count = 0;
};

}  // namespace

Result<PathCollection> build_path_collection(const DStar& dstar, const VertexClassification& cls,
                                             BinAssignment& bins, const Pattern& p, Rng& rng,
                                             ExposureState& state) {
  const int n = dstar.at_lower_edge.n();
  const int k = bins.k_eff;
  const PatternClass pc = classify(p);
  const Pattern p_eff = pc == PatternClass::Alternating ? parse_pattern("><><") : p;
  const bool extend_first = pc == PatternClass::Alternating && n % 4 == 2;
  const int last = 6 * k;

  for (int v = 0; v < n; ++v)
    if (!cls.good(v)) state.discover_vertex(v);

  std::vector<std::vector<int>> extra_out(n), extra_in(n);
  for (const Arc& a : dstar.disclosed) {
    extra_out[a.tail].push_back(a.head);
    extra_in[a.head].push_back(a.tail);
  }

  auto find_boundary = [&](Dir a, Dir b) -> int {
    for (int jj = 0; jj < k; ++jj)
      if (p_eff.at(jj) == a && p_eff.at(jj + 1) == b) return jj;
    return -1;
  };
  const int jj_out_pair = find_boundary(Dir::Backward, Dir::Forward);
  const int jj_in_pair = find_boundary(Dir::Forward, Dir::Backward);
  const int jj_chain_fwd = find_boundary(Dir::Forward, Dir::Forward);
  const int jj_chain_bwd = find_boundary(Dir::Backward, Dir::Backward);

  std::vector<char> in_path(n, 0), used(n, 0), flag(n, 0);
  std::vector<int> touched;

  // new path vertex adjacent to anchor with the arc oriented dir between
  // them; toward_next means the new vertex follows the anchor on the path
  auto pick_extension = [&](int anchor, Dir dir, bool toward_next, int want_bin) -> int {
    const bool use_out = (dir == Dir::Forward) == toward_next;
    const auto span = use_out ? state.out_neighbors(anchor) : state.in_neighbors(anchor);
    auto ok = [&](int x) {
      return cls.good(x) && !in_path[x] && !used[x] && bins.bin_of[x] == want_bin;
    };
    std::uint64_t count = 0;
    for (int x : span)
      if (ok(x)) ++count;
    if (count == 0) return -1;
    std::uint64_t pick = rng.next_below(count);
    for (int x : span)
      if (ok(x) && pick-- == 0) return x;
    return -1;
  };

  auto build_one = [&](int w2, bool fallback) -> Result<PathRecord> {
    if (fallback) state.discover_vertex(w2);

    std::vector<int> out_nbrs, in_nbrs;
    auto consider = [&](int x, std::vector<int>& side) {
      if (cls.good(x) && !in_path[x]) side.push_back(x);
    };
    for (int h : state.out_neighbors(w2)) consider(h, out_nbrs);
    for (int t : state.in_neighbors(w2)) consider(t, in_nbrs);
    for (int h : extra_out[w2]) consider(h, out_nbrs);
    for (int t : extra_in[w2]) consider(t, in_nbrs);

    auto pair_count = [&](const std::vector<int>& a, const std::vector<int>& b) -> std::uint64_t {
      for (int x : b) flag[x] = 1;
      std::uint64_t both = 0;
      for (int x : a) both += flag[x];
      for (int x : b) flag[x] = 0;
      return static_cast<std::uint64_t>(a.size()) * b.size() - both;
    };

    std::vector<CentreCase> cases;
    auto add_case = [&](int jj, const std::vector<int>& a, const std::vector<int>& b) {
      if (jj < 0) return;
      const std::uint64_t c = pair_count(a, b);
      if (c > 0) cases.push_back({jj, &a, &b, c});
    };
    // both arcs out of the centre, both into it, then the two chain shapes
    add_case(jj_out_pair, out_nbrs, out_nbrs);
    add_case(jj_in_pair, in_nbrs, in_nbrs);
    add_case(jj_chain_fwd, in_nbrs, out_nbrs);
    add_case(jj_chain_bwd, out_nbrs, in_nbrs);

    std::uint64_t total = 0;
    for (const auto& c : cases) total += c.count;
    if (total == 0)
      return Failure{FailStage::PathBuildFailed, w2,
                     "vertex " + std::to_string(w2) +
                         " has no usable pair of good unused neighbours"};

    std::uint64_t r = rng.next_below(total);
    int jj = 0, w1 = -1, w3 = -1;
    for (const auto& c : cases) {
      if (r >= c.count) {
        r -= c.count;
        continue;
      }
      jj = c.jj;
      for (int x : *c.second) flag[x] = 1;
      for (int a : *c.first) {
        const std::uint64_t row = c.second->size() - (flag[a] ? 1 : 0);
        if (r >= row) {
          r -= row;
          continue;
        }
        w1 = a;
        for (int b : *c.second) {
          if (b == a) continue;
          if (r-- == 0) {
            w3 = b;
            break;
          }
        }
        break;
      }
      for (int x : *c.second) flag[x] = 0;
      break;
    }

    const int t1 = k + jj, t2 = t1 + 1, t3 = t1 + 2;
    std::vector<int> w(last + 1, -1);
    w[t1] = w1;
    w[t2] = w2;
    w[t3] = w3;
    touched.assign({w1, w2, w3});
    used[w1] = used[w2] = used[w3] = 1;

    // target bins: position t lands in bin t mod k, except that the three
    // seeded vertices keep their bins until the closing swaps and the three
    // swap partners are grown directly inside the seeds' current bins
    std::vector<int> alpha(last + 1);
    for (int t = 0; t <= last; ++t) alpha[t] = t % k;
    const int seed_pos[3] = {t1, t2, t3};
    int seed_bin[3], swap_pos[3];
    for (int i = 0; i < 3; ++i) {
      seed_bin[i] = bins.bin_of[w[seed_pos[i]]];
      swap_pos[i] = seed_bin[i] + (i + 3) * k;
      alpha[swap_pos[i]] = (jj + i) % k;
    }

    auto stuck = [&](int at) -> Failure {
      for (int x : touched) used[x] = 0;
      return Failure{FailStage::PathBuildFailed, at,
                     "path through vertex " + std::to_string(w2) +
                         " cannot extend past vertex " + std::to_string(at)};
    };

    for (int t = t3; t < last; ++t) {
      state.discover_vertex(w[t]);
      const int x = pick_extension(w[t], p_eff.at(t % k), true, alpha[t + 1]);
      if (x < 0) return stuck(w[t]);
      w[t + 1] = x;
      used[x] = 1;
      touched.push_back(x);
    }
    for (int t = t1; t >= 1; --t) {
      state.discover_vertex(w[t]);
      const int x = pick_extension(w[t], p_eff.at((t - 1) % k), false, alpha[t - 1]);
      if (x < 0) return stuck(w[t]);
      w[t - 1] = x;
      used[x] = 1;
      touched.push_back(x);
    }

    for (int i = 0; i < 3; ++i)
      if (seed_bin[i] != (jj + i) % k) bins.swap_vertices(w[seed_pos[i]], w[swap_pos[i]]);
    for (int t = 0; t <= last; ++t)
      if (bins.bin_of[w[t]] != t % k)
        throw std::logic_error("path bin accounting failed after swaps");

    for (int x : touched) {
      used[x] = 0;
      in_path[x] = 1;
    }
    return PathRecord{std::move(w), w2, fallback};
  };

  auto extend_by_two = [&](PathRecord& rec) -> std::optional<Failure> {
    int anchor = rec.vertices.back();
    state.discover_vertex(anchor);
    const int x1 = pick_extension(anchor, p_eff.at(last % k), true, (last + 1) % k);
    if (x1 < 0)
      return Failure{FailStage::PathBuildFailed, anchor,
                     "long path cannot take its first extra step"};
    in_path[x1] = 1;
    rec.vertices.push_back(x1);
    state.discover_vertex(x1);
    // the second extra vertex returns to the first bin so the contracted
    // remainder stays equitable
    const int x2 = pick_extension(x1, p_eff.at((last + 1) % k), true, 0);
    if (x2 < 0)
      return Failure{FailStage::PathBuildFailed, x1,
                     "long path cannot take its second extra step"};
    in_path[x2] = 1;
    rec.vertices.push_back(x2);
    return std::nullopt;
  };

  std::vector<int> centres;
  bool fallback = false;
  for (int v = 0; v < n; ++v)
    if (!cls.good(v)) centres.push_back(v);
  if (centres.empty()) {
    centres.push_back(rng.next_int(n));
    fallback = true;
  }

  PathCollection collection;
  collection.paths.reserve(centres.size());
  for (std::size_t i = 0; i < centres.size(); ++i) {
    auto one = build_one(centres[i], fallback);
    if (!one) return one.error();
    collection.paths.push_back(std::move(one.value()));
    if (i == 0 && extend_first) {
      if (auto fail = extend_by_two(collection.paths.front())) return *fail;
    }
  }
  return collection;
}

std::vector<std::vector<int>> ContractedDigraph::members() const {
  std::vector<std::vector<int>> out(k);
  for (int c = 0; c < n_prime; ++c) out[bin_of[c]].push_back(c);
  return out;
}

ContractedDigraph contract(const PathCollection& paths, const BinAssignment& bins) {
  const int n = bins.n();
  const int k = bins.k_eff;

  ContractedDigraph cd;
  cd.k = k;
  cd.id_of.assign(n, -1);
  std::vector<int> path_of(n, -1);
  for (std::size_t pi = 0; pi < paths.paths.size(); ++pi)
    for (int v : paths.paths[pi].vertices) path_of[v] = static_cast<int>(pi);

  for (int v = 0; v < n; ++v) {
    if (path_of[v] >= 0) continue;
    cd.id_of[v] = cd.n_prime++;
    cd.bin_of.push_back(bins.bin_of[v]);
    cd.original.push_back(v);
    cd.fat_path.push_back(-1);
  }
  for (std::size_t pi = 0; pi < paths.paths.size(); ++pi) {
    ++cd.n_prime;
    cd.bin_of.push_back(0);
    cd.original.push_back(-1);
    cd.fat_path.push_back(static_cast<int>(pi));
  }

  if (cd.n_prime % k != 0)
    throw std::logic_error("contracted vertex count is not divisible by the bin count");
  std::vector<int> per_bin(k, 0);
  for (int b : cd.bin_of) ++per_bin[b];
  for (int b = 0; b < k; ++b)
    if (per_bin[b] != cd.n_prime / k)
      throw std::logic_error("contracted bins are not balanced");
  return cd;
}

Result<SinToutInstance> extract_sin_tout(const ContractedDigraph& cd, const PathCollection& paths,
                                         ExposureState& state, const BinAssignment& bins,
                                         Rng& rng) {
  const int k = cd.k;
  state.begin_extraction();

  const int n = bins.n();
  std::vector<int> end_path(n, -1);
  std::vector<char> end_is_front(n, 0);
  std::vector<int> fat_id(paths.paths.size(), -1);
  for (int c = 0; c < cd.n_prime; ++c)
    if (cd.fat_path[c] >= 0) fat_id[cd.fat_path[c]] = c;
  for (std::size_t pi = 0; pi < paths.paths.size(); ++pi) {
    const auto& pv = paths.paths[pi].vertices;
    end_path[pv.front()] = static_cast<int>(pi);
    end_is_front[pv.front()] = 1;
    end_path[pv.back()] = static_cast<int>(pi);
  }

  SinToutInstance inst;
  inst.k = k;
  inst.bins = cd.members();
  inst.bin_of = cd.bin_of;
  inst.s_counts = cyclic_two_matrix(k);
  inst.t_counts = cyclic_two_matrix(k);
  inst.choices.assign(cd.n_prime,
                      {std::vector<std::vector<int>>(k), std::vector<std::vector<int>>(k)});

  std::vector<int> cands;
  for (int c = 0; c < cd.n_prime; ++c) {
    const int j = cd.bin_of[c];
    for (int side = 0; side < 2; ++side) {
      const int b = (j + (side == 0 ? k - 1 : 1)) % k;
      int origin;
      if (cd.fat_path[c] < 0) {
        origin = cd.original[c];
      } else {
        // a shrunken path faces the last bin through its first vertex and
        // the second bin through its last; other arcs died with the path
        const auto& pv = paths.paths[cd.fat_path[c]].vertices;
        origin = (b == k - 1) ? pv.front() : pv.back();
      }
      for (int dir = 0; dir < 2; ++dir) {
        const bool outgoing = dir == 1;
        cands.clear();
        for (int u : state.undiscovered_pool(origin, b, outgoing, bins)) {
          const int cid = cd.id_of[u];
          if (cid >= 0) {
            cands.push_back(cid);
          } else if (end_path[u] >= 0) {
            // path ends keep only the arcs facing away from their path
            if (end_is_front[u] ? j == k - 1 : j == 1) cands.push_back(fat_id[end_path[u]]);
          }
        }
        if (cands.size() < 2)
          return Failure{FailStage::NotHandsome, 5,
                         "undiscovered choice pool below two for contracted vertex " +
                             std::to_string(c) + " toward bin " + std::to_string(b) +
                             (outgoing ? " (outgoing)" : " (incoming)")};
        const auto picks = rng.sample_distinct(cands.size(), 2);
        std::vector<int> chosen = {cands[picks[0]], cands[picks[1]]};
        std::sort(chosen.begin(), chosen.end());
        (outgoing ? inst.choices[c].heads[b] : inst.choices[c].tails[b]) = std::move(chosen);
      }
    }
  }
  return inst;
}

namespace {

// Replace contracted vertices by their path contents; inner path arcs follow
// the effective pattern, the witness arc closes each hop.
CycleWitness expand_witness(const CycleWitness& contracted, const ContractedDigraph& cd,
                            const PathCollection& paths, const Pattern& p_eff) {
  const int k = cd.k;
  CycleWitness full;
  for (std::size_t i = 0; i < contracted.vertices.size(); ++i) {
    const int c = contracted.vertices[i];
    const Dir o = contracted.orientations[i];
    if (cd.fat_path[c] >= 0) {
      const auto& pv = paths.paths[cd.fat_path[c]].vertices;
      for (std::size_t t = 0; t < pv.size(); ++t) {
        full.vertices.push_back(pv[t]);
        if (t + 1 < pv.size()) full.orientations.push_back(p_eff.at(t % k));
      }
    } else {
      full.vertices.push_back(cd.original[c]);
    }
    full.orientations.push_back(o);
  }
  return full;
}

}  // namespace

Result<CycleWitness> run_pipeline(const ProcessTrace& trace, const Pattern& p, Rng& rng,
                                  const PipelineConfig& config,
                                  PipelineDiagnostics* diagnostics) {
  const int n = trace.n();
  const PatternClass pc = classify(p);
  if (pc != PatternClass::Alternating && pc != PatternClass::NonAlternating)
    throw std::invalid_argument("construction needs a primitive pattern of length >= 2");
  const bool alternating = pc == PatternClass::Alternating;
  const DegreeVariant variant =
      alternating ? DegreeVariant::AlternatingA : DegreeVariant::NonAlternatingA;
  const Pattern p_eff = alternating ? parse_pattern("><><") : p;

  PipelineDiagnostics local;
  PipelineDiagnostics& diag = diagnostics ? *diagnostics : local;
  diag = PipelineDiagnostics{};

  const auto window = p_window(variant, n);
  const LabeledDigraph at_lower = trace.prefix_at(window.first);

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);

  std::optional<Failure> last;
  for (int attempt = 0; attempt <= config.retries; ++attempt) {
    diag.attempts = attempt + 1;
    if (attempt > 0) rng.shuffle(order.begin(), order.end());
    BinAssignment bins = assign_bins(order, p);

    const VertexClassification cls = classify_vertices(at_lower, bins);
    diag.good = cls.good_count;
    diag.bad = cls.bad_count;
    diag.dangerous = cls.dangerous_count;

    auto exposed = expose_until_A(trace, cls, variant);
    if (!exposed) {
      // the window misses regardless of the bin assignment
      last = exposed.error();
      break;
    }
    DStar dstar = std::move(exposed.value());
    diag.m_lower = dstar.m_lower;
    diag.m_star = dstar.m_star;
    diag.m_upper = dstar.m_upper;

    diag.handsome = check_handsome(dstar.combined(), cls);
    if (!diag.handsome.all()) {
      last = Failure{FailStage::NotHandsome, diag.handsome.first_failed(),
                     diag.handsome.message};
      continue;
    }

    ExposureState state(dstar.at_lower_edge);
    auto built = build_path_collection(dstar, cls, bins, p, rng, state);
    if (!built) {
      last = built.error();
      continue;
    }
    const PathCollection paths = std::move(built.value());
    diag.path_count = static_cast<int>(paths.paths.size());

    const ContractedDigraph cd = contract(paths, bins);
    diag.n_contracted = cd.n_prime;

    auto instance = extract_sin_tout(cd, paths, state, bins, rng);
    diag.pool_reads += state.pool_reads();
    if (!instance) {
      last = instance.error();
      continue;
    }
    const SinToutInstance& inst = instance.value();

    auto family = chain_matchings(inst, p_eff);
    if (!family) {
      last = family.error();
      continue;
    }

    auto contracted_hc = hc_on_contracted(family.value(), inst, p_eff, rng, config.budget);
    if (!contracted_hc) {
      last = contracted_hc.error();
      continue;
    }

    CycleWitness full = expand_witness(contracted_hc.value(), cd, paths, p_eff);
    if (!verify_pi_hc(trace.prefix_count(dstar.m_star), full, p))
      throw std::logic_error("constructed cycle escapes the hitting-time prefix");
    diag.failure.reset();
    return full;
  }

  if (config.fallback_exact && n <= 16 && n % static_cast<int>(p.length()) == 0) {
    const std::int64_t m_star = trace.hitting_index(variant);
    if (auto witness = exact_pi_hc(trace.prefix_count(m_star), p)) {
      diag.failure.reset();
      return *witness;
    }
    last = Failure{FailStage::HCNotFound, -1,
                   "exhaustive search found no patterned cycle at the hitting index"};
  }

  diag.failure = last;
  return *last;
}

}  // namespace pihc
