#include "pihc/pipeline.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "doctest.h"
#include "pihc/digraph.hpp"
#include "pihc/pattern.hpp"
#include "pihc/process.hpp"
#include "pihc/rng.hpp"

using namespace pihc;

namespace {

LabeledDigraph complete_labeled(int n) {
  std::vector<Arc> arcs;
  for (int tail = 0; tail < n; ++tail)
    for (int head = 0; head < n; ++head)
      if (head != tail) arcs.push_back({tail, head, LabelIn | LabelOut});
  return LabeledDigraph(n, std::move(arcs));
}

VertexClassification planted_classes(int k_eff, const std::vector<VertexClass>& cls) {
  VertexClassification out;
  out.k_eff = k_eff;
  out.cls = cls;
  for (VertexClass c : cls) {
    if (c == VertexClass::Good) ++out.good_count;
    else if (c == VertexClass::Bad) ++out.bad_count;
    else ++out.dangerous_count;
  }
  return out;
}

// Component-level restatement of the neighbourhood conditions, valid when the
// radius reaches across whole components and nothing is truncated: with
// radius >= n every "within distance" clause collapses to connectivity.
struct PlainHandsome {
  bool h1, h2, h3;
};

PlainHandsome handsome_oracle(const LabeledDigraph& d, const VertexClassification& cls) {
  const int n = d.n();
  const int k = cls.k_eff;
  std::vector<int> comp(n, -1);
  int comps = 0;
  for (int s = 0; s < n; ++s) {
    if (comp[s] >= 0) continue;
    std::vector<int> stack{s};
    comp[s] = comps;
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      auto push = [&](int u) {
        if (comp[u] < 0) {
          comp[u] = comps;
          stack.push_back(u);
        }
      };
      for (int u : d.out_neighbors(v)) push(u);
      for (int u : d.in_neighbors(v)) push(u);
    }
    ++comps;
  }

  std::vector<int> non_good(comps, 0), members(comps, 0);
  std::vector<std::set<std::pair<int, int>>> undirected(comps);
  std::vector<bool> digon(comps, false), has_dangerous_pair(comps, false);
  for (int v = 0; v < n; ++v) {
    ++members[comp[v]];
    if (!cls.good(v)) ++non_good[comp[v]];
  }
  for (const Arc& a : d.arcs()) {
    const int c = comp[a.tail];
    undirected[c].insert({std::min(a.tail, a.head), std::max(a.tail, a.head)});
    if (d.has_arc(a.head, a.tail)) digon[c] = true;
  }

  PlainHandsome out{true, true, true};
  for (int c = 0; c < comps; ++c)
    if (non_good[c] >= 4 * k + 1) out.h1 = false;  // the vertex itself is not counted
  for (int v = 0; v < n && out.h2; ++v) {
    if (cls.cls[v] != VertexClass::Dangerous) continue;
    if (non_good[comp[v]] > 1) out.h2 = false;  // any non-good companion violates
  }
  if (out.h1 && out.h2) {
    for (int c = 0; c < comps; ++c) {
      const bool cyclic = digon[c] || static_cast<int>(undirected[c].size()) >= members[c];
      if (cyclic && non_good[c] > 0) out.h3 = false;
    }
  }
  return out;
}

std::vector<std::vector<int>> members_of(const BinAssignment& bins) { return bins.members(); }

// path with vertex t drawn from bin t mod k, position t/k inside the bin
std::vector<int> aligned_path(const std::vector<std::vector<int>>& bins, int length) {
  const int k = static_cast<int>(bins.size());
  std::vector<int> path;
  for (int t = 0; t < length; ++t) path.push_back(bins[t % k][t / k]);
  return path;
}

}  // namespace

TEST_CASE("bin assignment splits evenly and validates divisibility") {
  const BinAssignment three = assign_bins(12, parse_pattern(">><"));
  CHECK(three.k_eff == 3);
  CHECK(three.sizes == std::vector<int>{4, 4, 4});
  for (int v = 0; v < 12; ++v) CHECK(three.bin_of[v] == v / 4);

  const BinAssignment alt = assign_bins(10, parse_pattern("><"));
  CHECK(alt.k_eff == 4);
  CHECK(alt.sizes == std::vector<int>{3, 3, 2, 2});
  CHECK(alt.bin_of == std::vector<int>{0, 0, 0, 1, 1, 1, 2, 2, 3, 3});

  CHECK_THROWS_AS(assign_bins(10, parse_pattern(">><")), DivisibilityError);
  CHECK_THROWS_AS(assign_bins(9, parse_pattern("><")), DivisibilityError);
  CHECK_THROWS_AS(assign_bins(12, parse_pattern("><><")), std::invalid_argument);
  CHECK_THROWS_AS(assign_bins(12, parse_pattern(">")), std::invalid_argument);

  const std::vector<int> order{5, 4, 3, 2, 1, 0};
  const BinAssignment custom = assign_bins(order, parse_pattern(">><"));
  CHECK(custom.bin_of[5] == 0);
  CHECK(custom.bin_of[4] == 0);
  CHECK(custom.bin_of[3] == 1);
  CHECK(custom.bin_of[0] == 2);
  CHECK_THROWS_AS(assign_bins({0, 0, 1, 2, 3, 4}, parse_pattern(">><")), std::invalid_argument);
}

TEST_CASE("bin swaps exchange assignments and keep sizes") {
  BinAssignment bins = assign_bins(12, parse_pattern(">><"));
  bins.swap_vertices(0, 11);
  CHECK(bins.bin_of[0] == 2);
  CHECK(bins.bin_of[11] == 0);
  CHECK(bins.sizes == std::vector<int>{4, 4, 4});
  CHECK(bins.swap_log.size() == 2);
  bins.swap_vertices(1, 2);  // same bin: nothing to record
  CHECK(bins.swap_log.size() == 2);
  const auto mem = bins.members();
  std::set<int> all;
  for (int b = 0; b < 3; ++b) {
    CHECK(mem[b].size() == 4);
    for (int v : mem[b]) {
      CHECK(bins.bin_of[v] == b);
      CHECK(all.insert(v).second);
    }
  }
}

TEST_CASE("classification recomputes from labels and degree rules") {
  Rng rng(1234);
  const BinAssignment bins = assign_bins(36, parse_pattern(">><"));
  const int need = 4 * 3 + 2;
  for (double p : {0.15, 0.5, 0.9}) {
    const LabeledDigraph d = sample_dnp(36, p, rng);
    const VertexClassification cls = classify_vertices(d, bins);
    REQUIRE(cls.k_eff == 3);
    int good = 0, bad = 0, dangerous = 0;
    for (int v = 0; v < 36; ++v) {
      std::vector<int> din(3, 0), dout(3, 0);
      for (const Arc& a : d.arcs()) {
        if (a.tail == v && (a.labels & LabelOut)) ++dout[bins.bin_of[a.head]];
        if (a.head == v && (a.labels & LabelIn)) ++din[bins.bin_of[a.tail]];
      }
      CHECK(cls.d_in[v] == din);
      CHECK(cls.d_out[v] == dout);
      bool is_good = true;
      for (int b = 0; b < 3; ++b) is_good = is_good && din[b] >= need && dout[b] >= need;
      const VertexClass expect =
          is_good ? VertexClass::Good
                  : (d.total_degree(v) <= need ? VertexClass::Dangerous : VertexClass::Bad);
      CHECK(cls.cls[v] == expect);
      if (expect == VertexClass::Good) ++good;
      else if (expect == VertexClass::Bad) ++bad;
      else ++dangerous;
    }
    CHECK(cls.good_count == good);
    CHECK(cls.bad_count == bad);
    CHECK(cls.dangerous_count == dangerous);
  }
}

TEST_CASE("neighbourhood conditions on hand-built graphs") {
  // digon 0-1 plus a pendant vertex 2
  const LabeledDigraph d(3, {{0, 1, LabelOut}, {1, 0, LabelOut}, {1, 2, LabelIn}});

  const auto all_good = planted_classes(
      3, {VertexClass::Good, VertexClass::Good, VertexClass::Good});
  const HandsomeReport ok = check_handsome(d, all_good);
  CHECK(ok.all());
  CHECK(ok.h3_checked);

  const auto tail_bad = planted_classes(
      3, {VertexClass::Good, VertexClass::Good, VertexClass::Bad});
  const HandsomeReport bad_near_cycle = check_handsome(d, tail_bad);
  CHECK(bad_near_cycle.h1);
  CHECK(bad_near_cycle.h2);
  CHECK_FALSE(bad_near_cycle.h3);
  CHECK(bad_near_cycle.h3_cycle.size() == 2);
  CHECK(bad_near_cycle.first_failed() == 3);

  // one-way path 0 -> 1 -> 2: no cycles anywhere
  const LabeledDigraph path(3, {{0, 1, LabelOut}, {1, 2, LabelOut}});
  const auto mixed = planted_classes(
      3, {VertexClass::Good, VertexClass::Dangerous, VertexClass::Bad});
  const HandsomeReport lonely = check_handsome(path, mixed);
  CHECK(lonely.h1);
  CHECK_FALSE(lonely.h2);  // the bad vertex sits next to the dangerous one
  CHECK(lonely.h2_vertex == 1);
  CHECK(lonely.h2_witness == 2);
  CHECK_FALSE(lonely.h3_checked);

  const auto spread = planted_classes(
      3, {VertexClass::Dangerous, VertexClass::Good, VertexClass::Good});
  CHECK(check_handsome(path, spread).all());

  // a star whose centre sees 4k non-good leaves
  std::vector<Arc> star;
  std::vector<VertexClass> star_cls(14, VertexClass::Bad);
  star_cls[0] = star_cls[13] = VertexClass::Good;
  for (int leaf = 1; leaf <= 13; ++leaf) star.push_back({0, leaf, LabelOut});
  const HandsomeReport crowded =
      check_handsome(LabeledDigraph(14, std::move(star)), planted_classes(3, star_cls));
  CHECK_FALSE(crowded.h1);
  CHECK(crowded.h1_vertex == 0);
  CHECK(crowded.first_failed() == 1);
}

TEST_CASE("neighbourhood conditions match the component oracle") {
  Rng rng(97531);
  int h1_fails = 0, h2_fails = 0, h3_fails = 0;
  for (int rep = 0; rep < 300; ++rep) {
    const LabeledDigraph d = sample_dnp(12, 0.10, rng);
    std::vector<VertexClass> cls(12, VertexClass::Good);
    for (auto& c : cls) {
      const double u = rng.next_unit();
      if (u < 0.10) c = VertexClass::Bad;
      else if (u < 0.20) c = VertexClass::Dangerous;
    }
    const auto planted = planted_classes(3, cls);
    const HandsomeReport got = check_handsome(d, planted);
    const PlainHandsome want = handsome_oracle(d, planted);
    CHECK(got.h1 == want.h1);
    CHECK(got.h2 == want.h2);
    CHECK(got.h3_checked == (want.h1 && want.h2));
    if (got.h3_checked) CHECK(got.h3 == want.h3);
    h1_fails += !want.h1;
    h2_fails += !want.h2;
    h3_fails += (want.h1 && want.h2 && !want.h3);
  }
  // the sweep has to exercise every verdict
  CHECK(h1_fails == 0);  // 12 vertices can never reach the 4k threshold
  CHECK(h2_fails > 10);
  CHECK(h3_fails > 10);
}

TEST_CASE("oversized balls count as violations") {
  // with k = 3 the visit cutoff is 360: a complete digraph on 400 vertices
  // cannot certify anything
  const LabeledDigraph d = complete_labeled(400);
  const auto planted = planted_classes(3, std::vector<VertexClass>(400, VertexClass::Good));
  const HandsomeReport rep = check_handsome(d, planted);
  CHECK_FALSE(rep.h1);
  CHECK(rep.first_failed() == 1);
  CHECK(rep.message.find("cutoff") != std::string::npos);

  const auto [ball, truncated] = undirected_ball(d, 0, 30, 360);
  CHECK(truncated);
  CHECK(ball.size() <= 360);
}

TEST_CASE("window exposure discloses exactly the dangerous-incident arrivals") {
  const Pattern p = parse_pattern("><");
  bool saw_inside = false, saw_outside = false;
  for (std::uint64_t seed = 1; seed <= 400 && !(saw_inside && saw_outside); ++seed) {
    const ProcessTrace trace(100, seed);
    const BinAssignment bins = assign_bins(100, p);
    const auto window = p_window(DegreeVariant::AlternatingA, 100);
    const LabeledDigraph at_lower = trace.prefix_at(window.first);
    const VertexClassification cls = classify_vertices(at_lower, bins);
    const auto exposed = expose_until_A(trace, cls, DegreeVariant::AlternatingA);

    const std::int64_t m_lower = trace.count_at_or_below(split_round_p(window.first));
    const std::int64_t m_upper = trace.count_at_or_below(split_round_p(window.second));
    const std::int64_t m_star = trace.hitting_index(DegreeVariant::AlternatingA);
    if (!exposed.ok()) {
      CHECK(exposed.error().stage == FailStage::AOutsideWindow);
      CHECK_FALSE((m_lower < m_star && m_star < m_upper));
      saw_outside = true;
      continue;
    }
    saw_inside = true;
    const DStar& dstar = exposed.value();
    CHECK(dstar.m_lower == m_lower);
    CHECK(dstar.m_star == m_star);
    CHECK(dstar.m_upper == m_upper);
    CHECK(m_lower < m_star);
    CHECK(m_star < m_upper);
    CHECK(dstar.at_lower_edge.arc_count() == at_lower.arc_count());

    const double s_star = trace.arrival_stamp_at(m_star - 1);
    std::size_t idx = 0;
    for (std::int64_t i = m_lower; i < m_star; ++i) {
      const auto [tail, head] = trace.arrival(i);
      if (cls.cls[tail] != VertexClass::Dangerous && cls.cls[head] != VertexClass::Dangerous)
        continue;
      REQUIRE(idx < dstar.disclosed.size());
      const Arc& got = dstar.disclosed[idx++];
      CHECK(got.tail == tail);
      CHECK(got.head == head);
      const std::uint8_t labels = (trace.x_in(tail, head) <= s_star ? LabelIn : 0) |
                                  (trace.x_out(tail, head) <= s_star ? LabelOut : 0);
      CHECK(got.labels == labels);
    }
    CHECK(idx == dstar.disclosed.size());
    CHECK(dstar.combined().arc_count() == at_lower.arc_count() + dstar.disclosed.size());
  }
  CHECK(saw_inside);
  CHECK(saw_outside);
}

TEST_CASE("exposure state guards every read") {
  const BinAssignment bins = assign_bins(6, parse_pattern(">><"));
  // bins: {0,1} {2,3} {4,5}
  const LabeledDigraph d(6, {{0, 2, LabelOut}, {3, 0, LabelIn}, {1, 2, LabelIn | LabelOut}});
  ExposureState state(d);

  CHECK_THROWS_AS(state.out_neighbors(0), std::logic_error);
  state.discover_vertex(0);
  REQUIRE(state.out_neighbors(0).size() == 1);
  CHECK(state.out_neighbors(0)[0] == 2);
  REQUIRE(state.in_neighbors(0).size() == 1);
  CHECK(state.in_neighbors(0)[0] == 3);
  CHECK_THROWS_AS(state.in_neighbors(1), std::logic_error);

  // label visibility: (3,0) carries only the in label, so vertex 3 sees nothing
  CHECK(state.undiscovered_count(3, 0, true, bins) == 0);
  CHECK(state.undiscovered_count(1, 1, true, bins) == 1);
  CHECK(state.undiscovered_count(1, 1, false, bins) == 0);  // (1,2) in-label belongs to 2
  CHECK(state.undiscovered_count(2, 0, false, bins) == 1);  // sees 1, not discovered 0

  CHECK_THROWS_AS(state.undiscovered_pool(1, 1, true, bins), std::logic_error);
  state.begin_extraction();
  CHECK(state.undiscovered_pool(1, 1, true, bins) == std::vector<int>{2});
  CHECK(state.pool_reads() == 1);
  CHECK_THROWS_AS(state.undiscovered_pool(0, 1, true, bins), std::logic_error);

  state.discover_vertex(2);
  CHECK(state.undiscovered_count(1, 1, true, bins) == 0);
}

TEST_CASE("path building on an all-good instance yields one aligned fallback path") {
  const Pattern p = parse_pattern(">><");
  const LabeledDigraph d = complete_labeled(90);
  BinAssignment bins = assign_bins(90, p);
  const VertexClassification cls = classify_vertices(d, bins);
  REQUIRE(cls.good_count == 90);

  DStar dstar{d, {}, 0, 0, 0};
  Rng rng(7);
  ExposureState state(d);
  const auto built = build_path_collection(dstar, cls, bins, p, rng, state);
  REQUIRE(built.ok());
  const PathCollection& paths = built.value();
  REQUIRE(paths.paths.size() == 1);
  const PathRecord& rec = paths.paths[0];
  CHECK(rec.fallback);
  REQUIRE(rec.vertices.size() == 19);  // 6k arcs
  std::set<int> distinct(rec.vertices.begin(), rec.vertices.end());
  CHECK(distinct.size() == 19);
  CHECK(distinct.count(rec.center) == 1);
  for (int t = 0; t < 19; ++t) CHECK(bins.bin_of[rec.vertices[t]] == t % 3);
  for (std::size_t t = 0; t < rec.vertices.size(); ++t) {
    const bool interior = t > 0 && t + 1 < rec.vertices.size();
    CHECK(state.discovered(rec.vertices[t]) == interior);
  }

  const ContractedDigraph cd = contract(paths, bins);
  CHECK(cd.n_prime == 72);
  CHECK(cd.k == 3);
  const auto mem = cd.members();
  for (const auto& bin : mem) CHECK(bin.size() == 24);
  CHECK(cd.fat_path[cd.n_prime - 1] == 0);
  CHECK(cd.original[cd.n_prime - 1] == -1);
  for (int v : rec.vertices) CHECK(cd.id_of[v] == -1);

  auto instance = extract_sin_tout(cd, paths, state, bins, rng);
  REQUIRE(instance.ok());
  const SinToutInstance& inst = instance.value();
  CHECK(inst.k == 3);
  CHECK(inst.n() == 72);
  for (int c = 0; c < inst.n(); ++c) {
    const int bin = inst.bin_of[c];
    for (int j = 0; j < 3; ++j) {
      const bool adjacent = j == (bin + 1) % 3 || j == (bin + 2) % 3;
      CHECK(inst.choices[c].tails[j].size() == (adjacent ? 2u : 0u));
      CHECK(inst.choices[c].heads[j].size() == (adjacent ? 2u : 0u));
    }
  }
}

TEST_CASE("path building routes around planted non-good vertices") {
  const Pattern p = parse_pattern(">><");
  const LabeledDigraph d = complete_labeled(90);
  BinAssignment bins = assign_bins(90, p);
  VertexClassification cls = classify_vertices(d, bins);
  cls.cls[0] = VertexClass::Bad;
  cls.cls[45] = VertexClass::Bad;
  cls.good_count -= 2;
  cls.bad_count += 2;

  DStar dstar{d, {}, 0, 0, 0};
  Rng rng(21);
  ExposureState state(d);
  const auto built = build_path_collection(dstar, cls, bins, p, rng, state);
  REQUIRE(built.ok());
  REQUIRE(built.value().paths.size() == 2);
  std::set<int> centers, covered;
  for (const PathRecord& rec : built.value().paths) {
    CHECK_FALSE(rec.fallback);
    centers.insert(rec.center);
    REQUIRE(rec.vertices.size() == 19);
    for (int t = 0; t < 19; ++t) {
      CHECK(bins.bin_of[rec.vertices[t]] == t % 3);
      CHECK(covered.insert(rec.vertices[t]).second);  // paths stay disjoint
    }
    for (int v : rec.vertices)
      if (v != rec.center) CHECK(cls.good(v));
  }
  CHECK(centers == std::set<int>{0, 45});
  CHECK(state.discovered(0));
  CHECK(state.discovered(45));

  const ContractedDigraph cd = contract(built.value(), bins);
  CHECK(cd.n_prime == 54);
  for (const auto& bin : cd.members()) CHECK(bin.size() == 18);
}

TEST_CASE("alternating paths run on four bins and absorb the parity shift") {
  const Pattern p = parse_pattern("><");
  Rng rng(3);
  for (int n : {88, 90}) {
    const LabeledDigraph d = complete_labeled(n);
    BinAssignment bins = assign_bins(n, p);
    REQUIRE(bins.k_eff == 4);
    const VertexClassification cls = classify_vertices(d, bins);
    REQUIRE(cls.good_count == n);
    DStar dstar{d, {}, 0, 0, 0};
    ExposureState state(d);
    const auto built = build_path_collection(dstar, cls, bins, p, rng, state);
    REQUIRE(built.ok());
    REQUIRE(built.value().paths.size() == 1);
    const PathRecord& rec = built.value().paths[0];
    // 24 arcs normally; n = 2 mod 4 forces one path two arcs longer
    const std::size_t expect = n % 4 == 0 ? 25 : 27;
    REQUIRE(rec.vertices.size() == expect);

    const ContractedDigraph cd = contract(built.value(), bins);
    CHECK(cd.n_prime == 64);
    for (const auto& bin : cd.members()) CHECK(bin.size() == 16);
  }
}

TEST_CASE("path building fails loudly when a centre has no good pair") {
  std::vector<Arc> arcs;
  for (int tail = 0; tail < 90; ++tail)
    for (int head = 0; head < 90; ++head)
      if (head != tail && tail != 0 && head != 0)
        arcs.push_back({tail, head, LabelIn | LabelOut});
  arcs.push_back({0, 1, LabelOut});
  const LabeledDigraph d(90, std::move(arcs));
  const Pattern p = parse_pattern(">><");
  BinAssignment bins = assign_bins(90, p);
  const VertexClassification cls = classify_vertices(d, bins);
  REQUIRE(cls.cls[0] == VertexClass::Dangerous);
  REQUIRE(cls.good_count == 89);

  DStar dstar{d, {}, 0, 0, 0};
  Rng rng(5);
  ExposureState state(d);
  const auto built = build_path_collection(dstar, cls, bins, p, rng, state);
  REQUIRE_FALSE(built.ok());
  CHECK(built.error().stage == FailStage::PathBuildFailed);
  CHECK(built.error().detail == 0);
  CHECK(built.error().message.find("no usable pair") != std::string::npos);
}

TEST_CASE("contraction checks the path bin bookkeeping") {
  const Pattern p = parse_pattern(">><");
  const BinAssignment bins = assign_bins(30, p);
  const auto mem = members_of(bins);

  PathCollection paths;
  paths.paths.push_back({aligned_path(mem, 19), mem[1][0], false});
  const ContractedDigraph cd = contract(paths, bins);
  CHECK(cd.n_prime == 12);
  const auto cmem = cd.members();
  for (const auto& bin : cmem) CHECK(bin.size() == 4);
  // ordinary ids first, ascending by original vertex; the fat vertex last
  for (int id = 0; id + 1 < cd.n_prime; ++id) {
    CHECK(cd.fat_path[id] == -1);
    REQUIRE(cd.original[id] >= 0);
    CHECK(cd.id_of[cd.original[id]] == id);
    if (id > 0) CHECK(cd.original[id] > cd.original[id - 1]);
  }
  CHECK(cd.bin_of[cd.n_prime - 1] == 0);

  PathCollection crooked;
  auto twisted = aligned_path(mem, 19);
  twisted[0] = mem[1][6];  // bin multiset 7/6/6 becomes 6/7/6
  crooked.paths.push_back({twisted, twisted[1], false});
  CHECK_THROWS_AS(contract(crooked, bins), std::logic_error);
}

TEST_CASE("extraction draws two undiscovered choices per side or aborts") {
  const Pattern p = parse_pattern(">><");
  const BinAssignment bins = assign_bins(30, p);
  const auto mem = members_of(bins);
  const auto path = aligned_path(mem, 19);

  // all arcs between cyclically adjacent bins, both directions, both labels
  auto build = [&](bool starve) {
    std::vector<Arc> arcs;
    for (int tail = 0; tail < 30; ++tail) {
      for (int head = 0; head < 30; ++head) {
        if (head == tail) continue;
        const int bt = bins.bin_of[tail], bh = bins.bin_of[head];
        if (bt == bh) continue;
        // vertex 16's out-choices toward bin 2 collapse to a single target
        if (starve && tail == 16 && bh == 2 && head >= 27) continue;
        arcs.push_back({tail, head, LabelIn | LabelOut});
      }
    }
    return LabeledDigraph(30, std::move(arcs));
  };

  PathCollection paths;
  paths.paths.push_back({path, path[1], false});

  for (bool starve : {false, true}) {
    const LabeledDigraph d = build(starve);
    BinAssignment local = bins;
    const ContractedDigraph cd = contract(paths, local);
    ExposureState state(d);
    for (std::size_t t = 1; t + 1 < path.size(); ++t) state.discover_vertex(path[t]);
    Rng rng(99);
    auto instance = extract_sin_tout(cd, paths, state, local, rng);
    if (starve) {
      REQUIRE_FALSE(instance.ok());
      CHECK(instance.error().stage == FailStage::NotHandsome);
      CHECK(instance.error().detail == 5);
      CHECK(instance.error().message.find("below two") != std::string::npos);
      continue;
    }
    REQUIRE(instance.ok());
    const SinToutInstance& inst = instance.value();
    REQUIRE(inst.n() == 12);
    const auto family = chain_matchings(inst, p);
    REQUIRE(family.ok());
    Rng hc_rng(11);
    const auto cycle = hc_on_contracted(family.value(), inst, p, hc_rng);
    REQUIRE(cycle.ok());
    CHECK(verify_pi_hc(instance_digraph(inst), cycle.value(), p));
  }
}

TEST_CASE("full construction reports failures honestly at desk scales") {
  const ProcessTrace trace(96, 11);
  Rng rng(1);
  PipelineDiagnostics diag;
  PipelineConfig cfg;
  cfg.retries = 2;
  const auto result = run_pipeline(trace, parse_pattern(">><"), rng, cfg, &diag);
  REQUIRE_FALSE(result.ok());
  CHECK(diag.attempts >= 1);
  CHECK(diag.attempts <= 3);
  CHECK(diag.good + diag.bad + diag.dangerous == 96);
  REQUIRE(diag.failure.has_value());
  CHECK(diag.failure->stage == result.error().stage);
  CHECK(std::string(to_string(result.error().stage)).size() > 0);
}

TEST_CASE("full construction falls back to exhaustive search at tiny sizes") {
  const Pattern p = parse_pattern("><");
  PipelineConfig cfg;
  cfg.retries = 0;
  cfg.fallback_exact = true;
  int ok_count = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const ProcessTrace trace(16, seed);
    Rng rng(seed, 1);
    PipelineDiagnostics diag;
    const auto result = run_pipeline(trace, p, rng, cfg, &diag);
    if (result.ok()) {
      ++ok_count;
      const std::int64_t m_star = trace.hitting_index(DegreeVariant::AlternatingA);
      CHECK(verify_pi_hc(trace.prefix_count(m_star), result.value(), p));
    } else {
      CHECK(result.error().stage == FailStage::HCNotFound);
    }
  }
  CHECK(ok_count >= 1);
}

TEST_CASE("full construction validates its inputs") {
  const ProcessTrace trace(17, 1);
  Rng rng(1);
  CHECK_THROWS_AS(run_pipeline(trace, parse_pattern("><"), rng), DivisibilityError);
  CHECK_THROWS_AS(run_pipeline(trace, parse_pattern("><><"), rng), std::invalid_argument);
  const ProcessTrace sixteen(16, 1);
  CHECK_THROWS_AS(run_pipeline(sixteen, parse_pattern(">><"), rng), DivisibilityError);
}
