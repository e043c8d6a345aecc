#include "pihc/hc_solve.hpp"

#include <algorithm>
#include <bit>
#include <vector>

#include "doctest.h"
#include "pihc/digraph.hpp"
#include "pihc/pattern.hpp"
#include "pihc/rng.hpp"

using namespace pihc;

namespace {

// Independent directed-Hamilton-cycle decision by Held-Karp subset DP,
// start pinned at 0. Used as an oracle for the backtracking solver.
bool held_karp_hc(const LabeledDigraph& d) {
  const int n = d.n();
  if (n < 2) return false;
  const int full = 1 << n;
  std::vector<std::vector<bool>> reach(full, std::vector<bool>(n, false));
  reach[1][0] = true;
  for (int mask = 1; mask < full; ++mask) {
    if (!(mask & 1)) continue;
    for (int v = 0; v < n; ++v) {
      if (!reach[mask][v]) continue;
      for (int w : d.out_neighbors(v)) {
        if (mask & (1 << w)) continue;
        reach[mask | (1 << w)][w] = true;
      }
    }
  }
  for (int v = 1; v < n; ++v)
    if (reach[full - 1][v] && d.has_arc(v, 0)) return true;
  return false;
}

LabeledDigraph complete_digraph(int n) {
  std::vector<Arc> arcs;
  for (int tail = 0; tail < n; ++tail)
    for (int head = 0; head < n; ++head)
      if (head != tail) arcs.push_back({tail, head, LabelIn | LabelOut});
  return LabeledDigraph(n, std::move(arcs));
}

bool cycle_order_valid(const LabeledDigraph& d, const std::vector<int>& order) {
  if (static_cast<int>(order.size()) != d.n()) return false;
  std::vector<bool> seen(d.n(), false);
  for (int v : order) {
    if (v < 0 || v >= d.n() || seen[v]) return false;
    seen[v] = true;
  }
  for (std::size_t i = 0; i < order.size(); ++i)
    if (!d.has_arc(order[i], order[(i + 1) % order.size()])) return false;
  return true;
}

Pattern rotate_pattern(const Pattern& p, int by) {
  std::vector<Dir> dirs;
  for (int i = 0; i < p.length(); ++i) dirs.push_back(p.at(i + by));
  return Pattern(dirs);
}

Pattern reverse_flip(const Pattern& p) {
  std::vector<Dir> dirs;
  for (int i = p.length() - 1; i >= 0; --i)
    dirs.push_back(p.at(i) == Dir::Forward ? Dir::Backward : Dir::Forward);
  return Pattern(dirs);
}

}  // namespace

TEST_CASE("backtracking directed solver matches subset-DP oracle") {
  Rng rng(314);
  int found = 0;
  for (int n : {4, 5, 6, 7, 8}) {
    for (double p : {0.2, 0.35, 0.55}) {
      for (int rep = 0; rep < 12; ++rep) {
        const LabeledDigraph d = sample_dnp(n, p, rng);
        const auto cycle = exact_directed_hc(d);
        CHECK(cycle.has_value() == held_karp_hc(d));
        if (cycle) {
          ++found;
          CHECK(cycle_order_valid(d, *cycle));
        }
      }
    }
  }
  CHECK(found > 10);  // the sweep must exercise both outcomes
}

TEST_CASE("pruned patterned solver matches the unpruned enumerator") {
  Rng rng(2718);
  const Pattern alternating = parse_pattern("><");
  const Pattern skew = parse_pattern(">><");
  int hits = 0;
  for (int rep = 0; rep < 60; ++rep) {
    const LabeledDigraph d = sample_dnp(6, 0.45, rng);
    for (const Pattern& p : {alternating, skew}) {
      const auto witness = exact_pi_hc(d, p);
      CHECK(witness.has_value() == enumerate_pi_hc(d, p));
      if (witness) {
        ++hits;
        CHECK(verify_pi_hc(d, *witness, p));
      }
    }
  }
  CHECK(hits > 5);
}

TEST_CASE("all-forward pattern degenerates to the directed solver") {
  Rng rng(11);
  const Pattern forward = parse_pattern(">");
  for (int rep = 0; rep < 40; ++rep) {
    const LabeledDigraph d = sample_dnp(6, 0.4, rng);
    CHECK(exact_pi_hc(d, forward).has_value() == exact_directed_hc(d).has_value());
  }
}

TEST_CASE("solver guards its preconditions") {
  const LabeledDigraph d = complete_digraph(5);
  CHECK_THROWS_AS(exact_pi_hc(d, parse_pattern("><")), std::invalid_argument);
  CHECK_THROWS_AS(exact_pi_hc(complete_digraph(18), parse_pattern(">"), 16), std::length_error);
}

TEST_CASE("exhaustive sparse sweep on four vertices") {
  // Every digraph on 4 vertices with at most 6 arcs, alternating pattern.
  const Pattern alt = parse_pattern("><");
  std::vector<std::pair<int, int>> slots;
  for (int tail = 0; tail < 4; ++tail)
    for (int head = 0; head < 4; ++head)
      if (head != tail) slots.emplace_back(tail, head);
  REQUIRE(slots.size() == 12);
  int cyclic = 0, total = 0;
  for (unsigned mask = 0; mask < (1u << 12); ++mask) {
    if (std::popcount(mask) > 6) continue;
    ++total;
    std::vector<Arc> arcs;
    for (int i = 0; i < 12; ++i)
      if (mask & (1u << i)) arcs.push_back({slots[i].first, slots[i].second, LabelOut});
    const LabeledDigraph d(4, std::move(arcs));
    const auto witness = exact_pi_hc(d, alt);
    CHECK(witness.has_value() == enumerate_pi_hc(d, alt));
    if (witness) {
      ++cyclic;
      CHECK(verify_pi_hc(d, *witness, alt));
    }
  }
  CHECK(total == 2510);
  CHECK(cyclic > 0);
}

TEST_CASE("equivalent patterns decide the same instances") {
  const Pattern base = parse_pattern(">><");
  std::vector<Pattern> orbit;
  for (int by = 0; by < base.length(); ++by) {
    orbit.push_back(rotate_pattern(base, by));
    orbit.push_back(reverse_flip(rotate_pattern(base, by)));
  }
  for (const Pattern& q : orbit)
    REQUIRE(to_string(canonical_form(q)) == to_string(canonical_form(base)));

  Rng rng(555);
  for (int rep = 0; rep < 25; ++rep) {
    const LabeledDigraph d = sample_dnp(6, 0.5, rng);
    const bool expected = enumerate_pi_hc(d, base);
    for (const Pattern& q : orbit) CHECK(enumerate_pi_hc(d, q) == expected);
  }
}

TEST_CASE("degree events are necessary for patterned cycles") {
  Rng rng(808);
  int alt_hits = 0, skew_hits = 0;
  for (int rep = 0; rep < 80; ++rep) {
    const LabeledDigraph d = sample_dnp(6, 0.4, rng);
    if (exact_pi_hc(d, parse_pattern("><"))) {
      ++alt_hits;
      CHECK(event_A(d, DegreeVariant::AlternatingA));
    }
    if (exact_pi_hc(d, parse_pattern(">><"))) {
      ++skew_hits;
      CHECK(event_A(d, DegreeVariant::NonAlternatingA));
    }
  }
  CHECK(alt_hits > 0);
  CHECK(skew_hits > 0);
}

TEST_CASE("witness verification rejects corrupted cycles") {
  const LabeledDigraph d = complete_digraph(6);
  const Pattern alt = parse_pattern("><");
  auto witness = exact_pi_hc(d, alt);
  REQUIRE(witness.has_value());
  REQUIRE(verify_pi_hc(d, *witness, alt));

  CycleWitness rotated = *witness;
  std::rotate(rotated.vertices.begin(), rotated.vertices.begin() + 1, rotated.vertices.end());
  std::rotate(rotated.orientations.begin(), rotated.orientations.begin() + 1,
              rotated.orientations.end());
  CHECK(verify_pi_hc(d, rotated, alt));  // rotation is immaterial

  CycleWitness missing = *witness;
  missing.vertices[0] = missing.vertices[1];
  CHECK_FALSE(verify_pi_hc(d, missing, alt));

  CycleWitness misaligned = *witness;
  misaligned.orientations[0] =
      misaligned.orientations[0] == Dir::Forward ? Dir::Backward : Dir::Forward;
  CHECK_FALSE(verify_pi_hc(d, misaligned, alt));

  CycleWitness short_cycle = *witness;
  short_cycle.vertices.pop_back();
  short_cycle.orientations.pop_back();
  CHECK_FALSE(verify_pi_hc(d, short_cycle, alt));

  // orientation pointing at an absent arc
  LabeledDigraph one_way(4, {{0, 1, LabelOut}, {1, 2, LabelOut}, {2, 3, LabelOut},
                             {3, 0, LabelOut}, {0, 3, LabelIn}});
  const Pattern forward = parse_pattern(">");
  const CycleWitness ring{{0, 1, 2, 3}, {Dir::Forward, Dir::Forward, Dir::Forward, Dir::Forward}, 0};
  CHECK(verify_pi_hc(one_way, ring, forward));
  CycleWitness backwards = ring;
  backwards.orientations[3] = Dir::Backward;
  CHECK_FALSE(verify_pi_hc(one_way, backwards, forward));
}

TEST_CASE("randomized directed search succeeds on generous instances") {
  const int n = 40;
  std::vector<std::vector<int>> out_adj(n);
  for (int v = 0; v < n; ++v)
    for (int w = 0; w < n; ++w)
      if (w != v) out_adj[v].push_back(w);
  Rng rng(31337);
  const auto cycle = heuristic_directed_hc(n, out_adj, rng);
  REQUIRE(cycle.has_value());
  CHECK(cycle_order_valid(complete_digraph(n), *cycle));
}

TEST_CASE("randomized patterned search succeeds on generous instances") {
  Rng rng(424242);
  const LabeledDigraph d = complete_digraph(12);
  for (const char* text : {"><", ">><", ">>><"}) {
    const Pattern p = parse_pattern(text);
    const auto witness = heuristic_pi_hc(d, p, rng);
    REQUIRE_MESSAGE(witness.has_value(), "pattern ", text);
    CHECK(verify_pi_hc(d, *witness, p));
  }
}
