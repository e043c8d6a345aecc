#pragma once

#include <optional>
#include <vector>

#include "pihc/digraph.hpp"
#include "pihc/pattern.hpp"
#include "pihc/rng.hpp"

namespace pihc {

// Hamilton cycle in cyclic order. orientations[i] orients the arc between
// vertices[i] and vertices[(i+1) % n]: Forward means vertices[i] is the tail.
// offset records which pattern rotation the sequence realizes.
struct CycleWitness {
  std::vector<int> vertices;
  std::vector<Dir> orientations;
  int offset = 0;
};

// Full check of a claimed patterned Hamilton cycle: vertex cover, arc
// existence (labels ignored), and pattern alignment under some rotation.
bool verify_pi_hc(const LabeledDigraph& d, const CycleWitness& w, const Pattern& p);

// Exhaustive backtracking over cycle orders and pattern offsets, first vertex
// pinned to 0, witness normalized to start at vertex 0. Throws
// std::length_error above the cap and std::invalid_argument when the pattern
// length does not divide n.
std::optional<CycleWitness> exact_pi_hc(const LabeledDigraph& d, const Pattern& p, int cap = 16);

// Reference decision procedure: tries every cyclic vertex order and offset
// with no pruning. n <= 9.
bool enumerate_pi_hc(const LabeledDigraph& d, const Pattern& p);

// Plain directed Hamilton cycle by backtracking, n <= cap (default 18).
std::optional<std::vector<int>> exact_directed_hc(const LabeledDigraph& d, int cap = 18);

struct SearchBudget {
  int restarts = 50;
  // local patching / rotation moves per restart, scaled by vertex count
  int moves_per_vertex = 100;
};

// Randomized directed Hamilton cycle search: random cycle cover (perfect
// matching between out- and in-slots), then 2-swap patching with a shuffle
// walk when no merging swap exists. Returns the cycle as a vertex order.
std::optional<std::vector<int>> heuristic_directed_hc(int n,
                                                      const std::vector<std::vector<int>>& out_adj,
                                                      Rng& rng, const SearchBudget& budget = {});

// Randomized patterned Hamilton cycle search at scales the exact solver
// cannot touch. Alternating patterns reduce to an undirected bipartite cycle
// over a source/sink role split (extension-rotation); longer primitive
// patterns assign position roles, chain per-step matchings with stochastic
// role repair, and patch the resulting aligned cycle cover.
std::optional<CycleWitness> heuristic_pi_hc(const LabeledDigraph& d, const Pattern& p, Rng& rng,
                                            const SearchBudget& budget = {});

}  // namespace pihc
