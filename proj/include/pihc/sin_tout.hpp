#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "pihc/digraph.hpp"
#include "pihc/hc_solve.hpp"
#include "pihc/pattern.hpp"
#include "pihc/result.hpp"
#include "pihc/rng.hpp"

namespace pihc {

class IntMatrix {
 public:
  IntMatrix() = default;
  explicit IntMatrix(int dim, int fill = 0) : dim_(dim), cells_(dim * dim, fill) {}

  int dim() const { return dim_; }
  int& at(int i, int j) { return cells_[static_cast<std::size_t>(i) * dim_ + j]; }
  int at(int i, int j) const { return cells_[static_cast<std::size_t>(i) * dim_ + j]; }

 private:
  int dim_ = 0;
  std::vector<int> cells_;
};

// dim x dim matrix with 2 in every cyclically adjacent cell (i, i +/- 1 mod
// dim) and 0 elsewhere; the choice counts used by the chained construction.
IntMatrix cyclic_two_matrix(int dim);

// Chosen arcs of one vertex: tails[j] holds its in-arc tails inside bin j,
// heads[j] its out-arc heads, never the vertex itself.
struct VertexChoices {
  std::vector<std::vector<int>> tails;
  std::vector<std::vector<int>> heads;
};

// Random multi-digraph on binned vertices: every vertex of bin i picks
// s(i,j) distinct in-tails and t(i,j) distinct out-heads in each bin j,
// uniformly and independently per (vertex, bin, direction). The same ordered
// pair may occur once in an in-pool and once in an out-pool.
struct SinToutInstance {
  int k = 0;
  std::vector<std::vector<int>> bins;  // vertex ids per bin
  std::vector<int> bin_of;             // vertex id -> bin index
  IntMatrix s_counts, t_counts;
  std::vector<VertexChoices> choices;  // indexed by vertex id

  int n() const { return static_cast<int>(bin_of.size()); }
};

struct BinTooSmall : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// bins must partition 0..n-1; requires s(i,j), t(i,j) <= |B_j| - [i == j],
// else BinTooSmall.
SinToutInstance sample_sin_tout(const std::vector<std::vector<int>>& bins, const IntMatrix& s,
                                const IntMatrix& t, Rng& rng);

// All chosen arcs as a simple digraph: in-choices labeled in, out-choices
// labeled out, coinciding pairs merged.
LabeledDigraph instance_digraph(const SinToutInstance& inst);

// Random bipartite graph where each side picks two neighbours on the other:
// every left names >= 2 rights, every right >= 2 lefts, <= 4m edges total.
struct BipartiteTwoOut {
  std::vector<std::vector<int>> left_picks;   // right indices per left vertex
  std::vector<std::vector<int>> right_picks;  // left indices per right vertex

  int size() const { return static_cast<int>(left_picks.size()); }
};

// Uniform two-choices-per-vertex sample; m >= 2.
BipartiteTwoOut sample_walkup(int m, Rng& rng);

// Maximum matching over the union of both pick pools; a perfect one as
// left -> right, or nullopt (a Hall violator then exists). Throws when the
// sides differ in size.
std::optional<std::vector<int>> find_perfect_matching(const BipartiteTwoOut& g);

// A two-bin instance with counts (0 2; 2 0) splits into independent pick
// graphs, one per arc direction. forward covers arcs B_1 -> B_2 (left side
// B_1), backward the arcs B_2 -> B_1 (left side B_2).
struct DirectionSplit {
  BipartiteTwoOut forward;
  BipartiteTwoOut backward;
};
DirectionSplit split_two_bins(const SinToutInstance& inst);

// Vertex-disjoint paths with one vertex per bin, in bin order.
struct PathFamily {
  std::vector<std::vector<int>> paths;
};

// Perfect matchings between consecutive bins, oriented by the pattern,
// chained into paths covering every vertex. Requires k >= 3 (two-bin
// shortcuts are out of scope) and equal bin sizes. A non-perfect matching at
// step i (bins i, i+1) reports MatchingFailed with detail = i.
Result<PathFamily> chain_matchings(const SinToutInstance& inst, const Pattern& p);

// Contract each path to one vertex, connect path ends with the wrap-step
// choice arcs, solve directed Hamiltonicity (exactly up to 18 paths, then by
// randomized search), and un-contract into a full patterned cycle. The
// witness is verified against the instance before it is returned.
Result<CycleWitness> hc_on_contracted(const PathFamily& paths, const SinToutInstance& inst,
                                      const Pattern& p, Rng& rng, const SearchBudget& budget = {});

}  // namespace pihc
