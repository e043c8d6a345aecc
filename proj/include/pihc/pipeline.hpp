#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "pihc/digraph.hpp"
#include "pihc/hc_solve.hpp"
#include "pihc/pattern.hpp"
#include "pihc/process.hpp"
#include "pihc/result.hpp"
#include "pihc/rng.hpp"
#include "pihc/sin_tout.hpp"

namespace pihc {

struct DivisibilityError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Vertex-to-bin partition. Alternating patterns run on four bins regardless
// of the pattern length; all later stages use k_eff. Swaps exchange the bins
// of two vertices, so sizes never change.
struct BinAssignment {
  int k_eff = 0;
  std::vector<int> bin_of;
  std::vector<int> sizes;

  struct Move {
    int vertex;
    int from;
    int to;
  };
  std::vector<Move> swap_log;

  int n() const { return static_cast<int>(bin_of.size()); }
  std::vector<std::vector<int>> members() const;
  void swap_vertices(int u, int v);
};

// Equitable partition in the given vertex order: k_eff contiguous blocks,
// the two leading bins taking the ceiling sizes in the alternating case.
// Requires even n (alternating) or k | n (primitive length >= 3), else
// DivisibilityError.
BinAssignment assign_bins(int n, const Pattern& p);
BinAssignment assign_bins(const std::vector<int>& vertex_order, const Pattern& p);

enum class VertexClass : std::uint8_t { Good, Bad, Dangerous };

// Classification from the visible per-bin degree counts of the two exposure
// rounds at the lower window edge. Good needs at least 4k+2 visible arcs per
// bin per direction; dangerous means merged total degree at most 4k+2; bad is
// the rest. The classification never changes afterwards.
struct VertexClassification {
  int k_eff = 0;
  std::vector<VertexClass> cls;
  std::vector<std::vector<int>> d_out, d_in;  // [vertex][bin] visible counts
  int good_count = 0, bad_count = 0, dangerous_count = 0;

  bool good(int v) const { return cls[v] == VertexClass::Good; }
};

VertexClassification classify_vertices(const LabeledDigraph& at_lower_edge,
                                       const BinAssignment& bins);

// Neighbourhood conditions checked in the underlying undirected graph, balls
// of radius 10k, breadth-first with a visit cutoff of 40k^2 per source (a
// source whose ball hits the cutoff counts as a violation, with a message
// saying so):
//   h1: every vertex has fewer than 4k non-good vertices within 10k (itself
//       not counted),
//   h2: dangerous vertices have only good ones within 10k,
//   h3: every cycle of length <= 10k, two-cycles included, has only good
//       vertices within distance 10k of the cycle.
// h3 is skipped (h3_checked false) when h1 or h2 already failed.
struct HandsomeReport {
  bool h1 = true, h2 = true, h3 = true;
  bool h3_checked = false;
  int h1_vertex = -1;
  int h2_vertex = -1, h2_witness = -1;
  std::vector<int> h3_cycle;
  int h3_witness = -1;
  std::string message;

  bool all() const { return h1 && h2 && h3; }
  int first_failed() const { return !h1 ? 1 : !h2 ? 2 : !h3 ? 3 : 0; }
};

HandsomeReport check_handsome(const LabeledDigraph& d, const VertexClassification& cls);

// Undirected ball around v: distance <= radius, at most cutoff vertices
// visited (v included); second member reports whether the cutoff truncated
// the search.
std::pair<std::vector<int>, bool> undirected_ball(const LabeledDigraph& d, int v, int radius,
                                                  int cutoff);

// Snapshot at the lower window edge plus the window arrivals incident with a
// dangerous vertex, disclosed one by one until the degree event holds.
struct DStar {
  LabeledDigraph at_lower_edge;
  std::vector<Arc> disclosed;  // window arcs incident with dangerous vertices
  std::int64_t m_lower = 0, m_star = 0, m_upper = 0;

  LabeledDigraph combined() const;
};

// Walks the arrival order across the density window. Fails with
// AOutsideWindow unless the event becomes true strictly inside it.
Result<DStar> expose_until_A(const ProcessTrace& trace, const VertexClassification& cls,
                             DegreeVariant variant);

// Discovery bookkeeping. An arc counts as discovered exactly when one of its
// endpoints is; neighbour lists are readable for discovered vertices only,
// and the endpoints of undiscovered arcs only after begin_extraction(). Any
// earlier read throws: stages must not peek at unexposed endpoints.
class ExposureState {
 public:
  explicit ExposureState(const LabeledDigraph& at_lower_edge);

  bool discovered(int v) const { return discovered_[v] != 0; }
  void discover_vertex(int v) { discovered_[v] = 1; }
  bool arc_discovered(int tail, int head) const {
    return discovered(tail) || discovered(head);
  }

  std::span<const std::int32_t> out_neighbors(int v) const;
  std::span<const std::int32_t> in_neighbors(int v) const;

  // count of undiscovered arcs visible from v in the given direction whose
  // other end lies in bin b; size-only, allowed at any time
  int undiscovered_count(int v, int bin, bool outgoing, const BinAssignment& bins) const;

  void begin_extraction() { extraction_ = true; }
  bool extraction_started() const { return extraction_; }

  // the unexposed endpoints behind undiscovered_count; extraction phase only
  std::vector<int> undiscovered_pool(int v, int bin, bool outgoing,
                                     const BinAssignment& bins) const;

  std::int64_t pool_reads() const { return pool_reads_; }

 private:
  const LabeledDigraph* d_;
  std::vector<char> discovered_;
  bool extraction_ = false;
  mutable std::int64_t pool_reads_ = 0;
};

// One short path per non-good vertex (plus at most one synthetic path when
// every vertex is good): 6k arcs, pattern-aligned, one vertex per bin after
// the recorded swaps, ends undiscovered. In the alternating case with
// n = 2 mod 4 exactly one path carries two extra arcs.
struct PathRecord {
  std::vector<int> vertices;
  int center = -1;     // the path's non-good vertex, or the seed of a fallback
  bool fallback = false;
};

struct PathCollection {
  std::vector<PathRecord> paths;
};

Result<PathCollection> build_path_collection(const DStar& dstar, const VertexClassification& cls,
                                             BinAssignment& bins, const Pattern& p, Rng& rng,
                                             ExposureState& state);

// Quotient after contracting every path to a fat vertex placed in the first
// bin. Ordinary vertices keep their bins; every bin ends up with exactly
// n'/k_eff members (guaranteed by the path bin accounting, asserted here).
struct ContractedDigraph {
  int n_prime = 0;
  int k = 0;
  std::vector<int> bin_of;        // by contracted id
  std::vector<int> original;      // ordinary: source vertex; fat: -1
  std::vector<int> fat_path;      // fat: path index; ordinary: -1
  std::vector<int> id_of;         // original vertex -> contracted id (-1 if in a path)

  std::vector<std::vector<int>> members() const;
};

ContractedDigraph contract(const PathCollection& paths, const BinAssignment& bins);

// Step from the quotient to a choice instance: for every contracted vertex,
// both directions and both adjacent bins, draw two endpoints uniformly from
// the undiscovered visible pools (path ends supply the pools of their fat
// vertex, facing outward only). Pools below two abort with NotHandsome
// (detail 5): the neighbourhood assumptions failed quantitatively.
Result<SinToutInstance> extract_sin_tout(const ContractedDigraph& cd, const PathCollection& paths,
                                         ExposureState& state, const BinAssignment& bins,
                                         Rng& rng);

struct PipelineConfig {
  int retries = 3;            // extra attempts with freshly permuted bins
  bool fallback_exact = false;  // exhaustive search when n <= 16 after retries
  SearchBudget budget;        // contracted Hamilton cycle search
};

struct PipelineDiagnostics {
  int attempts = 0;
  int good = 0, bad = 0, dangerous = 0;
  std::int64_t m_lower = 0, m_star = 0, m_upper = 0;
  HandsomeReport handsome;
  int path_count = 0;
  int n_contracted = 0;
  std::int64_t pool_reads = 0;
  std::optional<Failure> failure;  // last attempt's failure
};

// Full construction at the hitting time of the degree event: classify, walk
// the window, check neighbourhood conditions, build and contract paths,
// extract a choice instance, chain matchings, solve the contracted cycle and
// un-contract. Success is verified against the hitting-time prefix before
// returning. Alternating patterns run internally on four bins with
// (>,<,>,<) and the witness follows the original two-step pattern.
Result<CycleWitness> run_pipeline(const ProcessTrace& trace, const Pattern& p, Rng& rng,
                                  const PipelineConfig& config = {},
                                  PipelineDiagnostics* diagnostics = nullptr);

}  // namespace pihc
