#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <unordered_map>
#include <vector>

#include "pihc/rng.hpp"

namespace pihc {

// Arc label bits: how an arc entered the two-round exposure process.
enum ArcLabel : std::uint8_t { LabelIn = 1, LabelOut = 2 };

struct Arc {
  std::int32_t tail = 0;
  std::int32_t head = 0;
  std::uint8_t labels = 0;  // nonempty subset of {LabelIn, LabelOut}

  bool operator==(const Arc&) const = default;
};

// Simple digraph on {0..n-1} whose arcs carry a nonempty label set. A
// parallel in/out pair on the same ordered pair is merged into one arc, so
// degrees count ordered pairs, never labels.
class LabeledDigraph {
 public:
  LabeledDigraph() = default;
  LabeledDigraph(int n, std::vector<Arc> arcs);

  int n() const { return n_; }
  std::size_t arc_count() const { return arcs_.size(); }
  std::span<const Arc> arcs() const { return arcs_; }

  bool has_arc(int tail, int head) const;
  std::uint8_t labels(int tail, int head) const;  // 0 when absent

  // Heads of arcs leaving v / tails of arcs entering v.
  std::span<const std::int32_t> out_neighbors(int v) const;
  std::span<const std::int32_t> in_neighbors(int v) const;

  int out_degree(int v) const { return static_cast<int>(out_neighbors(v).size()); }
  int in_degree(int v) const { return static_cast<int>(in_neighbors(v).size()); }
  int total_degree(int v) const { return out_degree(v) + in_degree(v); }

 private:
  int n_ = 0;
  std::vector<Arc> arcs_;
  std::vector<std::int32_t> out_flat_, in_flat_;
  std::vector<std::int32_t> out_off_, in_off_;
  std::unordered_map<std::uint64_t, std::uint8_t> label_of_;
};

enum class DegreeVariant {
  AlternatingA,     // every vertex has in-degree >= 2 or out-degree >= 2
  NonAlternatingA,  // every vertex has total degree >= 2
};

bool event_A(const LabeledDigraph& d, DegreeVariant variant);

struct LowDegreeStats {
  int x = 0;  // vertices with in-degree 1 and out-degree 1
  int y = 0;  // vertices with total degree 1
};

LowDegreeStats low_degree_stats(const LabeledDigraph& d);

// Critical densities (log n + 2 log log n + c)/(2n) resp.
// (log n + log log n + c)/(2n), clamped to [0, 1]. Requires n >= 3.
double threshold_p(DegreeVariant variant, int n, double c);

// Same with c replaced by +/- log log log n. Requires n >= 16.
std::pair<double, double> p_window(DegreeVariant variant, int n);

// Per-round density p' with (1-p')^2 = 1-p, i.e. two independent Bernoulli(p')
// rounds merge into one Bernoulli(p) round.
double split_round_p(double p);

// D_{n,p}: each ordered pair carries independent in/out coins of bias
// split_round_p(p); the arc is present when either lands.
LabeledDigraph sample_dnp(int n, double p, Rng& rng);

// Degree-only variant of sample_dnp for large n: fills merged in/out degree
// arrays without materializing the digraph.
void sample_dnp_degrees(int n, double p, Rng& rng, std::vector<std::int32_t>& in_deg,
                        std::vector<std::int32_t>& out_deg);

// D_{n,m}: m distinct ordered pairs, uniform. Each arc gets the single label
// that caused its arrival (uniform coin); label pairs only arise in the
// continuous process and are irrelevant to degree events.
LabeledDigraph sample_dnm(int n, std::int64_t m, Rng& rng);

// Text form: "n=<int>" header, then one arc per line "tail head labels" with
// labels in {i, o, io}. Vertices are zero-based.
void write_digraph(std::ostream& os, const LabeledDigraph& d);
LabeledDigraph read_digraph(std::istream& is);

}  // namespace pihc
