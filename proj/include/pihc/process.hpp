#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "pihc/digraph.hpp"

namespace pihc {

// Two-round arc-exposure process. Every ordered pair (v, w) carries two
// independent uniform stamps; the pair's arc arrives at the smaller one. The
// stamps live on the per-round clock p' = split_round_p(p); at merged density
// p the visible arcs are exactly those with min-stamp <= p'.
//
// Stamps are pure functions of (seed, pair, round), so a trace is immutable,
// cheap to share across workers, and reproducible from (n, seed) alone. Only
// the sorted arrival order is materialized: construction is O(n^2 log n) and
// the type is meant for hitting-time studies at moderate n, not for the
// degree-only experiments that run at n in the tens of thousands.
class ProcessTrace {
 public:
  ProcessTrace(int n, std::uint64_t seed);

  int n() const { return n_; }
  std::uint64_t seed() const { return seed_; }
  std::int64_t pair_count() const { return static_cast<std::int64_t>(n_) * (n_ - 1); }

  double x_in(int tail, int head) const;
  double x_out(int tail, int head) const;
  double arrival_stamp(int tail, int head) const;  // min of the two, p'-clock

  // i-th arriving ordered pair, i in [0, pair_count). Stamp ties are broken
  // by (tail, head).
  std::pair<int, int> arrival(std::int64_t i) const;
  double arrival_stamp_at(std::int64_t i) const;

  // Number of arrivals with stamp <= s (p'-clock).
  std::int64_t count_at_or_below(double s) const;

  // Snapshot at merged density p: arcs with min-stamp <= split_round_p(p),
  // labels telling which rounds have landed by then.
  LabeledDigraph prefix_at(double p) const;

  // Snapshot after the first m arrivals.
  LabeledDigraph prefix_count(std::int64_t m) const;

  // Smallest m with event_A(prefix_count(m)). AlternatingA needs n >= 3.
  std::int64_t hitting_index(DegreeVariant variant) const;

  static double merged_clock(double per_round_stamp);  // 2s - s^2

 private:
  double stamp(std::int64_t pair, int round) const;
  std::int64_t pair_index(int tail, int head) const;
  std::pair<int, int> pair_of(std::int64_t index) const;
  LabeledDigraph snapshot(double per_round_threshold, std::int64_t arc_cap) const;

  int n_;
  std::uint64_t seed_;
  std::vector<std::uint32_t> order_;  // pair indices sorted by (stamp, pair)
};

}  // namespace pihc
