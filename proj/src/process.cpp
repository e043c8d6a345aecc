#include "pihc/process.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pihc/rng.hpp"

namespace pihc {

ProcessTrace::ProcessTrace(int n, std::uint64_t seed) : n_(n), seed_(seed) {
  if (n < 2) throw std::domain_error("trace needs n >= 2");
  if (pair_count() > (1LL << 32)) throw std::domain_error("trace too large; use sample_dnp");
  const std::int64_t pairs = pair_count();
  std::vector<std::pair<double, std::uint32_t>> keyed(pairs);
  for (std::int64_t i = 0; i < pairs; ++i)
    keyed[i] = {std::min(stamp(i, 0), stamp(i, 1)), static_cast<std::uint32_t>(i)};
  std::sort(keyed.begin(), keyed.end());
  order_.resize(pairs);
  for (std::int64_t i = 0; i < pairs; ++i) order_[i] = keyed[i].second;
}

double ProcessTrace::stamp(std::int64_t pair, int round) const {
  return unit_double(keyed_u64(seed_, static_cast<std::uint64_t>(pair) * 2 + round));
}

std::int64_t ProcessTrace::pair_index(int tail, int head) const {
  return static_cast<std::int64_t>(tail) * (n_ - 1) + head - (head > tail ? 1 : 0);
}

std::pair<int, int> ProcessTrace::pair_of(std::int64_t index) const {
  const int tail = static_cast<int>(index / (n_ - 1));
  const int rem = static_cast<int>(index % (n_ - 1));
  return {tail, rem + (rem >= tail ? 1 : 0)};
}

double ProcessTrace::x_in(int tail, int head) const { return stamp(pair_index(tail, head), 0); }

double ProcessTrace::x_out(int tail, int head) const { return stamp(pair_index(tail, head), 1); }

double ProcessTrace::arrival_stamp(int tail, int head) const {
  return std::min(x_in(tail, head), x_out(tail, head));
}

std::pair<int, int> ProcessTrace::arrival(std::int64_t i) const { return pair_of(order_[i]); }

double ProcessTrace::arrival_stamp_at(std::int64_t i) const {
  const std::int64_t pair = order_[i];
  return std::min(stamp(pair, 0), stamp(pair, 1));
}

std::int64_t ProcessTrace::count_at_or_below(double s) const {
  std::int64_t lo = 0, hi = pair_count();
  while (lo < hi) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    if (arrival_stamp_at(mid) <= s) lo = mid + 1;
    else hi = mid;
  }
  return lo;
}

LabeledDigraph ProcessTrace::snapshot(double per_round_threshold, std::int64_t arc_cap) const {
  std::vector<Arc> arcs;
  for (std::int64_t i = 0; i < arc_cap; ++i) {
    const std::int64_t pair = order_[i];
    const double in_stamp = stamp(pair, 0);
    const double out_stamp = stamp(pair, 1);
    if (std::min(in_stamp, out_stamp) > per_round_threshold) break;
    std::uint8_t labels = 0;
    if (in_stamp <= per_round_threshold) labels |= LabelIn;
    if (out_stamp <= per_round_threshold) labels |= LabelOut;
    auto [tail, head] = pair_of(pair);
    arcs.push_back({tail, head, labels});
  }
  return LabeledDigraph(n_, std::move(arcs));
}

LabeledDigraph ProcessTrace::prefix_at(double p) const {
  return snapshot(split_round_p(p), pair_count());
}

LabeledDigraph ProcessTrace::prefix_count(std::int64_t m) const {
  if (m < 0 || m > pair_count()) throw std::domain_error("prefix count out of range");
  if (m == 0) return LabeledDigraph(n_, {});
  return snapshot(arrival_stamp_at(m - 1), m);
}

std::int64_t ProcessTrace::hitting_index(DegreeVariant variant) const {
  if (variant == DegreeVariant::AlternatingA && n_ < 3)
    throw std::domain_error("AlternatingA is never reached for n < 3");
  std::vector<std::int32_t> in_deg(n_, 0), out_deg(n_, 0);
  auto deficient = [&](int v) {
    return variant == DegreeVariant::AlternatingA ? in_deg[v] < 2 && out_deg[v] < 2
                                                  : in_deg[v] + out_deg[v] < 2;
  };
  std::int64_t bad = n_;
  for (std::int64_t i = 0; i < pair_count(); ++i) {
    auto [tail, head] = arrival(i);
    const bool tail_was = deficient(tail), head_was = deficient(head);
    ++out_deg[tail];
    ++in_deg[head];
    if (tail_was && !deficient(tail)) --bad;
    if (head_was && !deficient(head)) --bad;
    if (bad == 0) return i + 1;
  }
  throw std::logic_error("complete digraph fails the degree event");
}

double ProcessTrace::merged_clock(double s) { return 2.0 * s - s * s; }

}  // namespace pihc
