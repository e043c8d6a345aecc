#include "pihc/digraph.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace pihc {

namespace {

std::uint64_t pair_key(int tail, int head) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(tail)) << 32) |
         static_cast<std::uint32_t>(head);
}

}  // namespace

LabeledDigraph::LabeledDigraph(int n, std::vector<Arc> arcs) : n_(n), arcs_(std::move(arcs)) {
  std::vector<std::int32_t> out_cnt(n_ + 1, 0), in_cnt(n_ + 1, 0);
  label_of_.reserve(arcs_.size() * 2);
  for (const Arc& a : arcs_) {
    if (a.tail == a.head || a.tail < 0 || a.tail >= n_ || a.head < 0 || a.head >= n_)
      throw std::invalid_argument("arc endpoints out of range");
    if (a.labels == 0 || a.labels > (LabelIn | LabelOut))
      throw std::invalid_argument("arc label set must be a nonempty subset of {in, out}");
    if (!label_of_.emplace(pair_key(a.tail, a.head), a.labels).second)
      throw std::invalid_argument("duplicate ordered pair");
    ++out_cnt[a.tail + 1];
    ++in_cnt[a.head + 1];
  }
  for (int v = 0; v < n_; ++v) {
    out_cnt[v + 1] += out_cnt[v];
    in_cnt[v + 1] += in_cnt[v];
  }
  out_off_ = out_cnt;
  in_off_ = in_cnt;
  out_flat_.resize(arcs_.size());
  in_flat_.resize(arcs_.size());
  std::vector<std::int32_t> out_pos(out_off_.begin(), out_off_.end() - 1);
  std::vector<std::int32_t> in_pos(in_off_.begin(), in_off_.end() - 1);
  for (const Arc& a : arcs_) {
    out_flat_[out_pos[a.tail]++] = a.head;
    in_flat_[in_pos[a.head]++] = a.tail;
  }
}

bool LabeledDigraph::has_arc(int tail, int head) const {
  return label_of_.count(pair_key(tail, head)) != 0;
}

std::uint8_t LabeledDigraph::labels(int tail, int head) const {
  auto it = label_of_.find(pair_key(tail, head));
  return it == label_of_.end() ? 0 : it->second;
}

std::span<const std::int32_t> LabeledDigraph::out_neighbors(int v) const {
  return {out_flat_.data() + out_off_[v], out_flat_.data() + out_off_[v + 1]};
}

std::span<const std::int32_t> LabeledDigraph::in_neighbors(int v) const {
  return {in_flat_.data() + in_off_[v], in_flat_.data() + in_off_[v + 1]};
}

bool event_A(const LabeledDigraph& d, DegreeVariant variant) {
  for (int v = 0; v < d.n(); ++v) {
    if (variant == DegreeVariant::AlternatingA) {
      if (d.in_degree(v) < 2 && d.out_degree(v) < 2) return false;
    } else {
      if (d.total_degree(v) < 2) return false;
    }
  }
  return true;
}

LowDegreeStats low_degree_stats(const LabeledDigraph& d) {
  LowDegreeStats s;
  for (int v = 0; v < d.n(); ++v) {
    if (d.in_degree(v) == 1 && d.out_degree(v) == 1) ++s.x;
    if (d.total_degree(v) == 1) ++s.y;
  }
  return s;
}

double threshold_p(DegreeVariant variant, int n, double c) {
  if (n < 3) throw std::domain_error("threshold_p needs n >= 3");
  const double ln = std::log(n);
  const double lln = std::log(ln);
  const double mult = variant == DegreeVariant::AlternatingA ? 2.0 : 1.0;
  const double p = (ln + mult * lln + c) / (2.0 * n);
  return std::clamp(p, 0.0, 1.0);
}

std::pair<double, double> p_window(DegreeVariant variant, int n) {
  if (n < 16) throw std::domain_error("p_window needs n >= 16");
  const double omega = std::log(std::log(std::log(n)));
  return {threshold_p(variant, n, -omega), threshold_p(variant, n, omega)};
}

double split_round_p(double p) {
  if (p < 0.0 || p > 1.0) throw std::domain_error("p outside [0, 1]");
  return 1.0 - std::sqrt(1.0 - p);
}

namespace {

// Visits each slot of [0, slots) independently with probability q via
// geometric jumps; calls sink(slot) on hits, in increasing slot order.
template <typename Sink>
void bernoulli_hits(std::int64_t slots, double q, Rng& rng, Sink&& sink) {
  if (q <= 0.0) return;
  if (q >= 1.0) {
    for (std::int64_t s = 0; s < slots; ++s) sink(s);
    return;
  }
  const double denom = std::log1p(-q);
  std::int64_t s = -1;
  while (true) {
    // skip ~ Geometric(q): number of misses before the next hit
    const double u = rng.next_unit();
    const double skip = std::floor(std::log1p(-u) / denom);
    s += 1 + (skip >= static_cast<double>(slots) ? slots : static_cast<std::int64_t>(skip));
    if (s >= slots) return;
    sink(s);
  }
}

std::pair<int, int> slot_pair(int n, std::int64_t slot) {
  const int tail = static_cast<int>(slot / (n - 1));
  const int rem = static_cast<int>(slot % (n - 1));
  return {tail, rem + (rem >= tail ? 1 : 0)};
}

// Ordered-pair hits of one two-round sample, as sorted (slot, labels) runs.
std::vector<std::pair<std::int64_t, std::uint8_t>> two_round_hits(int n, double p, Rng& rng) {
  const double q = split_round_p(p);
  const std::int64_t slots = static_cast<std::int64_t>(n) * (n - 1);
  std::vector<std::pair<std::int64_t, std::uint8_t>> hits;
  bernoulli_hits(slots, q, rng, [&](std::int64_t s) { hits.emplace_back(s, LabelIn); });
  const std::size_t in_end = hits.size();
  bernoulli_hits(slots, q, rng, [&](std::int64_t s) { hits.emplace_back(s, LabelOut); });
  std::inplace_merge(hits.begin(), hits.begin() + in_end, hits.end());
  // merge labels of pairs hit by both rounds
  std::size_t w = 0;
  for (std::size_t r = 0; r < hits.size(); ++r) {
    if (w > 0 && hits[w - 1].first == hits[r].first) {
      hits[w - 1].second |= hits[r].second;
    } else {
      hits[w++] = hits[r];
    }
  }
  hits.resize(w);
  return hits;
}

}  // namespace

LabeledDigraph sample_dnp(int n, double p, Rng& rng) {
  if (n < 2) throw std::domain_error("sample_dnp needs n >= 2");
  auto hits = two_round_hits(n, p, rng);
  std::vector<Arc> arcs;
  arcs.reserve(hits.size());
  for (auto [slot, labels] : hits) {
    auto [tail, head] = slot_pair(n, slot);
    arcs.push_back({tail, head, labels});
  }
  return LabeledDigraph(n, std::move(arcs));
}

void sample_dnp_degrees(int n, double p, Rng& rng, std::vector<std::int32_t>& in_deg,
                        std::vector<std::int32_t>& out_deg) {
  in_deg.assign(n, 0);
  out_deg.assign(n, 0);
  for (auto [slot, labels] : two_round_hits(n, p, rng)) {
    (void)labels;
    auto [tail, head] = slot_pair(n, slot);
    ++out_deg[tail];
    ++in_deg[head];
  }
}

LabeledDigraph sample_dnm(int n, std::int64_t m, Rng& rng) {
  if (n < 2) throw std::domain_error("sample_dnm needs n >= 2");
  const std::int64_t slots = static_cast<std::int64_t>(n) * (n - 1);
  if (m < 0 || m > slots) throw std::domain_error("m outside [0, n(n-1)]");
  std::vector<Arc> arcs;
  arcs.reserve(m);
  for (std::uint64_t slot : rng.sample_distinct(slots, m)) {
    auto [tail, head] = slot_pair(n, static_cast<std::int64_t>(slot));
    arcs.push_back({tail, head, rng.next_bool() ? LabelOut : LabelIn});
  }
  return LabeledDigraph(n, std::move(arcs));
}

void write_digraph(std::ostream& os, const LabeledDigraph& d) {
  os << "n=" << d.n() << '\n';
  std::vector<Arc> sorted(d.arcs().begin(), d.arcs().end());
  std::sort(sorted.begin(), sorted.end(), [](const Arc& a, const Arc& b) {
    return std::pair(a.tail, a.head) < std::pair(b.tail, b.head);
  });
  for (const Arc& a : sorted) {
    os << a.tail << ' ' << a.head << ' ';
    if (a.labels & LabelIn) os << 'i';
    if (a.labels & LabelOut) os << 'o';
    os << '\n';
  }
}

LabeledDigraph read_digraph(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("n=", 0) != 0)
    throw std::runtime_error("digraph header must be n=<int>");
  const int n = std::stoi(line.substr(2));
  std::vector<Arc> arcs;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    int tail = 0, head = 0;
    std::string labels;
    if (!(ls >> tail >> head >> labels)) throw std::runtime_error("bad arc line: " + line);
    std::uint8_t bits = 0;
    for (char ch : labels) {
      if (ch == 'i') bits |= LabelIn;
      else if (ch == 'o') bits |= LabelOut;
      else throw std::runtime_error("bad label in line: " + line);
    }
    arcs.push_back({tail, head, bits});
  }
  return LabeledDigraph(n, std::move(arcs));
}

}  // namespace pihc
