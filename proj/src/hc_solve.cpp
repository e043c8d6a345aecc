#include "pihc/hc_solve.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace pihc {

bool verify_pi_hc(const LabeledDigraph& d, const CycleWitness& w, const Pattern& p) {
  const std::size_t n = static_cast<std::size_t>(d.n());
  const std::size_t k = p.length();
  if (n < 2 || w.vertices.size() != n || w.orientations.size() != n) return false;
  if (n % k != 0) return false;

  std::vector<bool> seen(n, false);
  for (int v : w.vertices) {
    if (v < 0 || v >= d.n() || seen[v]) return false;
    seen[v] = true;
  }
  for (std::size_t i = 0; i < n; ++i) {
    const int a = w.vertices[i];
    const int b = w.vertices[(i + 1) % n];
    const bool ok = w.orientations[i] == Dir::Forward ? d.has_arc(a, b) : d.has_arc(b, a);
    if (!ok) return false;
  }
  // pattern alignment under some rotation; r < k suffices when k | n
  for (std::size_t r = 0; r < k; ++r) {
    bool match = true;
    for (std::size_t i = 0; i < n && match; ++i)
      match = w.orientations[(i + r) % n] == p.at(i);
    if (match) return true;
  }
  return false;
}

namespace {

struct PiBacktracker {
  const LabeledDigraph& d;
  std::vector<Dir> orient;  // required orientation at each cycle position
  std::vector<int> cycle;
  std::vector<bool> used;

  bool extend(std::size_t pos) {
    const std::size_t n = static_cast<std::size_t>(d.n());
    if (pos == n) {
      const int last = cycle[n - 1];
      return orient[n - 1] == Dir::Forward ? d.has_arc(last, cycle[0]) : d.has_arc(cycle[0], last);
    }
    const int prev = cycle[pos - 1];
    const auto candidates =
        orient[pos - 1] == Dir::Forward ? d.out_neighbors(prev) : d.in_neighbors(prev);
    for (int w : candidates) {
      if (used[w]) continue;
      used[w] = true;
      cycle[pos] = w;
      if (extend(pos + 1)) return true;
      used[w] = false;
    }
    return false;
  }
};

}  // namespace

std::optional<CycleWitness> exact_pi_hc(const LabeledDigraph& d, const Pattern& p, int cap) {
  const int n = d.n();
  const std::size_t k = p.length();
  if (n > cap) throw std::length_error("exact search capped at n <= " + std::to_string(cap));
  if (n < 2 || static_cast<std::size_t>(n) % k != 0)
    throw std::invalid_argument("pattern length must divide n");

  PiBacktracker bt{d, std::vector<Dir>(n), std::vector<int>(n), std::vector<bool>(n, false)};
  bt.cycle[0] = 0;
  bt.used[0] = true;
  for (std::size_t offset = 0; offset < k; ++offset) {
    for (int i = 0; i < n; ++i) bt.orient[i] = p.at(i + offset);
    if (bt.extend(1)) {
      CycleWitness w{bt.cycle, bt.orient, static_cast<int>(offset)};
      return w;
    }
  }
  return std::nullopt;
}

bool enumerate_pi_hc(const LabeledDigraph& d, const Pattern& p) {
  const int n = d.n();
  const std::size_t k = p.length();
  if (n > 9) throw std::length_error("enumeration capped at n <= 9");
  if (n < 2 || static_cast<std::size_t>(n) % k != 0) return false;

  std::vector<int> rest(n - 1);
  std::iota(rest.begin(), rest.end(), 1);
  std::vector<int> cycle(n);
  cycle[0] = 0;
  do {
    std::copy(rest.begin(), rest.end(), cycle.begin() + 1);
    for (std::size_t offset = 0; offset < k; ++offset) {
      bool ok = true;
      for (int i = 0; i < n && ok; ++i) {
        const int a = cycle[i];
        const int b = cycle[(i + 1) % n];
        ok = p.at(i + offset) == Dir::Forward ? d.has_arc(a, b) : d.has_arc(b, a);
      }
      if (ok) return true;
    }
  } while (std::next_permutation(rest.begin(), rest.end()));
  return false;
}

namespace {

struct DirectedBacktracker {
  const LabeledDigraph& d;
  std::vector<int> cycle;
  std::vector<bool> used;

  bool extend(std::size_t pos) {
    const std::size_t n = static_cast<std::size_t>(d.n());
    if (pos == n) return d.has_arc(cycle[n - 1], cycle[0]);
    for (int w : d.out_neighbors(cycle[pos - 1])) {
      if (used[w]) continue;
      // dead-end pruning: w must keep an exit
      if (pos + 1 < n) {
        bool exit_found = false;
        for (int x : d.out_neighbors(w))
          if (!used[x]) {
            exit_found = true;
            break;
          }
        if (!exit_found) continue;
      }
      used[w] = true;
      cycle[pos] = w;
      if (extend(pos + 1)) return true;
      used[w] = false;
    }
    return false;
  }
};

}  // namespace

std::optional<std::vector<int>> exact_directed_hc(const LabeledDigraph& d, int cap) {
  const int n = d.n();
  if (n > cap) throw std::length_error("exact search capped at n <= " + std::to_string(cap));
  if (n < 2) return std::nullopt;
  DirectedBacktracker bt{d, std::vector<int>(n), std::vector<bool>(n, false)};
  bt.cycle[0] = 0;
  bt.used[0] = true;
  if (bt.extend(1)) return bt.cycle;
  return std::nullopt;
}

}  // namespace pihc
