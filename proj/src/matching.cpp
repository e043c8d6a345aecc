#include "pihc/matching.hpp"

#include <numeric>

namespace pihc {

namespace {

struct Kuhn {
  const std::vector<std::vector<int>>& adj;
  MatchingResult& out;
  std::vector<int> stamp;
  int tick = 0;

  Kuhn(const std::vector<std::vector<int>>& a, int rights, MatchingResult& o)
      : adj(a), out(o), stamp(rights, -1) {
    out.left_match.assign(a.size(), -1);
    out.right_match.assign(rights, -1);
    out.size = 0;
  }

  bool augment(int u) {
    for (int w : adj[u]) {
      if (stamp[w] == tick) continue;
      stamp[w] = tick;
      if (out.right_match[w] == -1 || augment(out.right_match[w])) {
        out.left_match[u] = w;
        out.right_match[w] = u;
        return true;
      }
    }
    return false;
  }
};

}  // namespace

MatchingResult max_bipartite_matching(const std::vector<std::vector<int>>& adj, int right_count,
                                      const std::vector<int>& left_order) {
  MatchingResult result;
  Kuhn kuhn(adj, right_count, result);
  for (int u : left_order) {
    ++kuhn.tick;
    if (kuhn.augment(u)) ++result.size;
  }
  return result;
}

MatchingResult max_bipartite_matching(const std::vector<std::vector<int>>& adj, int right_count) {
  std::vector<int> order(adj.size());
  std::iota(order.begin(), order.end(), 0);
  return max_bipartite_matching(adj, right_count, order);
}

std::vector<int> hall_violator(const std::vector<std::vector<int>>& adj,
                               const MatchingResult& m) {
  // alternating BFS from unmatched lefts: left -> any edge, right -> matched edge
  std::vector<char> seen_left(adj.size(), 0), seen_right(m.right_match.size(), 0);
  std::vector<int> queue;
  for (int u = 0; u < static_cast<int>(adj.size()); ++u) {
    if (m.left_match[u] == -1) {
      seen_left[u] = 1;
      queue.push_back(u);
    }
  }
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const int u = queue[head];
    for (int w : adj[u]) {
      if (seen_right[w]) continue;
      seen_right[w] = 1;
      const int back = m.right_match[w];
      if (back != -1 && !seen_left[back]) {
        seen_left[back] = 1;
        queue.push_back(back);
      }
    }
  }
  std::vector<int> violator;
  for (int u = 0; u < static_cast<int>(adj.size()); ++u)
    if (seen_left[u]) violator.push_back(u);
  return violator;
}

}  // namespace pihc
