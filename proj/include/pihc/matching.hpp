#pragma once

#include <vector>

namespace pihc {

struct MatchingResult {
  std::vector<int> left_match;   // left index -> right index, -1 when unmatched
  std::vector<int> right_match;  // right index -> left index, -1 when unmatched
  int size = 0;

  bool perfect() const {
    return size == static_cast<int>(left_match.size()) &&
           size == static_cast<int>(right_match.size());
  }
};

// Maximum bipartite matching by augmenting paths (Kuhn). adj[i] lists the
// right endpoints available to left i; lefts are scanned in index order and
// adjacency in the given order, so pre-shuffled inputs yield a randomized
// maximum matching while the call itself stays deterministic.
MatchingResult max_bipartite_matching(const std::vector<std::vector<int>>& adj, int right_count);

// Same, scanning lefts in the given order.
MatchingResult max_bipartite_matching(const std::vector<std::vector<int>>& adj, int right_count,
                                      const std::vector<int>& left_order);

// Lefts reachable from an unmatched left by alternating paths. For a maximum
// matching that is not perfect this is a Hall violator: its neighbourhood has
// exactly |set| - deficiency < |set| rights.
std::vector<int> hall_violator(const std::vector<std::vector<int>>& adj, const MatchingResult& m);

}  // namespace pihc
