#pragma once

// NeverEnds by exhaustive transitive closure over an adjacency matrix.

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace oracle::graph {

/// Nodes that are reachable from `start` and cannot reach any node with no
/// outgoing edges.
inline std::set<std::string> never_ends(const std::vector<std::string>& nodes,
                                        const std::vector<std::pair<std::string, std::string>>& edges,
                                        const std::string& start) {
  const std::size_t n = nodes.size();
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < n; ++i) index[nodes[i]] = i;
  std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
  std::vector<int> out_degree(n, 0);
  for (std::size_t i = 0; i < n; ++i) reach[i][i] = true;
  for (const auto& [from, to] : edges) {
    reach[index.at(from)][index.at(to)] = true;
    ++out_degree[index.at(from)];
  }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (reach[i][k] && reach[k][j]) reach[i][j] = true;

  std::set<std::string> out;
  const std::size_t s = index.at(start);
  for (std::size_t v = 0; v < n; ++v) {
    if (!reach[s][v]) continue;
    bool ends = false;
    for (std::size_t t = 0; t < n; ++t) {
      if (out_degree[t] == 0 && reach[v][t]) ends = true;
    }
    if (!ends) out.insert(nodes[v]);
  }
  return out;
}

}  // namespace oracle::graph
