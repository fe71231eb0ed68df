#pragma once

// Diff-apply reference for three-way merges whose two sides touch disjoint
// keys: compute each side's diff against the base as key -> new value (or
// deletion) and replay both onto the base.

#include <map>
#include <optional>
#include <string>
#include <tuple>

namespace oracle::merge {

struct NodeValue {
  std::string moduleRef;
  std::optional<std::string> label;
  friend bool operator==(const NodeValue&, const NodeValue&) = default;
};

struct EdgeValue {
  std::string to;
  std::optional<std::string> condition;  // source text; none = default edge
  friend bool operator==(const EdgeValue&, const EdgeValue&) = default;
};

using EdgeKey = std::pair<std::string, int>;

struct Doc {
  std::string start;
  std::map<std::string, NodeValue> nodes;
  std::map<EdgeKey, EdgeValue> edges;
  friend bool operator==(const Doc&, const Doc&) = default;
};

template <typename K, typename V>
std::map<K, std::optional<V>> diff(const std::map<K, V>& base, const std::map<K, V>& side) {
  std::map<K, std::optional<V>> d;
  for (const auto& [k, v] : base) {
    auto it = side.find(k);
    if (it == side.end()) {
      d[k] = std::nullopt;
    } else if (!(it->second == v)) {
      d[k] = it->second;
    }
  }
  for (const auto& [k, v] : side) {
    if (!base.count(k)) d[k] = v;
  }
  return d;
}

template <typename K, typename V>
void apply_diff(std::map<K, V>& target, const std::map<K, std::optional<V>>& d) {
  for (const auto& [k, v] : d) {
    if (v) {
      target[k] = *v;
    } else {
      target.erase(k);
    }
  }
}

inline Doc diff_apply(const Doc& base, const Doc& original, const Doc& remix) {
  Doc out = base;
  apply_diff(out.nodes, diff(base.nodes, original.nodes));
  apply_diff(out.nodes, diff(base.nodes, remix.nodes));
  apply_diff(out.edges, diff(base.edges, original.edges));
  apply_diff(out.edges, diff(base.edges, remix.edges));
  if (original.start != base.start) out.start = original.start;
  if (remix.start != base.start) out.start = remix.start;
  return out;
}

}  // namespace oracle::merge
