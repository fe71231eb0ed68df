#include "canvas/model.hpp"

#include <algorithm>
#include <cstdio>
#include <mutex>
#include <random>
#include <set>

#include "canvas/error.hpp"

namespace canvas {

std::string_view to_string(ModuleKind kind) {
  return kind == ModuleKind::atomic ? "atomic" : "composite";
}

const NodeInstance* CompositionGraph::find_node(std::string_view nodeId) const {
  auto it = std::lower_bound(nodes.begin(), nodes.end(), nodeId,
                             [](const NodeInstance& n, std::string_view id) { return n.nodeId < id; });
  if (it != nodes.end() && it->nodeId == nodeId) return &*it;
  // Graphs built by hand may not be canonical yet.
  for (const auto& n : nodes) {
    if (n.nodeId == nodeId) return &n;
  }
  return nullptr;
}

std::vector<const FlowEdge*> CompositionGraph::outgoing(std::string_view nodeId) const {
  std::vector<const FlowEdge*> out;
  for (const auto& e : edges) {
    if (e.from == nodeId) out.push_back(&e);
  }
  std::sort(out.begin(), out.end(),
            [](const FlowEdge* a, const FlowEdge* b) { return a->priority < b->priority; });
  return out;
}

bool module_resolves(const ModuleResolver& registry, std::string_view moduleId) {
  return moduleId == kStartModuleId || registry.find_module(moduleId).has_value();
}

void InMemoryRegistry::put_module(ModuleDescriptor module) {
  auto id = module.moduleId;
  modules_.insert_or_assign(std::move(id), std::move(module));
}

void InMemoryRegistry::put_composition(CompositionGraph graph) {
  auto id = graph.compositionId;
  compositions_.insert_or_assign(std::move(id), std::move(graph));
}

std::optional<ModuleDescriptor> InMemoryRegistry::find_module(std::string_view moduleId) const {
  if (auto it = modules_.find(moduleId); it != modules_.end()) return it->second;
  return std::nullopt;
}

std::optional<CompositionGraph> InMemoryRegistry::find_composition(std::string_view id) const {
  if (auto it = compositions_.find(id); it != compositions_.end()) return it->second;
  return std::nullopt;
}

std::string new_id() {
  static std::mutex mutex;
  static std::mt19937_64 engine{std::random_device{}()};
  std::uint64_t hi = 0;
  std::uint64_t lo = 0;
  {
    std::lock_guard lock(mutex);
    hi = engine();
    lo = engine();
  }
  hi = (hi & 0xffffffffffff0fffULL) | 0x0000000000004000ULL;  // version 4
  lo = (lo & 0x3fffffffffffffffULL) | 0x8000000000000000ULL;  // RFC 4122 variant
  char buf[37];
  std::snprintf(buf, sizeof buf, "%08x-%04x-%04x-%04x-%012llx",
                static_cast<unsigned>(hi >> 32), static_cast<unsigned>((hi >> 16) & 0xffff),
                static_cast<unsigned>(hi & 0xffff), static_cast<unsigned>(lo >> 48),
                static_cast<unsigned long long>(lo & 0xffffffffffffULL));
  return buf;
}

void canonicalize(CompositionGraph& graph) {
  std::sort(graph.nodes.begin(), graph.nodes.end(),
            [](const NodeInstance& a, const NodeInstance& b) { return a.nodeId < b.nodeId; });
  std::sort(graph.edges.begin(), graph.edges.end(), [](const FlowEdge& a, const FlowEdge& b) {
    return std::tie(a.from, a.priority) < std::tie(b.from, b.priority);
  });
}

std::pair<ModuleDescriptor, CompositionGraph> new_composition(std::string_view title,
                                                              std::string_view authorId) {
  if (title.empty()) throw Error(ErrorCode::EmptyTitle, "composition title must not be empty");
  CompositionGraph graph;
  graph.compositionId = new_id();
  graph.startNodeId = "start";
  graph.nodes.push_back(NodeInstance{"start", std::string(kStartModuleId), std::nullopt});

  ModuleDescriptor module;
  module.moduleId = new_id();
  module.kind = ModuleKind::composite;
  module.title = std::string(title);
  module.authorId = std::string(authorId);
  module.contentRef = graph.compositionId;
  module.contentType = "composition";
  return {std::move(module), std::move(graph)};
}

bool composition_contains(const ModuleResolver& registry, std::string_view containerId,
                          std::string_view targetId) {
  std::set<std::string, std::less<>> seen;
  std::vector<std::string> stack{std::string(containerId)};
  while (!stack.empty()) {
    std::string current = std::move(stack.back());
    stack.pop_back();
    if (current == targetId) return true;
    if (!seen.insert(current).second) continue;
    auto graph = registry.find_composition(current);
    if (!graph) continue;
    for (const auto& node : graph->nodes) {
      auto module = registry.find_module(node.moduleRef);
      if (module && module->kind == ModuleKind::composite) stack.push_back(module->contentRef);
    }
  }
  return false;
}

CompositionGraph add_node(const CompositionGraph& graph, std::string_view moduleRef,
                          const ModuleResolver& registry, std::optional<std::string> nodeId,
                          std::optional<std::string> displayLabel) {
  if (auto module = registry.find_module(moduleRef);
      module && module->kind == ModuleKind::composite &&
      composition_contains(registry, module->contentRef, graph.compositionId)) {
    throw Error(ErrorCode::CyclicComposition,
                "module " + std::string(moduleRef) + " already contains this composition");
  }
  std::string id = nodeId ? std::move(*nodeId) : new_id();
  if (id.empty() || graph.has_node(id)) {
    throw Error(ErrorCode::InvalidGraph, "node id '" + id + "' is empty or already in use");
  }
  CompositionGraph out = graph;
  NodeInstance node{std::move(id), std::string(moduleRef), std::move(displayLabel)};
  auto pos = std::lower_bound(out.nodes.begin(), out.nodes.end(), node.nodeId,
                              [](const NodeInstance& n, const std::string& key) { return n.nodeId < key; });
  out.nodes.insert(pos, std::move(node));
  return out;
}

CompositionGraph add_edge(const CompositionGraph& graph, std::string_view from, std::string_view to,
                          std::optional<cond::Condition> condition, int priority) {
  if (!graph.has_node(from)) throw Error(ErrorCode::UnknownNode, "unknown node " + std::string(from));
  if (!graph.has_node(to)) throw Error(ErrorCode::UnknownNode, "unknown node " + std::string(to));
  if (priority < 0) throw Error(ErrorCode::InvalidGraph, "edge priority must be non-negative");
  if (condition) {
    if (auto why = cond::check(*condition); !why.empty())
      throw Error(ErrorCode::InvalidCondition, why);
  }
  for (const auto* e : graph.outgoing(from)) {
    if (e->priority == priority)
      throw Error(ErrorCode::DuplicatePriority,
                  "priority " + std::to_string(priority) + " already used at " + std::string(from));
    if (!condition && e->is_default())
      throw Error(ErrorCode::DuplicateDefault, std::string(from) + " already has a default edge");
  }
  CompositionGraph out = graph;
  FlowEdge edge{std::string(from), std::string(to), std::move(condition), priority};
  auto pos = std::lower_bound(out.edges.begin(), out.edges.end(), edge, [](const FlowEdge& a, const FlowEdge& b) {
    return std::tie(a.from, a.priority) < std::tie(b.from, b.priority);
  });
  out.edges.insert(pos, std::move(edge));
  return out;
}

CompositionGraph remove_edge(const CompositionGraph& graph, std::string_view from, int priority) {
  CompositionGraph out = graph;
  auto it = std::find_if(out.edges.begin(), out.edges.end(),
                         [&](const FlowEdge& e) { return e.from == from && e.priority == priority; });
  if (it == out.edges.end())
    throw Error(ErrorCode::UnknownNode, "no edge at " + std::string(from) + " with priority " +
                                            std::to_string(priority));
  out.edges.erase(it);
  return out;
}

CompositionGraph remove_node(const CompositionGraph& graph, std::string_view nodeId) {
  if (!graph.has_node(nodeId)) throw Error(ErrorCode::UnknownNode, "unknown node " + std::string(nodeId));
  if (graph.startNodeId == nodeId) throw Error(ErrorCode::InvalidGraph, "the start node cannot be removed");
  CompositionGraph out = graph;
  std::erase_if(out.nodes, [&](const NodeInstance& n) { return n.nodeId == nodeId; });
  std::erase_if(out.edges, [&](const FlowEdge& e) { return e.from == nodeId || e.to == nodeId; });
  return out;
}

CompositionGraph set_label(const CompositionGraph& graph, std::string_view nodeId,
                           std::optional<std::string> label) {
  CompositionGraph out = graph;
  for (auto& n : out.nodes) {
    if (n.nodeId == nodeId) {
      n.displayLabel = std::move(label);
      return out;
    }
  }
  throw Error(ErrorCode::UnknownNode, "unknown node " + std::string(nodeId));
}

void check_graph(const CompositionGraph& graph) {
  std::set<std::string_view> ids;
  for (const auto& n : graph.nodes) {
    if (n.nodeId.empty()) throw Error(ErrorCode::InvalidGraph, "empty node id");
    if (!ids.insert(n.nodeId).second)
      throw Error(ErrorCode::InvalidGraph, "duplicate node id " + n.nodeId);
  }
  if (!ids.count(graph.startNodeId))
    throw Error(ErrorCode::UnknownNode, "start node " + graph.startNodeId + " does not exist");
  std::set<std::pair<std::string_view, int>> priorities;
  std::set<std::string_view> defaults;
  for (const auto& e : graph.edges) {
    if (!ids.count(e.from) || !ids.count(e.to))
      throw Error(ErrorCode::UnknownNode, "edge " + e.from + " -> " + e.to + " names an unknown node");
    if (e.priority < 0) throw Error(ErrorCode::InvalidGraph, "edge priority must be non-negative");
    if (!priorities.emplace(e.from, e.priority).second)
      throw Error(ErrorCode::DuplicatePriority, "duplicate priority at " + e.from);
    if (e.is_default() && !defaults.insert(e.from).second)
      throw Error(ErrorCode::DuplicateDefault, e.from + " has more than one default edge");
    if (e.condition) {
      if (auto why = cond::check(*e.condition); !why.empty())
        throw Error(ErrorCode::InvalidCondition, why);
    }
  }
}

}  // namespace canvas
