#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "canvas/condition.hpp"

namespace canvas {

/// The one licence every shared module and asset is published under.
inline constexpr std::string_view kContentLicence = "CC-BY-SA";

/// Built-in no-op module referenced by the synthetic start node of a fresh
/// composition. Always resolves.
inline constexpr std::string_view kStartModuleId = "canvas.start";

enum class ModuleKind { atomic, composite };

std::string_view to_string(ModuleKind kind);

struct ModuleDescriptor {
  std::string moduleId;
  ModuleKind kind = ModuleKind::atomic;
  std::string title;
  std::string authorId;
  // Package content id for atomic modules, composition id for composites.
  std::string contentRef;
  std::string licence{kContentLicence};
  int version = 1;
  std::optional<std::string> parentId;
  // Coarse content type used by the search filter ("quiz", "video", ...).
  // "composition" for composites.
  std::string contentType;

  friend bool operator==(const ModuleDescriptor&, const ModuleDescriptor&) = default;
};

struct NodeInstance {
  std::string nodeId;
  std::string moduleRef;
  std::optional<std::string> displayLabel;

  friend bool operator==(const NodeInstance&, const NodeInstance&) = default;
};

/// A flow between two nodes. No condition means this is the node's default
/// (else) edge.
struct FlowEdge {
  std::string from;
  std::string to;
  std::optional<cond::Condition> condition;
  int priority = 0;

  bool is_default() const { return !condition.has_value(); }

  friend bool operator==(const FlowEdge&, const FlowEdge&) = default;
};

/// The canvas document. Nodes are kept sorted by nodeId and edges by
/// (from, priority), which is also their identity.
struct CompositionGraph {
  std::string compositionId;
  std::vector<NodeInstance> nodes;
  std::vector<FlowEdge> edges;
  std::string startNodeId;

  const NodeInstance* find_node(std::string_view nodeId) const;
  bool has_node(std::string_view nodeId) const { return find_node(nodeId) != nullptr; }

  /// Outgoing edges of a node in ascending priority.
  std::vector<const FlowEdge*> outgoing(std::string_view nodeId) const;

  friend bool operator==(const CompositionGraph&, const CompositionGraph&) = default;
};

/// Lookup of modules and compositions. Implementations return copies so
/// that callers never hold references into mutable storage.
class ModuleResolver {
 public:
  virtual ~ModuleResolver() = default;
  virtual std::optional<ModuleDescriptor> find_module(std::string_view moduleId) const = 0;
  virtual std::optional<CompositionGraph> find_composition(std::string_view compositionId) const = 0;
};

/// True if moduleId is the built-in start module or resolves in `registry`.
bool module_resolves(const ModuleResolver& registry, std::string_view moduleId);

class InMemoryRegistry : public ModuleResolver {
 public:
  void put_module(ModuleDescriptor module);
  void put_composition(CompositionGraph graph);

  std::optional<ModuleDescriptor> find_module(std::string_view moduleId) const override;
  std::optional<CompositionGraph> find_composition(std::string_view compositionId) const override;

 private:
  std::map<std::string, ModuleDescriptor, std::less<>> modules_;
  std::map<std::string, CompositionGraph, std::less<>> compositions_;
};

/// Fresh opaque identifier in UUID v4 text form.
std::string new_id();

std::pair<ModuleDescriptor, CompositionGraph> new_composition(std::string_view title,
                                                              std::string_view authorId);

/// Adds a node referencing `moduleRef`. Throws CyclicComposition if the
/// referenced module is a composition that (transitively) contains `graph`.
/// A nodeId is generated unless one is supplied.
CompositionGraph add_node(const CompositionGraph& graph, std::string_view moduleRef,
                          const ModuleResolver& registry,
                          std::optional<std::string> nodeId = std::nullopt,
                          std::optional<std::string> displayLabel = std::nullopt);

CompositionGraph add_edge(const CompositionGraph& graph, std::string_view from, std::string_view to,
                          std::optional<cond::Condition> condition, int priority);

CompositionGraph remove_edge(const CompositionGraph& graph, std::string_view from, int priority);

/// Removes a node and every edge touching it. The start node cannot be removed.
CompositionGraph remove_node(const CompositionGraph& graph, std::string_view nodeId);

CompositionGraph set_label(const CompositionGraph& graph, std::string_view nodeId,
                           std::optional<std::string> label);

/// True if the composition `containerId` contains `targetId`, directly or
/// through nested composite modules (or is the same composition).
bool composition_contains(const ModuleResolver& registry, std::string_view containerId,
                          std::string_view targetId);

/// Throws Error{InvalidGraph} (or a more specific code) when a structural
/// invariant of the graph does not hold.
void check_graph(const CompositionGraph& graph);

/// Restores canonical node/edge ordering.
void canonicalize(CompositionGraph& graph);

}  // namespace canvas
