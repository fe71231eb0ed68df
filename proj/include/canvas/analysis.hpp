#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "canvas/model.hpp"

namespace canvas::analysis {

// Declaration order is the report sort order.
enum class IssueCode { NeverEnds, UnknownModuleRef, NoDefaultEdge, UnreachableNode, Revisit };

std::string_view to_string(IssueCode code);
bool is_error(IssueCode code);

struct ValidationIssue {
  IssueCode code;
  std::vector<std::string> subject;  // sorted node ids
  std::string message;

  friend bool operator==(const ValidationIssue&, const ValidationIssue&) = default;
};

struct ValidationReport {
  std::vector<ValidationIssue> errors;
  std::vector<ValidationIssue> warnings;

  bool ok() const { return errors.empty(); }
  bool has(IssueCode code) const;
  const ValidationIssue* find(IssueCode code) const;

  friend bool operator==(const ValidationReport&, const ValidationReport&) = default;
};

/// Static analysis of one composition. Total: never throws on a graph that
/// passes check_graph.
///
///  - NeverEnds: one issue listing every node reachable from the start that
///    has no path to a terminal (zero out-degree) node.
///  - UnknownModuleRef: per node whose moduleRef does not resolve.
///  - NoDefaultEdge: per node with conditional edges but no default edge.
///  - UnreachableNode: per node not reachable from the start.
///  - Revisit: per node with two or more distinct predecessors, or on a
///    directed cycle.
ValidationReport validate(const CompositionGraph& graph, const ModuleResolver& registry,
                          std::string_view locale = "en");

/// Validates `graph` and every composition nested in it (through composite
/// module references). Issues of nested graphs have their subjects prefixed
/// with "<compositionId>/".
ValidationReport validate_transitive(const CompositionGraph& graph, const ModuleResolver& registry,
                                     std::string_view locale = "en");

/// Localized message for an issue; `{nodes}` in the template is replaced
/// by the comma-separated subject list. Unknown locales fall back to "en".
std::string render_message(IssueCode code, const std::vector<std::string>& subject,
                           std::string_view locale = "en");

std::vector<std::string_view> supported_locales();

}  // namespace canvas::analysis
