#pragma once

#include <json.hpp>

#include "canvas/analysis.hpp"
#include "canvas/model.hpp"
#include "canvas/outcome.hpp"

namespace canvas {

// Canonical JSON forms. Graph documents carry conditions as source strings
// in the condition language and list nodes/edges in identifier order, so
// dump() of the same graph is always byte-identical.

void to_json(nlohmann::json& j, const NodeInstance& n);
void from_json(const nlohmann::json& j, NodeInstance& n);

void to_json(nlohmann::json& j, const FlowEdge& e);
void from_json(const nlohmann::json& j, FlowEdge& e);

void to_json(nlohmann::json& j, const CompositionGraph& g);
/// Parses and checks structural invariants; throws Error on violation.
void from_json(const nlohmann::json& j, CompositionGraph& g);

void to_json(nlohmann::json& j, const ModuleDescriptor& m);
void from_json(const nlohmann::json& j, ModuleDescriptor& m);

void to_json(nlohmann::json& j, const OutcomeRecord& o);
/// Throws Error{InvalidOutcome} on out-of-range fields.
void from_json(const nlohmann::json& j, OutcomeRecord& o);

std::string_view to_string(AssessmentKind kind);
AssessmentKind assessment_kind_from_string(std::string_view s);

}  // namespace canvas

namespace canvas::analysis {

void to_json(nlohmann::json& j, const ValidationIssue& issue);
/// `{"errors": [...], "warnings": [...]}`, each issue as
/// `{"code", "subject", "message"}`.
void to_json(nlohmann::json& j, const ValidationReport& report);

}  // namespace canvas::analysis
