#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "canvas/model.hpp"
#include "canvas/outcome.hpp"

namespace canvas::session {

enum class Status { active, finished, stuck };

std::string_view to_string(Status status);

struct TraceEntry {
  std::string nodeId;
  OutcomeRecord outcome;

  friend bool operator==(const TraceEntry&, const TraceEntry&) = default;
};

struct SessionState {
  std::string sessionId;
  std::string compositionId;
  std::string userId;
  std::string currentNode;
  std::vector<TraceEntry> trace;
  Status status = Status::active;

  friend bool operator==(const SessionState&, const SessionState&) = default;
};

/// Starts a learner session at the graph's start node. Refuses graphs whose
/// validation reports errors (ValidationErrorsPresent).
SessionState start_session(const CompositionGraph& graph, const ModuleResolver& registry,
                           std::string_view userId,
                           std::optional<std::string> sessionId = std::nullopt);

/// Same, looking the composition up by id (UnknownComposition if absent).
SessionState start_session(std::string_view compositionId, std::string_view userId,
                           const ModuleResolver& registry,
                           std::optional<std::string> sessionId = std::nullopt);

/// Records the outcome for the current node and follows the first outgoing
/// edge (ascending priority) whose condition holds; a default edge always
/// holds. No outgoing edges finishes the session; edges that all fail with
/// no default leave the session stuck.
SessionState submit_outcome(const SessionState& session, const CompositionGraph& graph,
                            const OutcomeRecord& outcome);

/// Outcome of a finished session seen as one node of an enclosing
/// composition: mean score, summed duration, completed, one attempt.
OutcomeRecord aggregate_outcome(const SessionState& session);

/// One JSON object per line, one line per trace entry.
std::string trace_jsonl(const SessionState& session);

void to_json(nlohmann::json& j, const SessionState& s);
void from_json(const nlohmann::json& j, SessionState& s);

}  // namespace canvas::session
