#include "canvas/session.hpp"

#include "canvas/analysis.hpp"
#include "canvas/error.hpp"
#include "canvas/serialization.hpp"

namespace canvas::session {

std::string_view to_string(Status status) {
  switch (status) {
    case Status::active: return "active";
    case Status::finished: return "finished";
    case Status::stuck: return "stuck";
  }
  return "?";
}

SessionState start_session(const CompositionGraph& graph, const ModuleResolver& registry,
                           std::string_view userId, std::optional<std::string> sessionId) {
  const auto report = analysis::validate(graph, registry);
  if (!report.ok()) {
    throw Error(ErrorCode::ValidationErrorsPresent,
                "composition " + graph.compositionId + " has validation errors: " +
                    report.errors.front().message);
  }
  SessionState s;
  s.sessionId = sessionId ? std::move(*sessionId) : new_id();
  s.compositionId = graph.compositionId;
  s.userId = std::string(userId);
  s.currentNode = graph.startNodeId;
  s.status = Status::active;
  return s;
}

SessionState start_session(std::string_view compositionId, std::string_view userId,
                           const ModuleResolver& registry, std::optional<std::string> sessionId) {
  auto graph = registry.find_composition(compositionId);
  if (!graph) {
    throw Error(ErrorCode::UnknownComposition, "unknown composition " + std::string(compositionId));
  }
  return start_session(*graph, registry, userId, std::move(sessionId));
}

SessionState submit_outcome(const SessionState& session, const CompositionGraph& graph,
                            const OutcomeRecord& outcome) {
  if (session.status != Status::active) {
    throw Error(ErrorCode::SessionNotActive,
                "session " + session.sessionId + " is " + std::string(to_string(session.status)));
  }
  if (outcome.nodeId != session.currentNode) {
    throw Error(ErrorCode::WrongNode, "outcome is for " + outcome.nodeId + " but the session is at " +
                                          session.currentNode);
  }
  check_outcome(outcome);

  SessionState next = session;
  next.trace.push_back(TraceEntry{outcome.nodeId, outcome});
  const auto edges = graph.outgoing(session.currentNode);
  if (edges.empty()) {
    next.status = Status::finished;
    return next;
  }
  for (const auto* edge : edges) {
    if (!edge->condition || cond::evaluate(*edge->condition, outcome)) {
      next.currentNode = edge->to;
      return next;
    }
  }
  next.status = Status::stuck;
  return next;
}

OutcomeRecord aggregate_outcome(const SessionState& session) {
  if (session.status != Status::finished) {
    throw Error(ErrorCode::SessionNotFinished, "session " + session.sessionId + " has not finished");
  }
  OutcomeRecord out;
  double score_sum = 0.0;
  for (const auto& entry : session.trace) {
    score_sum += entry.outcome.scorePercent;
    out.durationSeconds += entry.outcome.durationSeconds;
    out.recordedAt = std::max(out.recordedAt, entry.outcome.recordedAt);
  }
  if (!session.trace.empty()) out.scorePercent = score_sum / static_cast<double>(session.trace.size());
  out.completed = true;
  out.attempts = 1;
  return out;
}

std::string trace_jsonl(const SessionState& session) {
  std::string out;
  for (const auto& entry : session.trace) {
    nlohmann::json line = entry.outcome;
    line["sessionId"] = session.sessionId;
    line["compositionId"] = session.compositionId;
    line["userId"] = session.userId;
    out += line.dump();
    out += '\n';
  }
  return out;
}

void to_json(nlohmann::json& j, const SessionState& s) {
  nlohmann::json trace = nlohmann::json::array();
  for (const auto& entry : s.trace) trace.push_back(entry.outcome);
  j = nlohmann::json{{"sessionId", s.sessionId},     {"compositionId", s.compositionId},
                     {"userId", s.userId},           {"currentNode", s.currentNode},
                     {"status", to_string(s.status)}, {"trace", std::move(trace)}};
}

void from_json(const nlohmann::json& j, SessionState& s) {
  s.sessionId = j.at("sessionId").get<std::string>();
  s.compositionId = j.at("compositionId").get<std::string>();
  s.userId = j.at("userId").get<std::string>();
  s.currentNode = j.at("currentNode").get<std::string>();
  const auto status = j.at("status").get<std::string>();
  s.status = status == "finished" ? Status::finished : status == "stuck" ? Status::stuck : Status::active;
  s.trace.clear();
  for (const auto& item : j.at("trace")) {
    auto outcome = item.get<OutcomeRecord>();
    s.trace.push_back(TraceEntry{outcome.nodeId, std::move(outcome)});
  }
}

}  // namespace canvas::session
