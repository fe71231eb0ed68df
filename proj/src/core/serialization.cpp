#include "canvas/serialization.hpp"

#include "canvas/error.hpp"

namespace canvas {

using nlohmann::json;

namespace {

template <typename T>
T required(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key))
    throw Error(ErrorCode::BadRequest, std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::BadRequest, std::string("field '") + key + "' has the wrong type");
  }
}

std::optional<std::string> optional_string(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  if (!j.at(key).is_string())
    throw Error(ErrorCode::BadRequest, std::string("field '") + key + "' must be a string or null");
  return j.at(key).get<std::string>();
}

}  // namespace

void to_json(json& j, const NodeInstance& n) {
  j = json{{"nodeId", n.nodeId}, {"moduleRef", n.moduleRef}, {"displayLabel", nullptr}};
  if (n.displayLabel) j["displayLabel"] = *n.displayLabel;
}

void from_json(const json& j, NodeInstance& n) {
  n.nodeId = required<std::string>(j, "nodeId");
  n.moduleRef = required<std::string>(j, "moduleRef");
  n.displayLabel = optional_string(j, "displayLabel");
}

void to_json(json& j, const FlowEdge& e) {
  j = json{{"from", e.from}, {"to", e.to}, {"condition", nullptr}, {"priority", e.priority}};
  if (e.condition) j["condition"] = cond::print(*e.condition);
}

void from_json(const json& j, FlowEdge& e) {
  e.from = required<std::string>(j, "from");
  e.to = required<std::string>(j, "to");
  e.priority = required<int>(j, "priority");
  if (auto source = optional_string(j, "condition")) {
    e.condition = cond::parse_or_throw(*source);
  } else {
    e.condition.reset();
  }
}

void to_json(json& j, const CompositionGraph& g) {
  CompositionGraph sorted = g;
  canonicalize(sorted);
  j = json{{"compositionId", sorted.compositionId},
           {"startNodeId", sorted.startNodeId},
           {"nodes", sorted.nodes},
           {"edges", sorted.edges}};
}

void from_json(const json& j, CompositionGraph& g) {
  g.compositionId = required<std::string>(j, "compositionId");
  g.startNodeId = required<std::string>(j, "startNodeId");
  g.nodes = required<std::vector<NodeInstance>>(j, "nodes");
  g.edges = required<std::vector<FlowEdge>>(j, "edges");
  canonicalize(g);
  check_graph(g);
}

void to_json(json& j, const ModuleDescriptor& m) {
  j = json{{"moduleId", m.moduleId},       {"kind", to_string(m.kind)},
           {"title", m.title},             {"authorId", m.authorId},
           {"contentRef", m.contentRef},   {"licence", m.licence},
           {"version", m.version},         {"parentId", nullptr},
           {"contentType", m.contentType}};
  if (m.parentId) j["parentId"] = *m.parentId;
}

void from_json(const json& j, ModuleDescriptor& m) {
  m.moduleId = required<std::string>(j, "moduleId");
  const auto kind = required<std::string>(j, "kind");
  if (kind != "atomic" && kind != "composite")
    throw Error(ErrorCode::BadRequest, "module kind must be atomic or composite");
  m.kind = kind == "atomic" ? ModuleKind::atomic : ModuleKind::composite;
  m.title = required<std::string>(j, "title");
  m.authorId = required<std::string>(j, "authorId");
  m.contentRef = required<std::string>(j, "contentRef");
  m.licence = std::string(kContentLicence);
  m.version = required<int>(j, "version");
  m.parentId = optional_string(j, "parentId");
  m.contentType = j.value("contentType", std::string{});
}

std::string_view to_string(AssessmentKind kind) {
  switch (kind) {
    case AssessmentKind::reading: return "reading";
    case AssessmentKind::multipleChoice: return "multipleChoice";
    case AssessmentKind::generation: return "generation";
  }
  return "reading";
}

AssessmentKind assessment_kind_from_string(std::string_view s) {
  if (s == "reading") return AssessmentKind::reading;
  if (s == "multipleChoice") return AssessmentKind::multipleChoice;
  if (s == "generation") return AssessmentKind::generation;
  throw Error(ErrorCode::InvalidOutcome, "unknown assessment kind '" + std::string(s) + "'");
}

void to_json(json& j, const OutcomeRecord& o) {
  j = json{{"nodeId", o.nodeId},
           {"scorePercent", o.scorePercent},
           {"completed", o.completed},
           {"attempts", o.attempts},
           {"durationSeconds", o.durationSeconds},
           {"assessmentKind", to_string(o.assessmentKind)},
           {"recordedAt", o.recordedAt.time_since_epoch().count()}};
}

void from_json(const json& j, OutcomeRecord& o) {
  o.nodeId = required<std::string>(j, "nodeId");
  o.scorePercent = required<double>(j, "scorePercent");
  o.completed = j.value("completed", false);
  o.attempts = j.value("attempts", 1);
  o.durationSeconds = j.value("durationSeconds", 0.0);
  o.assessmentKind = assessment_kind_from_string(j.value("assessmentKind", std::string("reading")));
  o.recordedAt = Timestamp{std::chrono::seconds{j.value("recordedAt", std::int64_t{0})}};
  check_outcome(o);
}

}  // namespace canvas

namespace canvas::analysis {

void to_json(nlohmann::json& j, const ValidationIssue& issue) {
  j = nlohmann::json{{"code", to_string(issue.code)}, {"subject", issue.subject}, {"message", issue.message}};
}

void to_json(nlohmann::json& j, const ValidationReport& report) {
  j = nlohmann::json{{"errors", report.errors}, {"warnings", report.warnings}};
}

}  // namespace canvas::analysis
