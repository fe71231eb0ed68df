#include "canvas/analysis.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <set>

namespace canvas::analysis {

std::string_view to_string(IssueCode code) {
  switch (code) {
    case IssueCode::NeverEnds: return "NeverEnds";
    case IssueCode::UnknownModuleRef: return "UnknownModuleRef";
    case IssueCode::NoDefaultEdge: return "NoDefaultEdge";
    case IssueCode::UnreachableNode: return "UnreachableNode";
    case IssueCode::Revisit: return "Revisit";
  }
  return "?";
}

bool is_error(IssueCode code) {
  return code == IssueCode::NeverEnds || code == IssueCode::UnknownModuleRef ||
         code == IssueCode::NoDefaultEdge;
}

bool ValidationReport::has(IssueCode code) const { return find(code) != nullptr; }

const ValidationIssue* ValidationReport::find(IssueCode code) const {
  for (const auto* list : {&errors, &warnings}) {
    for (const auto& issue : *list) {
      if (issue.code == code) return &issue;
    }
  }
  return nullptr;
}

namespace {

struct Template {
  std::string_view locale;
  std::array<std::string_view, 5> text;  // indexed by IssueCode
};

constexpr std::array<Template, 2> kTemplates{{
    {"en",
     {"The composition never ends: {nodes} cannot reach an end.",
      "I can't find the module used by {nodes}.",
      "A learner could get stuck at {nodes}: add an arrow for when no condition holds.",
      "Nobody can reach {nodes} from the start.",
      "This module is visited two times: {nodes}."}},
    {"nb",
     {"Komposisjonen tar aldri slutt: {nodes} kommer aldri til en slutt.",
      "Jeg finner ikke modulen som brukes av {nodes}.",
      "En elev kan bli stående fast ved {nodes}: legg til en pil for når ingen betingelse gjelder.",
      "Ingen kan nå {nodes} fra starten.",
      "Denne modulen besøkes to ganger: {nodes}."}},
}};

// Dense index over the graph's nodes with forward and reverse adjacency.
struct Indexed {
  std::vector<std::string> ids;
  std::map<std::string, std::size_t, std::less<>> index;
  std::vector<std::vector<std::size_t>> succ;
  std::vector<std::vector<std::size_t>> pred;

  explicit Indexed(const CompositionGraph& g) {
    for (const auto& n : g.nodes) ids.push_back(n.nodeId);
    std::sort(ids.begin(), ids.end());
    for (std::size_t i = 0; i < ids.size(); ++i) index.emplace(ids[i], i);
    succ.resize(ids.size());
    pred.resize(ids.size());
    for (const auto& e : g.edges) {
      auto from = index.find(e.from);
      auto to = index.find(e.to);
      if (from == index.end() || to == index.end()) continue;
      succ[from->second].push_back(to->second);
      pred[to->second].push_back(from->second);
    }
  }

  std::vector<bool> closure(const std::vector<std::size_t>& seeds,
                            const std::vector<std::vector<std::size_t>>& adj) const {
    std::vector<bool> seen(ids.size(), false);
    std::vector<std::size_t> stack = seeds;
    for (auto s : seeds) seen[s] = true;
    while (!stack.empty()) {
      const auto v = stack.back();
      stack.pop_back();
      for (auto w : adj[v]) {
        if (!seen[w]) {
          seen[w] = true;
          stack.push_back(w);
        }
      }
    }
    return seen;
  }
};

void add_issue(ValidationReport& report, IssueCode code, std::vector<std::string> subject,
               std::string_view locale) {
  std::sort(subject.begin(), subject.end());
  ValidationIssue issue{code, subject, render_message(code, subject, locale)};
  (is_error(code) ? report.errors : report.warnings).push_back(std::move(issue));
}

void sort_report(ValidationReport& report) {
  auto order = [](const ValidationIssue& a, const ValidationIssue& b) {
    return std::tie(a.code, a.subject) < std::tie(b.code, b.subject);
  };
  std::sort(report.errors.begin(), report.errors.end(), order);
  std::sort(report.warnings.begin(), report.warnings.end(), order);
}

}  // namespace

std::vector<std::string_view> supported_locales() {
  std::vector<std::string_view> out;
  for (const auto& t : kTemplates) out.push_back(t.locale);
  return out;
}

std::string render_message(IssueCode code, const std::vector<std::string>& subject,
                           std::string_view locale) {
  const Template* chosen = &kTemplates.front();
  for (const auto& t : kTemplates) {
    if (t.locale == locale) chosen = &t;
  }
  std::string nodes;
  for (std::size_t i = 0; i < subject.size(); ++i) {
    if (i) nodes += ", ";
    nodes += subject[i];
  }
  std::string text(chosen->text[static_cast<std::size_t>(code)]);
  if (auto pos = text.find("{nodes}"); pos != std::string::npos) text.replace(pos, 7, nodes);
  return text;
}

ValidationReport validate(const CompositionGraph& graph, const ModuleResolver& registry,
                          std::string_view locale) {
  ValidationReport report;
  const Indexed g(graph);
  const std::size_t n = g.ids.size();

  std::vector<std::size_t> start;
  if (auto it = g.index.find(graph.startNodeId); it != g.index.end()) start.push_back(it->second);
  const auto reachable = g.closure(start, g.succ);

  std::vector<std::size_t> terminals;
  for (std::size_t v = 0; v < n; ++v) {
    if (g.succ[v].empty()) terminals.push_back(v);
  }
  const auto ends = g.closure(terminals, g.pred);

  std::vector<std::string> never_ends;
  for (std::size_t v = 0; v < n; ++v) {
    if (reachable[v] && !ends[v]) never_ends.push_back(g.ids[v]);
  }
  if (!never_ends.empty()) add_issue(report, IssueCode::NeverEnds, std::move(never_ends), locale);

  for (const auto& node : graph.nodes) {
    if (!module_resolves(registry, node.moduleRef))
      add_issue(report, IssueCode::UnknownModuleRef, {node.nodeId}, locale);
  }

  for (const auto& id : g.ids) {
    bool conditional = false;
    bool fallback = false;
    for (const auto* e : graph.outgoing(id)) (e->is_default() ? fallback : conditional) = true;
    if (conditional && !fallback) add_issue(report, IssueCode::NoDefaultEdge, {id}, locale);
  }

  for (std::size_t v = 0; v < n; ++v) {
    if (!reachable[v]) add_issue(report, IssueCode::UnreachableNode, {g.ids[v]}, locale);
  }

  for (std::size_t v = 0; v < n; ++v) {
    const std::set<std::size_t> predecessors(g.pred[v].begin(), g.pred[v].end());
    bool revisit = predecessors.size() >= 2;
    if (!revisit) {
      // On a cycle iff v is reachable from one of its own successors.
      revisit = g.closure(g.succ[v], g.succ)[v];
    }
    if (revisit) add_issue(report, IssueCode::Revisit, {g.ids[v]}, locale);
  }

  sort_report(report);
  return report;
}

ValidationReport validate_transitive(const CompositionGraph& graph, const ModuleResolver& registry,
                                     std::string_view locale) {
  ValidationReport report = validate(graph, registry, locale);
  std::set<std::string> seen{graph.compositionId};
  std::vector<std::string> pending;
  auto enqueue_children = [&](const CompositionGraph& g) {
    for (const auto& node : g.nodes) {
      auto module = registry.find_module(node.moduleRef);
      if (module && module->kind == ModuleKind::composite && seen.insert(module->contentRef).second)
        pending.push_back(module->contentRef);
    }
  };
  enqueue_children(graph);
  while (!pending.empty()) {
    const std::string id = pending.back();
    pending.pop_back();
    auto nested = registry.find_composition(id);
    if (!nested) continue;
    auto sub = validate(*nested, registry, locale);
    for (auto* list : {&sub.errors, &sub.warnings}) {
      for (auto& issue : *list) {
        for (auto& s : issue.subject) s = id + "/" + s;
        issue.message = render_message(issue.code, issue.subject, locale);
        (is_error(issue.code) ? report.errors : report.warnings).push_back(std::move(issue));
      }
    }
    enqueue_children(*nested);
  }
  sort_report(report);
  return report;
}

}  // namespace canvas::analysis
