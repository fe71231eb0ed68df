#include "canvas/remix.hpp"

#include <algorithm>
#include <set>
#include <tuple>

#include "canvas/error.hpp"
#include "canvas/serialization.hpp"

namespace canvas::remix {

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::ActiveReuse: return "ActiveReuse";
    case EventKind::ActiveRemix: return "ActiveRemix";
    case EventKind::PassiveReused: return "PassiveReused";
    case EventKind::PassiveRemixed: return "PassiveRemixed";
    case EventKind::MergeAccepted: return "MergeAccepted";
  }
  return "?";
}

EventKind event_kind_from_string(std::string_view s) {
  for (auto k : {EventKind::ActiveReuse, EventKind::ActiveRemix, EventKind::PassiveReused,
                 EventKind::PassiveRemixed, EventKind::MergeAccepted}) {
    if (to_string(k) == s) return k;
  }
  throw Error(ErrorCode::BadRequest, "unknown reward event kind '" + std::string(s) + "'");
}

int points_for(EventKind kind) {
  switch (kind) {
    case EventKind::ActiveRemix: return 3;
    case EventKind::ActiveReuse: return 2;
    case EventKind::MergeAccepted: return 5;
    case EventKind::PassiveRemixed: return 1;
    case EventKind::PassiveReused: return 1;
  }
  return 0;
}

std::vector<Badge> badges_for(const std::vector<RewardEvent>& events) {
  std::vector<Badge> out;
  std::set<std::string> earned;
  int active_remixes = 0;
  std::map<std::string, int> remixes_of;
  auto award = [&](const std::string& id, const std::string& label, Timestamp at) {
    if (earned.insert(id).second) out.push_back(Badge{id, label, at});
  };
  for (const auto& e : events) {
    if (e.kind == EventKind::ActiveRemix) {
      ++active_remixes;
      for (int t : kBadgeThresholds) {
        if (active_remixes == t)
          award("remixed-" + std::to_string(t), "remixed " + std::to_string(t) + " modules!", e.at);
      }
    } else if (e.kind == EventKind::PassiveRemixed) {
      const int n = ++remixes_of[e.subject];
      for (int t : kBadgeThresholds) {
        if (n == t) award("remixes-" + std::to_string(t), std::to_string(t) + " remixes!", e.at);
      }
    }
  }
  return out;
}

long long total_points(const std::vector<RewardEvent>& events) {
  long long total = 0;
  for (const auto& e : events) total += e.points;
  return total;
}

void Ledger::add_user(std::string_view userId) {
  auto [it, inserted] = ledgers_.try_emplace(std::string(userId));
  if (inserted) it->second.userId = std::string(userId);
}

void Ledger::register_module(std::string_view moduleId, std::string_view authorId) {
  LineageRecord record;
  record.moduleId = std::string(moduleId);
  record.authorId = std::string(authorId);
  lineage_.insert_or_assign(record.moduleId, std::move(record));
  add_user(authorId);
}

void Ledger::register_derivative(std::string_view moduleId, std::string_view authorId,
                                 std::string_view parentId, int parentVersion) {
  const auto* parent = lineage(parentId);
  if (!parent || !parent->published) {
    throw Error(ErrorCode::UnknownModule, "no published module " + std::string(parentId));
  }
  if (lineage(moduleId)) {
    throw Error(ErrorCode::BadRequest, "module " + std::string(moduleId) + " is already registered");
  }
  LineageRecord record;
  record.moduleId = std::string(moduleId);
  record.authorId = std::string(authorId);
  record.parentId = std::string(parentId);
  record.forkPointVersion = parentVersion;
  lineage_.emplace(record.moduleId, std::move(record));
  add_user(authorId);
}

LineageRecord& Ledger::require(std::string_view moduleId) {
  auto it = lineage_.find(moduleId);
  if (it == lineage_.end()) throw Error(ErrorCode::UnknownModule, "unknown module " + std::string(moduleId));
  return it->second;
}

const LineageRecord* Ledger::lineage(std::string_view moduleId) const {
  auto it = lineage_.find(moduleId);
  return it == lineage_.end() ? nullptr : &it->second;
}

const RewardLedger* Ledger::ledger(std::string_view userId) const {
  auto it = ledgers_.find(userId);
  return it == ledgers_.end() ? nullptr : &it->second;
}

bool Ledger::is_published(std::string_view moduleId) const {
  const auto* r = lineage(moduleId);
  return r && r->published;
}

std::vector<std::string> Ledger::ancestors(std::string_view moduleId) const {
  std::vector<std::string> chain;
  std::set<std::string, std::less<>> seen{std::string(moduleId)};
  const auto* r = lineage(moduleId);
  while (r && r->parentId) {
    if (!seen.insert(*r->parentId).second) break;  // corrupt data; lineage is acyclic by construction
    chain.push_back(*r->parentId);
    r = lineage(*r->parentId);
  }
  return chain;
}

void Ledger::append(std::string_view userId, EventKind kind, std::string_view subject, Timestamp at) {
  add_user(userId);
  auto& book = ledgers_.find(userId)->second;
  book.events.push_back(RewardEvent{kind, points_for(kind), std::string(subject), at});
  // Badges are a fold of the event list; only new ones are appended.
  for (auto& badge : badges_for(book.events)) {
    const bool known = std::any_of(book.badges.begin(), book.badges.end(),
                                   [&](const Badge& b) { return b.badgeId == badge.badgeId; });
    if (!known) book.badges.push_back(std::move(badge));
  }
}

void Ledger::credit(std::string_view actor, std::string_view subjectModule, bool remix, Timestamp at) {
  auto& subject = require(subjectModule);
  if (subject.authorId == actor) return;
  (remix ? subject.remixCount : subject.reuseCount) += 1;
  append(actor, remix ? EventKind::ActiveRemix : EventKind::ActiveReuse, subjectModule, at);
  std::vector<std::string> beneficiaries{std::string(subjectModule)};
  for (auto& a : ancestors(subjectModule)) beneficiaries.push_back(std::move(a));
  for (const auto& id : beneficiaries) {
    const auto* r = lineage(id);
    if (!r || r->authorId == actor) continue;
    append(r->authorId, remix ? EventKind::PassiveRemixed : EventKind::PassiveReused, id, at);
  }
}

void Ledger::publish(std::string_view moduleId, bool modified, Timestamp at) {
  auto& record = require(moduleId);
  record.published = true;
  if (!record.parentId || record.credited) return;
  record.credited = true;
  const std::string actor = record.authorId;
  const std::string parent = *record.parentId;
  credit(actor, parent, modified, at);
}

void Ledger::record_reuse(std::string_view moduleId, std::string_view userId, Timestamp at) {
  credit(userId, moduleId, false, at);
}

void Ledger::record_merge_accepted(std::string_view originalModuleId, std::string_view remixerId,
                                   Timestamp at) {
  const auto& original = require(originalModuleId);
  if (original.authorId == remixerId) return;
  append(remixerId, EventKind::MergeAccepted, originalModuleId, at);
}

RewardsSummary Ledger::rewards_summary(std::string_view userId) const {
  const auto* book = ledger(userId);
  if (!book) throw Error(ErrorCode::UnknownUser, "unknown user " + std::string(userId));
  RewardsSummary summary;
  summary.totalPoints = total_points(book->events);
  summary.badges = book->badges;
  for (const auto& [id, record] : lineage_) {
    if (record.authorId == userId) summary.perModule[id] = ModuleCounters{record.reuseCount, record.remixCount};
  }
  return summary;
}

ModuleDescriptor derive(Ledger& ledger, const ModuleDescriptor& parent, std::string_view newAuthor,
                        std::string newContentRef) {
  ModuleDescriptor copy = parent;
  copy.moduleId = new_id();
  copy.authorId = std::string(newAuthor);
  copy.contentRef = std::move(newContentRef);
  copy.version = 1;
  copy.parentId = parent.moduleId;
  ledger.register_derivative(copy.moduleId, newAuthor, parent.moduleId, parent.version);
  return copy;
}

// ---------------------------------------------------------------------------
// Persistence

namespace {

using nlohmann::json;

json lineage_to_json(const LineageRecord& r) {
  json j{{"moduleId", r.moduleId},     {"authorId", r.authorId},     {"parentId", nullptr},
         {"forkPointVersion", r.forkPointVersion}, {"reuseCount", r.reuseCount},
         {"remixCount", r.remixCount}, {"published", r.published},   {"credited", r.credited}};
  if (r.parentId) j["parentId"] = *r.parentId;
  return j;
}

LineageRecord lineage_from_json(const json& j) {
  LineageRecord r;
  r.moduleId = j.at("moduleId").get<std::string>();
  r.authorId = j.at("authorId").get<std::string>();
  if (!j.at("parentId").is_null()) r.parentId = j.at("parentId").get<std::string>();
  r.forkPointVersion = j.at("forkPointVersion").get<int>();
  r.reuseCount = j.at("reuseCount").get<int>();
  r.remixCount = j.at("remixCount").get<int>();
  r.published = j.at("published").get<bool>();
  r.credited = j.at("credited").get<bool>();
  return r;
}

}  // namespace

void to_json(json& j, const RewardEvent& e) {
  j = json{{"kind", to_string(e.kind)},
           {"points", e.points},
           {"subject", e.subject},
           {"at", e.at.time_since_epoch().count()}};
}

void from_json(const json& j, RewardEvent& e) {
  e.kind = event_kind_from_string(j.at("kind").get<std::string>());
  e.points = j.at("points").get<int>();
  e.subject = j.at("subject").get<std::string>();
  e.at = Timestamp{std::chrono::seconds{j.at("at").get<std::int64_t>()}};
}

void to_json(json& j, const Badge& b) {
  j = json{{"badgeId", b.badgeId}, {"label", b.label}, {"awardedAt", b.awardedAt.time_since_epoch().count()}};
}

void to_json(json& j, const RewardsSummary& s) {
  json per = json::object();
  for (const auto& [id, c] : s.perModule) per[id] = json{{"reuseCount", c.reuseCount}, {"remixCount", c.remixCount}};
  j = json{{"totalPoints", s.totalPoints}, {"badges", s.badges}, {"perModule", std::move(per)}};
}

void to_json(json& j, const MergeConflict& c) {
  j = json{{"path", c.path}, {"base", c.base}, {"original", c.original}, {"remix", c.remix}};
}

void Ledger::to_json(json& j) const {
  json lineage = json::array();
  for (const auto& [id, r] : lineage_) lineage.push_back(lineage_to_json(r));
  json users = json::array();
  for (const auto& [id, book] : ledgers_) {
    users.push_back(json{{"userId", id}, {"events", book.events}});
  }
  j = json{{"lineage", std::move(lineage)}, {"users", std::move(users)}};
}

Ledger Ledger::from_json(const json& j) {
  Ledger ledger;
  for (const auto& item : j.at("lineage")) {
    auto r = lineage_from_json(item);
    auto id = r.moduleId;
    ledger.lineage_.emplace(std::move(id), std::move(r));
  }
  for (const auto& item : j.at("users")) {
    RewardLedger book;
    book.userId = item.at("userId").get<std::string>();
    book.events = item.at("events").get<std::vector<RewardEvent>>();
    book.badges = badges_for(book.events);
    auto id = book.userId;
    ledger.ledgers_.emplace(std::move(id), std::move(book));
  }
  return ledger;
}

// ---------------------------------------------------------------------------
// Merge

namespace {

using EdgeKey = std::pair<std::string, int>;

std::string edge_path(const EdgeKey& k) {
  return "edge[" + k.first + "#" + std::to_string(k.second) + "]";
}

std::string show(const std::optional<std::string>& v) { return v ? *v : "(none)"; }

std::string show_condition(const std::optional<cond::Condition>& c) {
  return c ? cond::print(*c) : "(default)";
}

std::string show_node(const std::optional<NodeInstance>& n) {
  if (!n) return "(absent)";
  return n->moduleRef + (n->displayLabel ? " \"" + *n->displayLabel + "\"" : "");
}

std::string show_edge(const std::optional<FlowEdge>& e) {
  if (!e) return "(absent)";
  return "-> " + e->to + " if " + show_condition(e->condition);
}

// Three-way pick of one value. Returns nullopt on divergence.
template <typename T>
std::optional<T> pick(const T& base, const T& ours, const T& theirs) {
  if (ours == theirs) return ours;
  if (ours == base) return theirs;
  if (theirs == base) return ours;
  return std::nullopt;
}

template <typename Map>
std::set<typename Map::key_type> keys_of(const Map& a, const Map& b, const Map& c) {
  std::set<typename Map::key_type> keys;
  for (const auto* m : {&a, &b, &c}) {
    for (const auto& [k, v] : *m) keys.insert(k);
  }
  return keys;
}

template <typename Map>
std::optional<typename Map::mapped_type> lookup(const Map& m, const typename Map::key_type& k) {
  auto it = m.find(k);
  if (it == m.end()) return std::nullopt;
  return it->second;
}

}  // namespace

MergeResult merge(const CompositionGraph& original, const CompositionGraph& remix,
                  const CompositionGraph& base) {
  if (base.compositionId != original.compositionId) {
    throw Error(ErrorCode::UnrelatedHistories,
                "base " + base.compositionId + " is not a snapshot of " + original.compositionId);
  }
  MergeResult result;
  auto& conflicts = result.conflicts;
  auto conflict = [&](std::string path, std::string b, std::string o, std::string r) {
    conflicts.push_back(MergeConflict{std::move(path), std::move(b), std::move(o), std::move(r)});
  };

  // Nodes.
  std::map<std::string, NodeInstance> bn, on, rn;
  for (const auto& n : base.nodes) bn.emplace(n.nodeId, n);
  for (const auto& n : original.nodes) on.emplace(n.nodeId, n);
  for (const auto& n : remix.nodes) rn.emplace(n.nodeId, n);

  std::map<std::string, NodeInstance> merged_nodes;
  for (const auto& id : keys_of(bn, on, rn)) {
    const auto b = lookup(bn, id);
    const auto o = lookup(on, id);
    const auto r = lookup(rn, id);
    if (auto chosen = pick(b, o, r)) {
      if (*chosen) merged_nodes.emplace(id, **chosen);
      continue;
    }
    if (b && o && r) {
      NodeInstance node = *b;
      if (auto ref = pick(b->moduleRef, o->moduleRef, r->moduleRef)) {
        node.moduleRef = *ref;
      } else {
        conflict(id + ".moduleRef", b->moduleRef, o->moduleRef, r->moduleRef);
      }
      if (auto label = pick(b->displayLabel, o->displayLabel, r->displayLabel)) {
        node.displayLabel = *label;
      } else {
        conflict(id + ".displayLabel", show(b->displayLabel), show(o->displayLabel), show(r->displayLabel));
      }
      merged_nodes.emplace(id, std::move(node));
    } else {
      // Existence diverged: delete vs. modify, or two different additions.
      conflict(id, show_node(b), show_node(o), show_node(r));
      if (b) merged_nodes.emplace(id, *b);
    }
  }

  // Start node.
  std::string start = base.startNodeId;
  if (auto s = pick(base.startNodeId, original.startNodeId, remix.startNodeId)) {
    start = *s;
  } else {
    conflict("startNodeId", base.startNodeId, original.startNodeId, remix.startNodeId);
  }

  // Edges, keyed by (from, priority).
  std::map<EdgeKey, FlowEdge> be, oe, re;
  for (const auto& e : base.edges) be.emplace(EdgeKey{e.from, e.priority}, e);
  for (const auto& e : original.edges) oe.emplace(EdgeKey{e.from, e.priority}, e);
  for (const auto& e : remix.edges) re.emplace(EdgeKey{e.from, e.priority}, e);

  std::map<EdgeKey, FlowEdge> merged_edges;
  for (const auto& key : keys_of(be, oe, re)) {
    const auto b = lookup(be, key);
    const auto o = lookup(oe, key);
    const auto r = lookup(re, key);
    if (auto chosen = pick(b, o, r)) {
      if (*chosen) merged_edges.emplace(key, **chosen);
      continue;
    }
    if (b && o && r) {
      FlowEdge edge = *b;
      if (auto to = pick(b->to, o->to, r->to)) {
        edge.to = *to;
      } else {
        conflict(edge_path(key) + ".to", b->to, o->to, r->to);
      }
      if (auto c = pick(b->condition, o->condition, r->condition)) {
        edge.condition = *c;
      } else {
        conflict(edge_path(key) + ".condition", show_condition(b->condition), show_condition(o->condition),
                 show_condition(r->condition));
      }
      merged_edges.emplace(key, std::move(edge));
    } else {
      conflict(edge_path(key), show_edge(b), show_edge(o), show_edge(r));
      if (b) merged_edges.emplace(key, *b);
    }
  }

  // Repair invariants the per-key merge cannot see.
  std::set<std::string> conflicted_paths;
  for (const auto& c : conflicts) conflicted_paths.insert(c.path);

  if (!merged_nodes.count(start)) {
    if (!conflicted_paths.count("startNodeId"))
      conflict("startNodeId", base.startNodeId, original.startNodeId, remix.startNodeId);
    start = base.startNodeId;
    if (!merged_nodes.count(start)) {
      // Both sides removed the base start node; bring it back unchanged.
      if (auto n = lookup(bn, start)) merged_nodes.emplace(start, *n);
    }
  }

  for (auto it = merged_edges.begin(); it != merged_edges.end();) {
    const auto& e = it->second;
    if (merged_nodes.count(e.from) && merged_nodes.count(e.to)) {
      ++it;
      continue;
    }
    const auto path = edge_path(it->first);
    if (!conflicted_paths.count(path)) {
      conflict(path, show_edge(lookup(be, it->first)), show_edge(lookup(oe, it->first)),
               show_edge(lookup(re, it->first)));
    }
    it = merged_edges.erase(it);
  }

  std::map<std::string, std::vector<EdgeKey>> defaults;
  for (const auto& [key, e] : merged_edges) {
    if (e.is_default()) defaults[e.from].push_back(key);
  }
  for (const auto& [from, keys] : defaults) {
    if (keys.size() < 2) continue;
    std::string o_desc, r_desc, b_desc;
    for (const auto& k : keys) {
      if (be.count(k) && be.at(k).is_default()) b_desc += edge_path(k);
      if (oe.count(k) && oe.at(k).is_default()) o_desc += edge_path(k);
      if (re.count(k) && re.at(k).is_default()) r_desc += edge_path(k);
    }
    conflict(from + ".default", b_desc, o_desc, r_desc);
    for (const auto& k : keys) {
      const bool in_base = be.count(k) && be.at(k).is_default();
      if (!in_base) merged_edges.erase(k);
    }
  }

  result.graph.compositionId = original.compositionId;
  result.graph.startNodeId = start;
  for (auto& [id, n] : merged_nodes) result.graph.nodes.push_back(std::move(n));
  for (auto& [k, e] : merged_edges) result.graph.edges.push_back(std::move(e));
  canonicalize(result.graph);
  std::sort(conflicts.begin(), conflicts.end(),
            [](const MergeConflict& a, const MergeConflict& b) { return a.path < b.path; });
  return result;
}

}  // namespace canvas::remix
