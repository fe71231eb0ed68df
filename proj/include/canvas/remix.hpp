#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "canvas/model.hpp"
#include "canvas/outcome.hpp"

namespace canvas::remix {

enum class EventKind { ActiveReuse, ActiveRemix, PassiveReused, PassiveRemixed, MergeAccepted };

std::string_view to_string(EventKind kind);
EventKind event_kind_from_string(std::string_view s);

/// Fixed point table. Acting (reusing, remixing, contributing back) always
/// pays more than being the passive beneficiary of someone else's act.
int points_for(EventKind kind);

inline constexpr int kBadgeThresholds[] = {10, 50, 200};

struct RewardEvent {
  EventKind kind;
  int points;           // always > 0
  std::string subject;  // moduleId the event is about
  Timestamp at;

  friend bool operator==(const RewardEvent&, const RewardEvent&) = default;
};

struct Badge {
  std::string badgeId;  // "remixed-200" (active) or "remixes-200" (passive)
  std::string label;    // "remixed 200 modules!" / "200 remixes!"
  Timestamp awardedAt;

  friend bool operator==(const Badge&, const Badge&) = default;
};

/// Per-user append-only event list plus the badges it has earned.
struct RewardLedger {
  std::string userId;
  std::vector<RewardEvent> events;
  std::vector<Badge> badges;
};

struct LineageRecord {
  std::string moduleId;
  std::string authorId;
  std::optional<std::string> parentId;
  int forkPointVersion = 0;
  int reuseCount = 0;
  int remixCount = 0;
  bool published = false;
  // A derivative earns remix/reuse credit once, on its first publication.
  bool credited = false;
};

struct ModuleCounters {
  int reuseCount = 0;
  int remixCount = 0;

  friend bool operator==(const ModuleCounters&, const ModuleCounters&) = default;
};

struct RewardsSummary {
  long long totalPoints = 0;
  std::vector<Badge> badges;
  std::map<std::string, ModuleCounters> perModule;  // modules authored by the user
};

/// Badges implied by an event list, in the order they were earned. Pure
/// fold; the badge set only ever grows as events are appended.
std::vector<Badge> badges_for(const std::vector<RewardEvent>& events);

long long total_points(const std::vector<RewardEvent>& events);

/// Lineage and reward bookkeeping. Not thread-safe; the service serializes
/// writes.
class Ledger {
 public:
  /// Makes a user known so that an empty summary can be requested.
  void add_user(std::string_view userId);

  /// Registers an original (non-derived) module.
  void register_module(std::string_view moduleId, std::string_view authorId);

  /// Records a derivative of `parentId`. UnknownModule unless the parent is
  /// registered and published.
  void register_derivative(std::string_view moduleId, std::string_view authorId,
                           std::string_view parentId, int parentVersion);

  /// Marks a module published. The first publication of a derivative
  /// credits its parent: as a remix when `modified`, otherwise as a reuse.
  /// Remixes emit ActiveRemix to the deriving author and PassiveRemixed to
  /// the author of every ancestor; reuses emit ActiveReuse/PassiveReused
  /// the same way. Beneficiaries equal to the actor get nothing.
  void publish(std::string_view moduleId, bool modified, Timestamp at);

  /// Using `moduleId` unmodified in a composition. No-op for the module's
  /// own author.
  void record_reuse(std::string_view moduleId, std::string_view userId, Timestamp at);

  /// A remix merged back into `originalModuleId`; pays `remixerId`.
  void record_merge_accepted(std::string_view originalModuleId, std::string_view remixerId, Timestamp at);

  RewardsSummary rewards_summary(std::string_view userId) const;

  const LineageRecord* lineage(std::string_view moduleId) const;
  const RewardLedger* ledger(std::string_view userId) const;

  /// Parent chain of a module, nearest first (excluding the module itself).
  std::vector<std::string> ancestors(std::string_view moduleId) const;

  bool is_published(std::string_view moduleId) const;

  void to_json(nlohmann::json& j) const;
  static Ledger from_json(const nlohmann::json& j);

 private:
  void append(std::string_view userId, EventKind kind, std::string_view subject, Timestamp at);
  void credit(std::string_view actor, std::string_view subjectModule, bool remix, Timestamp at);
  LineageRecord& require(std::string_view moduleId);

  std::map<std::string, LineageRecord, std::less<>> lineage_;
  std::map<std::string, RewardLedger, std::less<>> ledgers_;
};

/// Copy of `parent` for `newAuthor`: fresh id, parent link, version 1,
/// pointing at `newContentRef` (the caller copies the content itself).
/// Registers the derivative in `ledger`.
ModuleDescriptor derive(Ledger& ledger, const ModuleDescriptor& parent, std::string_view newAuthor,
                        std::string newContentRef);

// ---------------------------------------------------------------------------
// Three-way merge

struct MergeConflict {
  // "<nodeId>", "<nodeId>.moduleRef", "<nodeId>.displayLabel",
  // "edge[<from>#<priority>]", "edge[...].to", "edge[...].condition",
  // "<nodeId>.default" or "startNodeId".
  std::string path;
  std::string base;
  std::string original;
  std::string remix;

  friend bool operator==(const MergeConflict&, const MergeConflict&) = default;
};

struct MergeResult {
  CompositionGraph graph;
  std::vector<MergeConflict> conflicts;  // sorted by path

  bool clean() const { return conflicts.empty(); }
};

/// Structural three-way merge keyed by node id and edge (from, priority).
/// One-sided changes apply; identical changes apply once; divergent changes
/// to the same attribute are reported and the merged graph keeps the base
/// value for it. The result always satisfies check_graph.
/// UnrelatedHistories when `base` is not a snapshot of `original`.
MergeResult merge(const CompositionGraph& original, const CompositionGraph& remix,
                  const CompositionGraph& base);

void to_json(nlohmann::json& j, const RewardEvent& e);
void from_json(const nlohmann::json& j, RewardEvent& e);
void to_json(nlohmann::json& j, const Badge& b);
void to_json(nlohmann::json& j, const RewardsSummary& s);
void to_json(nlohmann::json& j, const MergeConflict& c);

}  // namespace canvas::remix
