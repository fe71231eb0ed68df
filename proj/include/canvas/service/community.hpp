#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "canvas/analysis.hpp"
#include "canvas/h5p/package.hpp"
#include "canvas/model.hpp"
#include "canvas/outcome.hpp"
#include "canvas/remix.hpp"
#include "canvas/scheduler.hpp"
#include "canvas/service/chat.hpp"
#include "canvas/service/config.hpp"
#include "canvas/service/store.hpp"
#include "canvas/session.hpp"

namespace canvas::service {

inline constexpr std::string_view kAvatarSpecies = "otter";
inline constexpr std::size_t kMinPasswordLength = 8;
inline constexpr std::size_t kMaxAvatarName = 32;

struct Avatar {
  std::string name;
  std::string species{kAvatarSpecies};
  std::map<std::string, std::string> customization;
  friend bool operator==(const Avatar&, const Avatar&) = default;
};

struct UserAccount {
  std::string userId;
  std::string logonId;
  std::string passwordHash;
  std::optional<std::string> email;
  std::string locale = "en";
  Avatar avatar;
};

struct RegisterRequest {
  std::string logonId;
  std::string password;
  std::optional<std::string> email;
  // Defaults to the logon id.
  std::optional<std::string> avatarName;
  std::string locale = "en";
};

struct Registration {
  UserAccount account;
  // Set when another avatar already carries the same name; not an error.
  std::optional<std::string> notice;
};

enum class FavouriteKind { module, avatar };

struct Favourite {
  FavouriteKind kind;
  std::string id;  // moduleId, or the userId owning the avatar
  friend bool operator==(const Favourite&, const Favourite&) = default;
};

struct ModuleView {
  ModuleDescriptor module;
  bool published = false;
  int likes = 0;
};

struct SearchHit {
  ModuleView module;
  bool favourite = false;
};

struct CompositionView {
  ModuleView module;
  CompositionGraph graph;
};

struct ImportResult {
  ModuleView module;
  std::vector<h5p::Diagnostic> notices;
};

struct MergeOutcome {
  remix::MergeResult result;
  bool applied = false;
  int version = 0;
};

struct ChatMessage {
  std::string messageId;
  std::string fromUser;
  std::string toUser;
  std::string templateId;
  std::map<std::string, std::string> slots;  // slot -> moduleId
  Timestamp sentAt;
};

struct RenderedMessage {
  ChatMessage message;
  std::string text;
};

struct ExportedPackage {
  h5p::Bytes archive;
  std::vector<h5p::Diagnostic> diagnostics;
};

/// Everything the HTTP layer exposes, over one store. Writes take an
/// exclusive lock, reads a shared one. Every mutation of a composition
/// carries the version the caller last saw; a stale version is rejected
/// with VersionConflict and the caller retries after reloading.
class Service {
 public:
  using Clock = std::function<Timestamp()>;

  explicit Service(ServiceConfig config, Clock clock = {});
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // -- accounts
  Registration register_user(const RegisterRequest& request);
  /// Returns a bearer token. InvalidCredentials on a bad logon or password.
  std::string login(std::string_view logonId, std::string_view password);
  std::optional<std::string> user_for_token(std::string_view token) const;
  UserAccount get_user(std::string_view userId) const;
  std::optional<std::string> user_for_logon(std::string_view logonId) const;
  /// Issues a recovery token and writes it to the operator log. Unknown
  /// logon ids are silently ignored.
  void request_password_reset(std::string_view logonId);
  void reset_password(std::string_view recoveryToken, std::string_view newPassword);

  // -- modules
  /// Modules visible to the user: published ones plus their own drafts.
  std::vector<ModuleView> list_modules(std::string_view userId) const;
  ModuleView get_module(std::string_view moduleId) const;
  CompositionView create_composition(std::string_view userId, std::string_view title);
  /// Stores a `.h5p` archive as a new atomic module. The package is checked
  /// and rewritten canonically before it is stored.
  ImportResult import_package(std::string_view userId, std::span<const std::uint8_t> archive,
                              std::optional<std::string> title = std::nullopt,
                              std::optional<std::string> contentType = std::nullopt);
  /// Replaces the package of an atomic module the user owns.
  ModuleView replace_package(std::string_view userId, std::string_view moduleId, int expectedVersion,
                             std::span<const std::uint8_t> archive);
  /// Composites must pass transitive validation before they can be
  /// published (ValidationErrorsPresent otherwise).
  ModuleView publish(std::string_view userId, std::string_view moduleId);
  ModuleView derive(std::string_view userId, std::string_view moduleId);
  /// Idempotent. Returns the like count.
  int like(std::string_view userId, std::string_view moduleId);
  void favourite(std::string_view userId, const Favourite& target);
  std::vector<Favourite> list_favourites(std::string_view userId) const;
  /// Case-insensitive substring match on title, optionally restricted to a
  /// kind ("atomic", "composite") or content type. Ranked favourites
  /// first, then likes descending, then title, then module id.
  std::vector<SearchHit> search(std::string_view query, std::optional<std::string> typeFilter,
                                std::string_view userId) const;

  // -- compositions
  CompositionView get_composition(std::string_view compositionId) const;
  /// One editing operation: {"op": "add_node" | "add_edge" | "remove_edge" |
  /// "remove_node" | "set_label", ...}.
  CompositionView apply_operation(std::string_view userId, std::string_view compositionId, int expectedVersion,
                                  const nlohmann::json& operation);
  CompositionView replace_composition(std::string_view userId, std::string_view compositionId, int expectedVersion,
                                      CompositionGraph graph);
  analysis::ValidationReport validate(std::string_view compositionId, std::string_view locale) const;
  /// Merges a remix of the composition's module back into it. Applied only
  /// when conflict-free; otherwise the preview and conflicts are returned.
  MergeOutcome merge(std::string_view userId, std::string_view compositionId, std::string_view remixModuleId,
                     int expectedVersion);
  ExportedPackage export_composition(std::string_view userId, std::string_view compositionId) const;

  // -- runs
  session::SessionState start_run(std::string_view userId, std::string_view compositionId);
  /// The outcome's nodeId must name the run's current node. When the run
  /// finishes, every module it visited is enrolled for spaced review.
  session::SessionState submit_outcome(std::string_view userId, std::string_view runId, OutcomeRecord outcome);
  session::SessionState get_run(std::string_view userId, std::string_view runId) const;

  // -- reviews
  std::vector<sched::ReviewItem> due_reviews(std::string_view userId, sched::Date today) const;
  sched::ReviewItem record_review(std::string_view userId, std::string_view itemId, int grade, sched::Date today);

  // -- rewards and chat
  remix::RewardsSummary rewards(std::string_view userId) const;
  ChatMessage send_chat(std::string_view fromUser, std::string_view toUser, std::string_view templateId,
                        const std::map<std::string, std::string>& slots);
  std::vector<RenderedMessage> inbox(std::string_view userId) const;
  const ChatCatalog& catalog() const { return catalog_; }

  /// Likes on a module (0 for unknown ids).
  int like_count(std::string_view moduleId) const;

 private:
  class Resolver;
  struct Stored;

  Timestamp now() const;
  Stored load_module(std::string_view moduleId) const;
  bool visible(const Stored& m, std::string_view userId) const;
  ModuleView view(const Stored& m) const;
  int like_count_locked(std::string_view moduleId) const;
  session::SessionState load_run(std::string_view userId, std::string_view runId, CompositionGraph* graph) const;
  void save_module(const Stored& m);
  CompositionGraph load_graph(std::string_view compositionId) const;
  Stored owned_composition(std::string_view userId, std::string_view compositionId, int expectedVersion) const;
  CompositionView commit_graph(Stored module, CompositionGraph graph);
  void ledger_event(nlohmann::json event);
  void apply_ledger(const nlohmann::json& event);
  void require_user(std::string_view userId) const;
  std::string store_package(const h5p::H5pPackage& package);
  h5p::H5pPackage load_package(std::string_view contentRef) const;

  ServiceConfig config_;
  Clock clock_;
  ChatCatalog catalog_;
  mutable std::shared_mutex mutex_;
  std::unique_ptr<Store> store_;
  remix::Ledger ledger_;
  std::unordered_map<std::string, std::string> tokens_;          // token -> userId
  std::unordered_map<std::string, std::string> recoveryTokens_;  // token -> userId
};

std::string_view to_string(FavouriteKind kind);

void to_json(nlohmann::json& j, const Avatar& a);
void from_json(const nlohmann::json& j, Avatar& a);
/// Public form: never includes the password hash.
void to_json(nlohmann::json& j, const UserAccount& u);
void to_json(nlohmann::json& j, const Favourite& f);
void to_json(nlohmann::json& j, const ModuleView& m);
void to_json(nlohmann::json& j, const SearchHit& h);
void to_json(nlohmann::json& j, const CompositionView& c);
void to_json(nlohmann::json& j, const ChatMessage& m);
void to_json(nlohmann::json& j, const RenderedMessage& m);
void to_json(nlohmann::json& j, const MergeOutcome& m);

}  // namespace canvas::service
