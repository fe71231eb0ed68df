#include "canvas/service/community.hpp"

#include <algorithm>
#include <cctype>
#include <iostream>
#include <mutex>
#include <set>

#include "canvas/error.hpp"
#include "canvas/h5p/export.hpp"
#include "canvas/serialization.hpp"
#include "canvas/service/password.hpp"

namespace canvas::service {

using nlohmann::json;

namespace {

constexpr std::string_view kUsers = "users";
constexpr std::string_view kLogons = "logons";
constexpr std::string_view kModules = "modules";
constexpr std::string_view kCompositions = "compositions";
constexpr std::string_view kHistory = "history";
constexpr std::string_view kPackages = "packages";
constexpr std::string_view kLikes = "likes";
constexpr std::string_view kFavourites = "favourites";
constexpr std::string_view kRuns = "runs";
constexpr std::string_view kReviews = "reviews";
constexpr std::string_view kLedgerStream = "ledger";
constexpr std::string_view kChatStream = "chat";

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::int64_t epoch(Timestamp t) { return t.time_since_epoch().count(); }
Timestamp from_epoch(std::int64_t s) { return Timestamp{std::chrono::seconds{s}}; }

std::string history_key(std::string_view compositionId, int version) {
  return std::string(compositionId) + "@" + std::to_string(version);
}

json user_record(const UserAccount& u) {
  json j{{"userId", u.userId}, {"logonId", u.logonId}, {"passwordHash", u.passwordHash},
         {"email", nullptr},   {"locale", u.locale},     {"avatar", u.avatar}};
  if (u.email) j["email"] = *u.email;
  return j;
}

UserAccount user_from_record(const json& j) {
  UserAccount u;
  u.userId = j.at("userId").get<std::string>();
  u.logonId = j.at("logonId").get<std::string>();
  u.passwordHash = j.at("passwordHash").get<std::string>();
  if (j.at("email").is_string()) u.email = j.at("email").get<std::string>();
  u.locale = j.at("locale").get<std::string>();
  u.avatar = j.at("avatar").get<Avatar>();
  return u;
}

json field(const json& body, const char* key) {
  if (!body.is_object() || !body.contains(key)) {
    throw Error(ErrorCode::BadRequest, std::string("missing field '") + key + "'");
  }
  return body.at(key);
}

template <typename T>
T field_as(const json& body, const char* key) {
  try {
    return field(body, key).get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::BadRequest, std::string("field '") + key + "' has the wrong type");
  }
}

std::optional<std::string> optional_text(const json& body, const char* key) {
  if (!body.contains(key) || body.at(key).is_null()) return std::nullopt;
  return field_as<std::string>(body, key);
}

// Coarse type for the search filter, from an H5P main library name.
std::string content_type_for(std::string_view machineName) {
  static const std::map<std::string, std::string, std::less<>> kKnown{
      {"h5p.multichoice", "quiz"},        {"h5p.questionset", "quiz"},   {"h5p.truefalse", "quiz"},
      {"h5p.blanks", "quiz"},             {"h5p.dragtext", "quiz"},      {"h5p.dragquestion", "quiz"},
      {"h5p.singlechoiceset", "quiz"},    {"h5p.markthewords", "quiz"},  {"h5p.summary", "quiz"},
      {"h5p.essay", "quiz"},              {"h5p.video", "video"},        {"h5p.interactivevideo", "video"},
      {"h5p.image", "image"},             {"h5p.imagehotspots", "image"}, {"h5p.audio", "audio"},
      {"h5p.advancedtext", "text"},       {"h5p.text", "text"},          {"h5p.accordion", "text"},
      {"h5p.coursepresentation", "presentation"}, {"canvas.compositionplayer", "composition"}};
  const auto key = lower(machineName);
  if (auto it = kKnown.find(key); it != kKnown.end()) return it->second;
  const auto dot = key.rfind('.');
  return dot == std::string::npos ? key : key.substr(dot + 1);
}

}  // namespace

struct Service::Stored {
  ModuleDescriptor module;
  bool published = false;
};

class Service::Resolver : public ModuleResolver, public h5p::PackageResolver {
 public:
  explicit Resolver(const Service& s) : s_(s) {}

  std::optional<ModuleDescriptor> find_module(std::string_view moduleId) const override {
    auto r = s_.store_->get(kModules, moduleId);
    if (!r) return std::nullopt;
    return r->value.at("module").get<ModuleDescriptor>();
  }

  std::optional<CompositionGraph> find_composition(std::string_view compositionId) const override {
    auto r = s_.store_->get(kCompositions, compositionId);
    if (!r) return std::nullopt;
    return r->value.at("graph").get<CompositionGraph>();
  }

  std::optional<h5p::H5pPackage> find_package(std::string_view contentRef) const override {
    if (!s_.store_->get(kPackages, contentRef)) return std::nullopt;
    return s_.load_package(contentRef);
  }

 private:
  const Service& s_;
};

Service::Service(ServiceConfig config, Clock clock)
    : config_(std::move(config)), clock_(std::move(clock)), catalog_(ChatCatalog::builtin()) {
  store_ = config_.storePath.empty() ? std::make_unique<Store>()
                                     : std::make_unique<Store>(config_.storePath, config_.snapshotEvery);
  for (const auto& event : store_->events(kLedgerStream)) apply_ledger(event);
}

Service::~Service() = default;

Timestamp Service::now() const {
  if (clock_) return clock_();
  return std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now());
}

// ---------------------------------------------------------------------------
// Accounts

Registration Service::register_user(const RegisterRequest& request) {
  if (request.logonId.empty()) throw Error(ErrorCode::BadRequest, "logon id must not be empty");
  if (request.password.size() < kMinPasswordLength) {
    throw Error(ErrorCode::WeakPassword,
                "password must have at least " + std::to_string(kMinPasswordLength) + " characters");
  }
  const std::string name = request.avatarName.value_or(request.logonId);
  if (name.empty() || name.size() > kMaxAvatarName) {
    throw Error(ErrorCode::BadRequest, "avatar name must be 1 to " + std::to_string(kMaxAvatarName) + " characters");
  }
  const auto locales = analysis::supported_locales();
  if (std::find(locales.begin(), locales.end(), request.locale) == locales.end()) {
    throw Error(ErrorCode::BadRequest, "unsupported locale " + request.locale);
  }

  // Hashing is slow on purpose; keep it outside the writer lock.
  UserAccount account;
  account.userId = new_id();
  account.logonId = request.logonId;
  account.passwordHash = hash_password(request.password, config_.hash);
  account.email = request.email;
  account.locale = request.locale;
  account.avatar.name = name;

  std::unique_lock lock(mutex_);
  if (store_->get(kLogons, account.logonId)) {
    throw Error(ErrorCode::LogonIdTaken, "logon id '" + account.logonId + "' is taken");
  }
  Registration out;
  for (const auto& [id, record] : store_->list(kUsers)) {
    if (record.value.at("avatar").at("name") == name) {
      out.notice = "another " + std::string(kAvatarSpecies) + " is already called " + name +
                   "; the name is kept, but it is not unique";
      break;
    }
  }
  store_->put(kLogons, account.logonId, account.userId, 0);
  store_->put(kUsers, account.userId, user_record(account));
  ledger_event(json{{"op", "user"}, {"userId", account.userId}});
  out.account = std::move(account);
  return out;
}

std::string Service::login(std::string_view logonId, std::string_view password) {
  std::string userId, hash;
  {
    std::shared_lock lock(mutex_);
    auto logon = store_->get(kLogons, logonId);
    if (logon) {
      userId = logon->value.get<std::string>();
      hash = store_->get(kUsers, userId)->value.at("passwordHash").get<std::string>();
    }
  }
  if (userId.empty() || !verify_password(hash, password)) {
    throw Error(ErrorCode::InvalidCredentials, "unknown logon id or wrong password");
  }
  auto token = random_token();
  std::unique_lock lock(mutex_);
  tokens_[token] = userId;
  return token;
}

std::optional<std::string> Service::user_for_token(std::string_view token) const {
  std::shared_lock lock(mutex_);
  auto it = tokens_.find(std::string(token));
  if (it == tokens_.end()) return std::nullopt;
  return it->second;
}

UserAccount Service::get_user(std::string_view userId) const {
  std::shared_lock lock(mutex_);
  auto r = store_->get(kUsers, userId);
  if (!r) throw Error(ErrorCode::UnknownUser, "no user " + std::string(userId));
  return user_from_record(r->value);
}

std::optional<std::string> Service::user_for_logon(std::string_view logonId) const {
  std::shared_lock lock(mutex_);
  auto r = store_->get(kLogons, logonId);
  if (!r) return std::nullopt;
  return r->value.get<std::string>();
}

void Service::request_password_reset(std::string_view logonId) {
  std::unique_lock lock(mutex_);
  auto logon = store_->get(kLogons, logonId);
  if (!logon) return;
  auto token = random_token();
  recoveryTokens_[token] = logon->value.get<std::string>();
  std::clog << "password recovery token for " << logonId << ": " << token << std::endl;
}

void Service::reset_password(std::string_view recoveryToken, std::string_view newPassword) {
  if (newPassword.size() < kMinPasswordLength) {
    throw Error(ErrorCode::WeakPassword,
                "password must have at least " + std::to_string(kMinPasswordLength) + " characters");
  }
  const auto hash = hash_password(newPassword, config_.hash);
  std::unique_lock lock(mutex_);
  auto it = recoveryTokens_.find(std::string(recoveryToken));
  if (it == recoveryTokens_.end()) throw Error(ErrorCode::InvalidCredentials, "unknown recovery token");
  auto record = store_->get(kUsers, it->second)->value;
  record["passwordHash"] = hash;
  store_->put(kUsers, it->second, record);
  recoveryTokens_.erase(it);
}

void Service::require_user(std::string_view userId) const {
  if (!store_->get(kUsers, userId)) throw Error(ErrorCode::UnknownUser, "no user " + std::string(userId));
}

// ---------------------------------------------------------------------------
// Ledger

void Service::ledger_event(json event) {
  apply_ledger(event);
  store_->append(kLedgerStream, std::move(event));
}

void Service::apply_ledger(const json& e) {
  const auto op = e.at("op").get<std::string>();
  if (op == "user") {
    ledger_.add_user(e.at("userId").get<std::string>());
  } else if (op == "register") {
    ledger_.register_module(e.at("moduleId").get<std::string>(), e.at("authorId").get<std::string>());
  } else if (op == "derive") {
    ledger_.register_derivative(e.at("moduleId").get<std::string>(), e.at("authorId").get<std::string>(),
                                e.at("parentId").get<std::string>(), e.at("parentVersion").get<int>());
  } else if (op == "publish") {
    ledger_.publish(e.at("moduleId").get<std::string>(), e.at("modified").get<bool>(),
                    from_epoch(e.at("at").get<std::int64_t>()));
  } else if (op == "reuse") {
    ledger_.record_reuse(e.at("moduleId").get<std::string>(), e.at("userId").get<std::string>(),
                         from_epoch(e.at("at").get<std::int64_t>()));
  } else if (op == "merge") {
    ledger_.record_merge_accepted(e.at("moduleId").get<std::string>(), e.at("remixerId").get<std::string>(),
                                  from_epoch(e.at("at").get<std::int64_t>()));
  } else {
    throw Error(ErrorCode::StoreFailure, "unknown ledger event '" + op + "'");
  }
}

// ---------------------------------------------------------------------------
// Modules

Service::Stored Service::load_module(std::string_view moduleId) const {
  auto r = store_->get(kModules, moduleId);
  if (!r) throw Error(ErrorCode::UnknownModule, "no module " + std::string(moduleId));
  return Stored{r->value.at("module").get<ModuleDescriptor>(), r->value.at("published").get<bool>()};
}

bool Service::visible(const Stored& m, std::string_view userId) const {
  return m.published || m.module.authorId == userId;
}

ModuleView Service::view(const Stored& m) const {
  return ModuleView{m.module, m.published, like_count_locked(m.module.moduleId)};
}

int Service::like_count_locked(std::string_view moduleId) const {
  auto r = store_->get(kLikes, moduleId);
  return r ? static_cast<int>(r->value.size()) : 0;
}

int Service::like_count(std::string_view moduleId) const {
  std::shared_lock lock(mutex_);
  return like_count_locked(moduleId);
}

void Service::save_module(const Stored& m) {
  store_->put(kModules, m.module.moduleId, json{{"module", m.module}, {"published", m.published}});
}

std::vector<ModuleView> Service::list_modules(std::string_view userId) const {
  std::shared_lock lock(mutex_);
  std::vector<ModuleView> out;
  for (const auto& [id, r] : store_->list(kModules)) {
    Stored m{r.value.at("module").get<ModuleDescriptor>(), r.value.at("published").get<bool>()};
    if (visible(m, userId)) out.push_back(view(m));
  }
  return out;
}

ModuleView Service::get_module(std::string_view moduleId) const {
  std::shared_lock lock(mutex_);
  return view(load_module(moduleId));
}

CompositionView Service::create_composition(std::string_view userId, std::string_view title) {
  std::unique_lock lock(mutex_);
  require_user(userId);
  auto [module, graph] = new_composition(title, userId);
  Stored stored{module, false};
  save_module(stored);
  store_->put(kCompositions, graph.compositionId, json{{"moduleId", module.moduleId}, {"graph", graph}});
  store_->put(kHistory, history_key(graph.compositionId, module.version), graph);
  ledger_event(json{{"op", "register"}, {"moduleId", module.moduleId}, {"authorId", module.authorId}});
  return CompositionView{view(stored), graph};
}

std::string Service::store_package(const h5p::H5pPackage& package) {
  const auto bytes = h5p::write_package(package);
  const std::string contentRef = new_id();
  store_->put(kPackages, contentRef, json{{"archive", base64_encode(std::string(bytes.begin(), bytes.end()))}});
  return contentRef;
}

h5p::H5pPackage Service::load_package(std::string_view contentRef) const {
  auto r = store_->get(kPackages, contentRef);
  if (!r) throw Error(ErrorCode::MissingPackage, "no package " + std::string(contentRef));
  const auto raw = base64_decode(r->value.at("archive").get<std::string>());
  const h5p::Bytes bytes(raw.begin(), raw.end());
  return h5p::read_package(bytes);
}

ImportResult Service::import_package(std::string_view userId, std::span<const std::uint8_t> archive,
                                     std::optional<std::string> title, std::optional<std::string> contentType) {
  ImportResult out;
  const auto package = h5p::read_package(archive, &out.notices);  // parse outside the lock
  std::unique_lock lock(mutex_);
  require_user(userId);
  Stored stored;
  stored.module.moduleId = new_id();
  stored.module.kind = ModuleKind::atomic;
  stored.module.title = title && !title->empty() ? *title : package.manifest.title;
  if (stored.module.title.empty()) throw Error(ErrorCode::EmptyTitle, "imported package has no title");
  stored.module.authorId = std::string(userId);
  stored.module.contentRef = store_package(package);
  stored.module.contentType = contentType ? lower(*contentType) : content_type_for(package.manifest.mainLibrary);
  save_module(stored);
  ledger_event(json{{"op", "register"}, {"moduleId", stored.module.moduleId}, {"authorId", stored.module.authorId}});
  out.module = view(stored);
  return out;
}

ModuleView Service::replace_package(std::string_view userId, std::string_view moduleId, int expectedVersion,
                                    std::span<const std::uint8_t> archive) {
  const auto package = h5p::read_package(archive);
  std::unique_lock lock(mutex_);
  auto stored = load_module(moduleId);
  if (stored.module.authorId != userId) throw Error(ErrorCode::Unauthorized, "only the author may edit a module");
  if (stored.module.kind != ModuleKind::atomic) {
    throw Error(ErrorCode::BadRequest, "compositions are edited through their graph");
  }
  if (stored.module.version != expectedVersion) {
    throw Error(ErrorCode::VersionConflict, "module is at version " + std::to_string(stored.module.version));
  }
  const auto old = stored.module.contentRef;
  stored.module.contentRef = store_package(package);
  stored.module.version += 1;
  save_module(stored);
  store_->erase(kPackages, old);
  return view(stored);
}

ModuleView Service::publish(std::string_view userId, std::string_view moduleId) {
  std::unique_lock lock(mutex_);
  auto stored = load_module(moduleId);
  if (stored.module.authorId != userId) throw Error(ErrorCode::Unauthorized, "only the author may publish");
  if (stored.published) return view(stored);
  if (stored.module.kind == ModuleKind::composite) {
    const Resolver resolver(*this);
    const auto report = analysis::validate_transitive(load_graph(stored.module.contentRef), resolver);
    if (!report.ok()) {
      throw Error(ErrorCode::ValidationErrorsPresent, "cannot publish: " + report.errors.front().message);
    }
  }
  stored.published = true;
  save_module(stored);
  ledger_event(json{{"op", "publish"},
                    {"moduleId", stored.module.moduleId},
                    {"modified", stored.module.version > 1},
                    {"at", epoch(now())}});
  return view(stored);
}

ModuleView Service::derive(std::string_view userId, std::string_view moduleId) {
  std::unique_lock lock(mutex_);
  require_user(userId);
  const auto parent = load_module(moduleId);
  if (!visible(parent, userId)) throw Error(ErrorCode::UnknownModule, "no module " + std::string(moduleId));
  if (!parent.published) throw Error(ErrorCode::UnknownModule, "only published modules can be remixed");

  std::string contentRef;
  std::optional<CompositionGraph> graph;
  if (parent.module.kind == ModuleKind::composite) {
    graph = load_graph(parent.module.contentRef);
    graph->compositionId = new_id();
    contentRef = graph->compositionId;
  } else {
    contentRef = new_id();
    store_->put(kPackages, contentRef, store_->get(kPackages, parent.module.contentRef)->value);
  }
  const auto module = remix::derive(ledger_, parent.module, userId, contentRef);
  store_->append(kLedgerStream, json{{"op", "derive"},
                                     {"moduleId", module.moduleId},
                                     {"authorId", module.authorId},
                                     {"parentId", parent.module.moduleId},
                                     {"parentVersion", parent.module.version}});
  Stored stored{module, false};
  save_module(stored);
  if (graph) {
    store_->put(kCompositions, graph->compositionId, json{{"moduleId", module.moduleId}, {"graph", *graph}});
    store_->put(kHistory, history_key(graph->compositionId, module.version), *graph);
  }
  return view(stored);
}

int Service::like(std::string_view userId, std::string_view moduleId) {
  std::unique_lock lock(mutex_);
  require_user(userId);
  const auto m = load_module(moduleId);
  if (!visible(m, userId)) throw Error(ErrorCode::UnknownModule, "no module " + std::string(moduleId));
  std::set<std::string> likers;
  if (auto r = store_->get(kLikes, moduleId)) likers = r->value.get<std::set<std::string>>();
  if (likers.insert(std::string(userId)).second) store_->put(kLikes, moduleId, likers);
  return static_cast<int>(likers.size());
}

void Service::favourite(std::string_view userId, const Favourite& target) {
  std::unique_lock lock(mutex_);
  require_user(userId);
  if (target.kind == FavouriteKind::module) {
    auto r = store_->get(kModules, target.id);
    if (!r || !visible(Stored{r->value.at("module").get<ModuleDescriptor>(), r->value.at("published").get<bool>()},
                       userId)) {
      throw Error(ErrorCode::UnknownTarget, "no module " + target.id);
    }
  } else if (!store_->get(kUsers, target.id)) {
    throw Error(ErrorCode::UnknownTarget, "no avatar " + target.id);
  }
  json list = json::array();
  if (auto r = store_->get(kFavourites, userId)) list = r->value;
  const json entry{{"kind", to_string(target.kind)}, {"id", target.id}};
  if (std::find(list.begin(), list.end(), entry) != list.end()) return;
  list.push_back(entry);
  store_->put(kFavourites, userId, list);
}

std::vector<Favourite> Service::list_favourites(std::string_view userId) const {
  std::shared_lock lock(mutex_);
  std::vector<Favourite> out;
  if (auto r = store_->get(kFavourites, userId)) {
    for (const auto& f : r->value) {
      out.push_back(Favourite{f.at("kind") == "module" ? FavouriteKind::module : FavouriteKind::avatar,
                              f.at("id").get<std::string>()});
    }
  }
  return out;
}

std::vector<SearchHit> Service::search(std::string_view query, std::optional<std::string> typeFilter,
                                       std::string_view userId) const {
  std::shared_lock lock(mutex_);
  const auto needle = lower(query);
  const auto filter = typeFilter ? std::optional(lower(*typeFilter)) : std::nullopt;
  std::set<std::string> favourites;
  if (auto r = store_->get(kFavourites, userId)) {
    for (const auto& f : r->value) {
      if (f.at("kind") == "module") favourites.insert(f.at("id").get<std::string>());
    }
  }
  std::vector<SearchHit> hits;
  for (const auto& [id, r] : store_->list(kModules)) {
    Stored m{r.value.at("module").get<ModuleDescriptor>(), r.value.at("published").get<bool>()};
    if (!visible(m, userId)) continue;
    if (filter && *filter != to_string(m.module.kind) && *filter != lower(m.module.contentType)) continue;
    if (lower(m.module.title).find(needle) == std::string::npos) continue;
    hits.push_back(SearchHit{view(m), favourites.count(id) > 0});
  }
  std::sort(hits.begin(), hits.end(), [](const SearchHit& a, const SearchHit& b) {
    if (a.favourite != b.favourite) return a.favourite;
    if (a.module.likes != b.module.likes) return a.module.likes > b.module.likes;
    if (a.module.module.title != b.module.module.title) return a.module.module.title < b.module.module.title;
    return a.module.module.moduleId < b.module.module.moduleId;
  });
  return hits;
}

// ---------------------------------------------------------------------------
// Compositions

CompositionGraph Service::load_graph(std::string_view compositionId) const {
  auto r = store_->get(kCompositions, compositionId);
  if (!r) throw Error(ErrorCode::UnknownComposition, "no composition " + std::string(compositionId));
  return r->value.at("graph").get<CompositionGraph>();
}

CompositionView Service::get_composition(std::string_view compositionId) const {
  std::shared_lock lock(mutex_);
  auto r = store_->get(kCompositions, compositionId);
  if (!r) throw Error(ErrorCode::UnknownComposition, "no composition " + std::string(compositionId));
  return CompositionView{view(load_module(r->value.at("moduleId").get<std::string>())),
                         r->value.at("graph").get<CompositionGraph>()};
}

Service::Stored Service::owned_composition(std::string_view userId, std::string_view compositionId,
                                           int expectedVersion) const {
  auto r = store_->get(kCompositions, compositionId);
  if (!r) throw Error(ErrorCode::UnknownComposition, "no composition " + std::string(compositionId));
  auto stored = load_module(r->value.at("moduleId").get<std::string>());
  if (stored.module.authorId != userId) throw Error(ErrorCode::Unauthorized, "only the author may edit a composition");
  if (stored.module.version != expectedVersion) {
    throw Error(ErrorCode::VersionConflict, "composition is at version " + std::to_string(stored.module.version) +
                                                ", expected " + std::to_string(expectedVersion));
  }
  return stored;
}

CompositionView Service::commit_graph(Stored module, CompositionGraph graph) {
  canonicalize(graph);
  module.module.version += 1;
  save_module(module);
  store_->put(kCompositions, graph.compositionId, json{{"moduleId", module.module.moduleId}, {"graph", graph}});
  store_->put(kHistory, history_key(graph.compositionId, module.module.version), graph);
  return CompositionView{view(module), std::move(graph)};
}

CompositionView Service::apply_operation(std::string_view userId, std::string_view compositionId,
                                         int expectedVersion, const json& operation) {
  std::unique_lock lock(mutex_);
  auto module = owned_composition(userId, compositionId, expectedVersion);
  auto graph = load_graph(compositionId);
  const Resolver resolver(*this);
  const auto op = field_as<std::string>(operation, "op");
  std::optional<std::string> reused;
  if (op == "add_node") {
    const auto ref = field_as<std::string>(operation, "moduleRef");
    if (ref != kStartModuleId) {
      const auto target = load_module(ref);
      if (!visible(target, userId)) throw Error(ErrorCode::UnknownModule, "no module " + ref);
      if (target.module.authorId != userId) reused = ref;
    }
    graph = add_node(graph, ref, resolver, optional_text(operation, "nodeId"), optional_text(operation, "displayLabel"));
  } else if (op == "add_edge") {
    std::optional<cond::Condition> condition;
    if (auto text = optional_text(operation, "condition")) condition = cond::parse_or_throw(*text);
    graph = add_edge(graph, field_as<std::string>(operation, "from"), field_as<std::string>(operation, "to"),
                     std::move(condition), field_as<int>(operation, "priority"));
  } else if (op == "remove_edge") {
    graph = remove_edge(graph, field_as<std::string>(operation, "from"), field_as<int>(operation, "priority"));
  } else if (op == "remove_node") {
    graph = remove_node(graph, field_as<std::string>(operation, "nodeId"));
  } else if (op == "set_label") {
    graph = set_label(graph, field_as<std::string>(operation, "nodeId"), optional_text(operation, "label"));
  } else {
    throw Error(ErrorCode::BadRequest, "unknown operation '" + op + "'");
  }
  auto result = commit_graph(std::move(module), std::move(graph));
  if (reused) ledger_event(json{{"op", "reuse"}, {"moduleId", *reused}, {"userId", userId}, {"at", epoch(now())}});
  return result;
}

CompositionView Service::replace_composition(std::string_view userId, std::string_view compositionId,
                                             int expectedVersion, CompositionGraph graph) {
  std::unique_lock lock(mutex_);
  auto module = owned_composition(userId, compositionId, expectedVersion);
  if (graph.compositionId != compositionId) {
    throw Error(ErrorCode::BadRequest, "graph compositionId does not match the addressed composition");
  }
  check_graph(graph);
  const auto before = load_graph(compositionId);
  std::set<std::string> had;
  for (const auto& n : before.nodes) had.insert(n.moduleRef);
  const Resolver resolver(*this);
  std::vector<std::string> reused;
  for (const auto& n : graph.nodes) {
    if (n.moduleRef == kStartModuleId) continue;
    const auto target = load_module(n.moduleRef);
    if (!visible(target, userId)) throw Error(ErrorCode::UnknownModule, "no module " + n.moduleRef);
    if (target.module.kind == ModuleKind::composite &&
        composition_contains(resolver, target.module.contentRef, compositionId)) {
      throw Error(ErrorCode::CyclicComposition, "module " + n.moduleRef + " contains this composition");
    }
    if (target.module.authorId != userId && !had.count(n.moduleRef)) reused.push_back(n.moduleRef);
  }
  auto result = commit_graph(std::move(module), std::move(graph));
  std::sort(reused.begin(), reused.end());
  reused.erase(std::unique(reused.begin(), reused.end()), reused.end());
  for (const auto& ref : reused) {
    ledger_event(json{{"op", "reuse"}, {"moduleId", ref}, {"userId", userId}, {"at", epoch(now())}});
  }
  return result;
}

analysis::ValidationReport Service::validate(std::string_view compositionId, std::string_view locale) const {
  std::shared_lock lock(mutex_);
  const Resolver resolver(*this);
  return analysis::validate_transitive(load_graph(compositionId), resolver, locale);
}

MergeOutcome Service::merge(std::string_view userId, std::string_view compositionId, std::string_view remixModuleId,
                            int expectedVersion) {
  std::unique_lock lock(mutex_);
  auto original = owned_composition(userId, compositionId, expectedVersion);
  const auto remixModule = load_module(remixModuleId);
  if (!visible(remixModule, userId)) throw Error(ErrorCode::UnknownModule, "no module " + std::string(remixModuleId));
  if (remixModule.module.parentId != original.module.moduleId || remixModule.module.kind != ModuleKind::composite) {
    throw Error(ErrorCode::UnrelatedHistories, "module " + std::string(remixModuleId) + " is not a remix of this composition");
  }
  const auto* lineage = ledger_.lineage(remixModuleId);
  const auto base_record = lineage ? store_->get(kHistory, history_key(compositionId, lineage->forkPointVersion))
                                   : std::nullopt;
  if (!base_record) throw Error(ErrorCode::UnrelatedHistories, "fork point of the remix is not in the history");

  MergeOutcome out;
  out.result = remix::merge(load_graph(compositionId), load_graph(remixModule.module.contentRef),
                            base_record->value.get<CompositionGraph>());
  out.version = original.module.version;
  if (!out.result.clean()) return out;

  auto committed = commit_graph(std::move(original), out.result.graph);
  out.applied = true;
  out.version = committed.module.module.version;
  out.result.graph = std::move(committed.graph);
  ledger_event(json{{"op", "merge"},
                    {"moduleId", committed.module.module.moduleId},
                    {"remixerId", remixModule.module.authorId},
                    {"at", epoch(now())}});
  return out;
}

ExportedPackage Service::export_composition(std::string_view userId, std::string_view compositionId) const {
  std::shared_lock lock(mutex_);
  auto r = store_->get(kCompositions, compositionId);
  if (!r) throw Error(ErrorCode::UnknownComposition, "no composition " + std::string(compositionId));
  const auto module = load_module(r->value.at("moduleId").get<std::string>());
  if (!visible(module, userId)) throw Error(ErrorCode::UnknownComposition, "no composition " + std::string(compositionId));
  const Resolver resolver(*this);
  auto result = h5p::export_composition(r->value.at("graph").get<CompositionGraph>(), resolver, resolver,
                                        module.module.title);
  return ExportedPackage{h5p::write_package(result.package), std::move(result.diagnostics)};
}

// ---------------------------------------------------------------------------
// Runs and reviews

session::SessionState Service::start_run(std::string_view userId, std::string_view compositionId) {
  std::unique_lock lock(mutex_);
  require_user(userId);
  auto r = store_->get(kCompositions, compositionId);
  if (!r) throw Error(ErrorCode::UnknownComposition, "no composition " + std::string(compositionId));
  if (!visible(load_module(r->value.at("moduleId").get<std::string>()), userId)) {
    throw Error(ErrorCode::UnknownComposition, "no composition " + std::string(compositionId));
  }
  const Resolver resolver(*this);
  auto state = session::start_session(r->value.at("graph").get<CompositionGraph>(), resolver, userId);
  const auto version = load_module(r->value.at("moduleId").get<std::string>()).module.version;
  store_->put(kRuns, state.sessionId, json{{"state", state}, {"graphVersion", version}});
  return state;
}

session::SessionState Service::submit_outcome(std::string_view userId, std::string_view runId, OutcomeRecord outcome) {
  std::unique_lock lock(mutex_);
  CompositionGraph graph;
  auto state = load_run(userId, runId, &graph);
  if (outcome.recordedAt == Timestamp{}) outcome.recordedAt = now();
  state = session::submit_outcome(state, graph, outcome);
  auto record = store_->get(kRuns, runId)->value;
  record["state"] = state;
  store_->put(kRuns, runId, record);

  if (state.status == session::Status::finished) {
    std::vector<sched::ReviewItem> items;
    if (auto existing = store_->get(kReviews, userId)) items = existing->value.get<std::vector<sched::ReviewItem>>();
    const auto tomorrow = std::chrono::floor<std::chrono::days>(outcome.recordedAt) + std::chrono::days{1};
    bool changed = false;
    for (const auto& entry : state.trace) {
      const auto* node = graph.find_node(entry.nodeId);
      if (!node || node->moduleRef == kStartModuleId) continue;
      const bool enrolled = std::any_of(items.begin(), items.end(),
                                        [&](const sched::ReviewItem& i) { return i.moduleRef == node->moduleRef; });
      if (enrolled) continue;
      items.push_back(sched::new_item(new_id(), node->moduleRef, tomorrow));
      changed = true;
    }
    if (changed) store_->put(kReviews, userId, items);
  }
  return state;
}

// Runs follow the graph version they were started on, even if the
// composition is edited meanwhile.
session::SessionState Service::load_run(std::string_view userId, std::string_view runId,
                                        CompositionGraph* graph) const {
  auto r = store_->get(kRuns, runId);
  if (!r) throw Error(ErrorCode::UnknownSession, "no run " + std::string(runId));
  auto state = r->value.at("state").get<session::SessionState>();
  if (state.userId != userId) throw Error(ErrorCode::Unauthorized, "run belongs to another user");
  if (graph) {
    *graph = store_->get(kHistory, history_key(state.compositionId, r->value.at("graphVersion").get<int>()))
                 ->value.get<CompositionGraph>();
  }
  return state;
}

session::SessionState Service::get_run(std::string_view userId, std::string_view runId) const {
  std::shared_lock lock(mutex_);
  return load_run(userId, runId, nullptr);
}

std::vector<sched::ReviewItem> Service::due_reviews(std::string_view userId, sched::Date today) const {
  std::shared_lock lock(mutex_);
  require_user(userId);
  auto r = store_->get(kReviews, userId);
  if (!r) return {};
  return sched::due_items(r->value.get<std::vector<sched::ReviewItem>>(), today);
}

sched::ReviewItem Service::record_review(std::string_view userId, std::string_view itemId, int grade,
                                         sched::Date today) {
  std::unique_lock lock(mutex_);
  auto r = store_->get(kReviews, userId);
  auto items = r ? r->value.get<std::vector<sched::ReviewItem>>() : std::vector<sched::ReviewItem>{};
  auto it = std::find_if(items.begin(), items.end(), [&](const sched::ReviewItem& i) { return i.itemId == itemId; });
  if (it == items.end()) throw Error(ErrorCode::UnknownReviewItem, "no review item " + std::string(itemId));
  *it = sched::review(*it, grade, today);
  const auto updated = *it;
  store_->put(kReviews, userId, items);
  return updated;
}

// ---------------------------------------------------------------------------
// Rewards and chat

remix::RewardsSummary Service::rewards(std::string_view userId) const {
  std::shared_lock lock(mutex_);
  require_user(userId);
  return ledger_.rewards_summary(userId);
}

ChatMessage Service::send_chat(std::string_view fromUser, std::string_view toUser, std::string_view templateId,
                               const std::map<std::string, std::string>& slots) {
  std::unique_lock lock(mutex_);
  require_user(fromUser);
  require_user(toUser);
  const auto* tpl = catalog_.find(templateId);
  if (!tpl) throw Error(ErrorCode::UnknownTemplate, "no chat template " + std::string(templateId));
  for (const auto& [slot, moduleId] : slots) {
    if (std::find(tpl->slots.begin(), tpl->slots.end(), slot) == tpl->slots.end()) {
      throw Error(ErrorCode::UnresolvedSlot, "template " + tpl->templateId + " has no slot '" + slot + "'");
    }
  }
  for (const auto& slot : tpl->slots) {
    auto it = slots.find(slot);
    if (it == slots.end()) throw Error(ErrorCode::UnresolvedSlot, "slot '" + slot + "' is not filled");
    auto r = store_->get(kModules, it->second);
    if (!r || !visible(Stored{r->value.at("module").get<ModuleDescriptor>(), r->value.at("published").get<bool>()},
                       fromUser)) {
      throw Error(ErrorCode::UnresolvedSlot, "slot '" + slot + "' names no module");
    }
  }
  ChatMessage m{new_id(), std::string(fromUser), std::string(toUser), tpl->templateId, slots, now()};
  store_->append(kChatStream, json(m));
  return m;
}

std::vector<RenderedMessage> Service::inbox(std::string_view userId) const {
  std::shared_lock lock(mutex_);
  require_user(userId);
  const auto locale = store_->get(kUsers, userId)->value.at("locale").get<std::string>();
  std::vector<RenderedMessage> out;
  for (const auto& e : store_->events(kChatStream)) {
    if (e.at("toUser") != userId) continue;
    ChatMessage m{e.at("messageId").get<std::string>(), e.at("fromUser").get<std::string>(),
                  e.at("toUser").get<std::string>(), e.at("templateId").get<std::string>(),
                  e.at("slots").get<std::map<std::string, std::string>>(), from_epoch(e.at("sentAt").get<std::int64_t>())};
    std::map<std::string, std::string> titles;
    for (const auto& [slot, moduleId] : m.slots) {
      auto r = store_->get(kModules, moduleId);
      titles[slot] = r ? r->value.at("module").at("title").get<std::string>() : moduleId;
    }
    auto text = catalog_.render(m.templateId, titles, locale);
    out.push_back(RenderedMessage{std::move(m), std::move(text)});
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON

std::string_view to_string(FavouriteKind kind) { return kind == FavouriteKind::module ? "module" : "avatar"; }

void to_json(json& j, const Avatar& a) {
  j = json{{"name", a.name}, {"species", a.species}, {"customization", a.customization}};
}

void from_json(const json& j, Avatar& a) {
  a.name = j.at("name").get<std::string>();
  a.species = std::string(kAvatarSpecies);
  a.customization = j.value("customization", std::map<std::string, std::string>{});
}

void to_json(json& j, const UserAccount& u) {
  j = json{{"userId", u.userId}, {"logonId", u.logonId}, {"email", nullptr}, {"locale", u.locale}, {"avatar", u.avatar}};
  if (u.email) j["email"] = *u.email;
}

void to_json(json& j, const Favourite& f) { j = json{{"kind", to_string(f.kind)}, {"id", f.id}}; }

void to_json(json& j, const ModuleView& m) {
  j = json(m.module);
  j["published"] = m.published;
  j["likes"] = m.likes;
}

void to_json(json& j, const SearchHit& h) {
  j = json(h.module);
  j["favourite"] = h.favourite;
}

void to_json(json& j, const CompositionView& c) {
  j = json{{"module", c.module}, {"graph", c.graph}, {"version", c.module.module.version}};
}

void to_json(json& j, const ChatMessage& m) {
  j = json{{"messageId", m.messageId}, {"fromUser", m.fromUser}, {"toUser", m.toUser},
           {"templateId", m.templateId}, {"slots", m.slots},       {"sentAt", epoch(m.sentAt)}};
}

void to_json(json& j, const RenderedMessage& m) {
  j = json(m.message);
  j["text"] = m.text;
}

void to_json(json& j, const MergeOutcome& m) {
  j = json{{"applied", m.applied}, {"version", m.version}, {"graph", m.result.graph}, {"conflicts", m.result.conflicts}};
}

}  // namespace canvas::service
