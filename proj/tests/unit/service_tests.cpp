#include <gtest/gtest.h>

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <thread>

#include <httplib.h>

#include "canvas/h5p/package.hpp"
#include "canvas/scheduler.hpp"
#include "canvas/serialization.hpp"
#include "canvas/service/chat.hpp"
#include "canvas/service/community.hpp"
#include "canvas/service/config.hpp"
#include "canvas/service/http.hpp"
#include "canvas/service/password.hpp"
#include "canvas/service/store.hpp"
#include "support/fixtures.hpp"

using namespace canvas;
using namespace canvas::service;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

template <typename F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::StoreFailure;
}

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("canvas-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

const sched::Date kToday = sched::parse_date("2024-05-01");

ServiceConfig fast_config(const std::string& storePath = "") {
  ServiceConfig c;
  c.hash = HashParams::minimal();
  c.storePath = storePath;
  return c;
}

Service::Clock fixed_clock() {
  return [] { return Timestamp{kToday} + std::chrono::hours{10}; };
}

RegisterRequest account(const std::string& logon, const std::string& locale = "en") {
  RegisterRequest r;
  r.logonId = logon;
  r.password = "correct horse";
  r.locale = locale;
  return r;
}

fixtures::Bytes quiz_bytes() { return h5p::write_package(fixtures::quiz_package()); }
fixtures::Bytes text_bytes() { return h5p::write_package(fixtures::text_package()); }

OutcomeRecord passed(const std::string& node) {
  OutcomeRecord o;
  o.nodeId = node;
  o.scorePercent = 90;
  o.completed = true;
  return o;
}

}  // namespace

// -- store

TEST(Store, VersionsAndConflicts) {
  Store s;
  EXPECT_EQ(s.put("c", "k", 1), 1);
  EXPECT_EQ(s.put("c", "k", 2), 2);
  EXPECT_EQ(code_of([&] { s.put("c", "k", 3, 1); }), ErrorCode::VersionConflict);
  EXPECT_EQ(code_of([&] { s.put("c", "k", 3, 0); }), ErrorCode::VersionConflict);
  EXPECT_EQ(s.put("c", "k", 3, 2), 3);
  EXPECT_EQ(s.put("c", "new", 1, 0), 1);
  s.erase("c", "k");
  EXPECT_FALSE(s.get("c", "k"));
  EXPECT_EQ(s.list("c").size(), 1u);
  EXPECT_TRUE(s.events("nothing").empty());
  EXPECT_FALSE(s.persistent());
}

TEST(Store, PersistsAcrossReopen) {
  TempDir dir;
  {
    Store s(dir.path, 3);
    for (int i = 0; i < 10; ++i) s.put("c", "k" + std::to_string(i), i);
    s.erase("c", "k0");
    s.append("log", json{{"n", 1}});
    s.append("log", json{{"n", 2}});
  }
  Store again(dir.path, 3);
  EXPECT_FALSE(again.get("c", "k0"));
  EXPECT_EQ(again.get("c", "k9")->value, 9);
  EXPECT_EQ(again.get("c", "k9")->version, 1);
  ASSERT_EQ(again.events("log").size(), 2u);
  EXPECT_EQ(again.events("log")[1].at("n"), 2);
}

TEST(Store, DiscardsTornJournalTail) {
  TempDir dir;
  {
    Store s(dir.path, 1000);
    s.put("c", "a", "first");
    s.put("c", "b", "second");
  }
  {
    // Opening compacts, so write a fresh journal with a torn last line.
    std::ofstream j(dir.path / "journal.jsonl", std::ios::app);
    j << R"({"op":"put","c":"c","k":"z","v":1,"value":"ok"})" << "\n" << R"({"op":"put","c":"c","k":"t)";
  }
  Store again(dir.path, 1000);
  EXPECT_EQ(again.get("c", "a")->value, "first");
  EXPECT_EQ(again.get("c", "z")->value, "ok");
  EXPECT_FALSE(again.get("c", "t"));
}

// -- passwords, config, chat catalog

TEST(Password, HashAndVerify) {
  const auto hash = hash_password("open sesame", HashParams::minimal());
  EXPECT_TRUE(verify_password(hash, "open sesame"));
  EXPECT_FALSE(verify_password(hash, "open sesamE"));
  EXPECT_NE(random_token(), random_token());
  EXPECT_EQ(base64_decode(base64_encode(std::string("\0\x01\xff", 3))), std::string("\0\x01\xff", 3));
}

TEST(Config, FileAndEnvironment) {
  TempDir dir;
  const auto file = dir.path / "canvas.json";
  std::ofstream(file) << R"({"host": "0.0.0.0", "port": 9000, "snapshotEvery": 5})";
  ::setenv("CANVAS_PORT", "9100", 1);
  const auto c = load_config(file.string());
  ::unsetenv("CANVAS_PORT");
  EXPECT_EQ(c.host, "0.0.0.0");
  EXPECT_EQ(c.port, 9100);
  EXPECT_EQ(c.snapshotEvery, 5);
}

TEST(Chat, RendersInLocale) {
  const auto catalog = ChatCatalog::builtin();
  const std::map<std::string, std::string> titles{{"module", "Quiz"}};
  EXPECT_EQ(catalog.render("T-SUGGEST", titles, "en"), "you should add [Quiz] to your composition!");
  EXPECT_EQ(catalog.render("T-SUGGEST", titles, "nb"), "du burde legge til [Quiz] i komposisjonen din!");
  EXPECT_EQ(catalog.render("T-LIKE", {}, "xx"), "I like this module!");
  EXPECT_EQ(code_of([&] { catalog.render("T-SUGGEST", {}, "en"); }), ErrorCode::UnresolvedSlot);
  EXPECT_EQ(code_of([&] { catalog.render("T-NOPE", {}, "en"); }), ErrorCode::UnknownTemplate);
}

// -- community service

TEST(Service, RegistrationRules) {
  Service svc(fast_config(), fixed_clock());
  const auto first = svc.register_user(account("otter1"));
  EXPECT_EQ(first.account.avatar.name, "otter1");
  EXPECT_EQ(first.account.avatar.species, "otter");
  EXPECT_FALSE(first.notice);
  EXPECT_EQ(code_of([&] { svc.register_user(account("otter1")); }), ErrorCode::LogonIdTaken);
  auto weak = account("weak");
  weak.password = "short";
  EXPECT_EQ(code_of([&] { svc.register_user(weak); }), ErrorCode::WeakPassword);
  auto same_name = account("otter2");
  same_name.avatarName = "otter1";
  EXPECT_TRUE(svc.register_user(same_name).notice);
  auto bad_locale = account("otter3", "tlh");
  EXPECT_EQ(code_of([&] { svc.register_user(bad_locale); }), ErrorCode::BadRequest);
  EXPECT_FALSE(json(first.account).contains("passwordHash"));
}

TEST(Service, LoginAndRecovery) {
  Service svc(fast_config(), fixed_clock());
  const auto id = svc.register_user(account("lutra")).account.userId;
  const auto token = svc.login("lutra", "correct horse");
  EXPECT_EQ(svc.user_for_token(token), id);
  EXPECT_EQ(code_of([&] { svc.login("lutra", "wrong horse"); }), ErrorCode::InvalidCredentials);
  EXPECT_EQ(code_of([&] { svc.login("nobody", "correct horse"); }), ErrorCode::InvalidCredentials);

  std::ostringstream captured;
  auto* old = std::clog.rdbuf(captured.rdbuf());
  svc.request_password_reset("lutra");
  svc.request_password_reset("nobody");
  std::clog.rdbuf(old);
  const auto text = captured.str();
  const auto recovery = text.substr(text.rfind(' ') + 1, text.find('\n') - text.rfind(' ') - 1);
  svc.reset_password(recovery, "battery staple");
  EXPECT_NO_THROW(svc.login("lutra", "battery staple"));
  EXPECT_EQ(code_of([&] { svc.reset_password(recovery, "battery staple"); }), ErrorCode::InvalidCredentials);
}

TEST(Service, ImportVisibilityAndSearch) {
  Service svc(fast_config(), fixed_clock());
  const auto alice = svc.register_user(account("alice")).account.userId;
  const auto bob = svc.register_user(account("bob")).account.userId;
  const auto quiz = svc.import_package(alice, quiz_bytes()).module;
  EXPECT_EQ(quiz.module.title, "Otter quiz");
  EXPECT_EQ(quiz.module.contentType, "quiz");
  EXPECT_FALSE(quiz.published);
  EXPECT_EQ(svc.list_modules(bob).size(), 0u);
  EXPECT_EQ(svc.list_modules(alice).size(), 1u);
  EXPECT_TRUE(svc.search("otter", std::nullopt, bob).empty());
  svc.publish(alice, quiz.module.moduleId);
  EXPECT_EQ(svc.search("OTTER", std::string("quiz"), bob).size(), 1u);
  EXPECT_TRUE(svc.search("otter", std::string("video"), bob).empty());
  EXPECT_EQ(svc.search("otter", std::string("atomic"), bob).size(), 1u);
  EXPECT_EQ(code_of([&] { svc.import_package(alice, fixtures::bytes("junk")); }), ErrorCode::NotAnArchive);
  EXPECT_EQ(code_of([&] { svc.publish(bob, quiz.module.moduleId); }), ErrorCode::Unauthorized);
}

TEST(Service, LikesAndFavourites) {
  Service svc(fast_config(), fixed_clock());
  const auto alice = svc.register_user(account("alice")).account.userId;
  const auto bob = svc.register_user(account("bob")).account.userId;
  const auto id = svc.import_package(alice, quiz_bytes()).module.module.moduleId;
  svc.publish(alice, id);
  EXPECT_EQ(svc.like(bob, id), 1);
  EXPECT_EQ(svc.like(bob, id), 1);
  svc.favourite(bob, Favourite{FavouriteKind::module, id});
  svc.favourite(bob, Favourite{FavouriteKind::module, id});
  svc.favourite(bob, Favourite{FavouriteKind::avatar, alice});
  EXPECT_EQ(svc.list_favourites(bob).size(), 2u);
  EXPECT_EQ(code_of([&] { svc.favourite(bob, Favourite{FavouriteKind::module, "missing"}); }), ErrorCode::UnknownTarget);
  EXPECT_TRUE(svc.search("quiz", std::nullopt, bob).at(0).favourite);
}

TEST(Service, ChatOnlyFromCatalog) {
  Service svc(fast_config(), fixed_clock());
  const auto alice = svc.register_user(account("alice")).account.userId;
  const auto bob = svc.register_user(account("bob", "nb")).account.userId;
  auto pkg = fixtures::quiz_package();
  const auto id = svc.import_package(alice, h5p::write_package(pkg), std::string("Quiz")).module.module.moduleId;
  EXPECT_EQ(code_of([&] { svc.send_chat(alice, bob, "T-FREE", {}); }), ErrorCode::UnknownTemplate);
  EXPECT_EQ(code_of([&] { svc.send_chat(alice, bob, "T-SUGGEST", {}); }), ErrorCode::UnresolvedSlot);
  EXPECT_EQ(code_of([&] { svc.send_chat(alice, bob, "T-LIKE", {{"module", id}}); }), ErrorCode::UnresolvedSlot);
  // Unpublished modules are only visible to their author, who may share them.
  svc.send_chat(alice, bob, "T-SUGGEST", {{"module", id}});
  EXPECT_EQ(code_of([&] { svc.send_chat(bob, alice, "T-CHECKOUT", {{"module", id}}); }), ErrorCode::UnresolvedSlot);
  svc.send_chat(bob, alice, "T-THANKS", {});
  const auto bobs = svc.inbox(bob);
  ASSERT_EQ(bobs.size(), 1u);
  EXPECT_EQ(bobs[0].text, "du burde legge til [Quiz] i komposisjonen din!");
  const auto alices = svc.inbox(alice);
  ASSERT_EQ(alices.size(), 1u);
  EXPECT_EQ(alices[0].text, "Thank you!");
}

namespace {

struct Authoring {
  Service svc{fast_config(), fixed_clock()};
  std::string alice, bob, video, text, quiz;

  Authoring() {
    alice = svc.register_user(account("alice")).account.userId;
    bob = svc.register_user(account("bob")).account.userId;
    video = svc.import_package(alice, h5p::write_package(fixtures::video_package())).module.module.moduleId;
    text = svc.import_package(alice, text_bytes()).module.module.moduleId;
    quiz = svc.import_package(bob, quiz_bytes()).module.module.moduleId;
    for (const auto& [user, id] : {std::pair{alice, video}, {alice, text}, {bob, quiz}}) svc.publish(user, id);
  }

  CompositionView op(const std::string& user, const CompositionView& c, json body) {
    return svc.apply_operation(user, c.graph.compositionId, c.module.module.version, body);
  }
};

}  // namespace

TEST(Service, EditPublishAndRun) {
  Authoring a;
  auto c = a.svc.create_composition(a.alice, "Rivers");
  EXPECT_EQ(c.module.module.version, 1);
  c = a.op(a.alice, c, {{"op", "add_node"}, {"moduleRef", a.video}, {"nodeId", "watch"}});
  c = a.op(a.alice, c, {{"op", "add_node"}, {"moduleRef", a.quiz}, {"nodeId", "test"}});
  EXPECT_EQ(a.svc.rewards(a.bob).totalPoints, remix::points_for(remix::EventKind::PassiveReused));
  const auto stale = c.module.module.version - 1;
  EXPECT_EQ(code_of([&] { a.svc.apply_operation(a.alice, c.graph.compositionId, stale, {{"op", "remove_node"}, {"nodeId", "test"}}); }),
            ErrorCode::VersionConflict);
  EXPECT_EQ(code_of([&] { a.op(a.bob, c, {{"op", "remove_node"}, {"nodeId", "test"}}); }), ErrorCode::Unauthorized);
  c = a.op(a.alice, c, {{"op", "add_edge"}, {"from", "start"}, {"to", "watch"}, {"condition", "completed"}, {"priority", 0}});
  EXPECT_EQ(code_of([&] { a.svc.publish(a.alice, c.module.module.moduleId); }), ErrorCode::ValidationErrorsPresent);
  c = a.op(a.alice, c, {{"op", "remove_edge"}, {"from", "start"}, {"priority", 0}});
  c = a.op(a.alice, c, {{"op", "add_edge"}, {"from", "start"}, {"to", "watch"}, {"priority", 0}});
  c = a.op(a.alice, c, {{"op", "add_edge"}, {"from", "watch"}, {"to", "test"}, {"priority", 0}});
  EXPECT_TRUE(a.svc.validate(c.graph.compositionId, "en").ok());
  a.svc.publish(a.alice, c.module.module.moduleId);

  auto run = a.svc.start_run(a.bob, c.graph.compositionId);
  for (const char* node : {"start", "watch", "test"}) run = a.svc.submit_outcome(a.bob, run.sessionId, passed(node));
  EXPECT_EQ(run.status, session::Status::finished);
  EXPECT_EQ(a.svc.get_run(a.bob, run.sessionId), run);
  EXPECT_EQ(code_of([&] { a.svc.get_run(a.alice, run.sessionId); }), ErrorCode::Unauthorized);
  EXPECT_TRUE(a.svc.due_reviews(a.bob, kToday).empty());
  const auto due = a.svc.due_reviews(a.bob, kToday + std::chrono::days{1});
  ASSERT_EQ(due.size(), 2u);
  const auto reviewed = a.svc.record_review(a.bob, due[0].itemId, 5, kToday + std::chrono::days{1});
  EXPECT_EQ(reviewed.intervalDays, 1.0);
  EXPECT_EQ(a.svc.due_reviews(a.bob, kToday + std::chrono::days{1}).size(), 1u);

  const auto exported = a.svc.export_composition(a.bob, c.graph.compositionId);
  EXPECT_EQ(h5p::extract_composition(h5p::read_package(exported.archive)), c.graph);
}

TEST(Service, DeriveAndMergeBack) {
  Authoring a;
  auto c = a.svc.create_composition(a.alice, "Rivers");
  c = a.op(a.alice, c, {{"op", "add_node"}, {"moduleRef", a.video}, {"nodeId", "watch"}});
  c = a.op(a.alice, c, {{"op", "add_edge"}, {"from", "start"}, {"to", "watch"}, {"priority", 0}});
  const auto original = c.module.module.moduleId;
  EXPECT_EQ(code_of([&] { a.svc.derive(a.bob, original); }), ErrorCode::UnknownModule);
  a.svc.publish(a.alice, original);

  const auto remix_module = a.svc.derive(a.bob, original);
  EXPECT_EQ(remix_module.module.parentId, original);
  auto remixed = a.svc.get_composition(remix_module.module.contentRef);
  EXPECT_NE(remixed.graph.compositionId, c.graph.compositionId);
  remixed = a.op(a.bob, remixed, {{"op", "add_node"}, {"moduleRef", a.quiz}, {"nodeId", "test"}});
  remixed = a.op(a.bob, remixed, {{"op", "add_edge"}, {"from", "watch"}, {"to", "test"}, {"priority", 0}});
  a.svc.publish(a.bob, remix_module.module.moduleId);
  EXPECT_EQ(a.svc.rewards(a.bob).totalPoints, remix::points_for(remix::EventKind::ActiveRemix));

  // Alice edits her copy meanwhile; the edits do not overlap.
  c = a.svc.get_composition(c.graph.compositionId);
  c = a.op(a.alice, c, {{"op", "set_label"}, {"nodeId", "watch"}, {"label", "Watch first"}});

  EXPECT_EQ(code_of([&] { a.svc.merge(a.alice, c.graph.compositionId, a.quiz, c.module.module.version); }),
            ErrorCode::UnrelatedHistories);
  const auto merged = a.svc.merge(a.alice, c.graph.compositionId, remix_module.module.moduleId, c.module.module.version);
  ASSERT_TRUE(merged.applied);
  EXPECT_TRUE(merged.result.graph.has_node("test"));
  EXPECT_EQ(merged.result.graph.find_node("watch")->displayLabel, "Watch first");
  EXPECT_EQ(merged.version, c.module.module.version + 1);
  EXPECT_EQ(a.svc.rewards(a.bob).totalPoints, remix::points_for(remix::EventKind::ActiveRemix) +
                                                  remix::points_for(remix::EventKind::MergeAccepted));
}

TEST(Service, ConflictingMergeIsNotApplied) {
  Authoring a;
  auto c = a.svc.create_composition(a.alice, "Rivers");
  c = a.op(a.alice, c, {{"op", "add_node"}, {"moduleRef", a.video}, {"nodeId", "watch"}});
  c = a.op(a.alice, c, {{"op", "add_edge"}, {"from", "start"}, {"to", "watch"}, {"priority", 0}});
  a.svc.publish(a.alice, c.module.module.moduleId);
  const auto remix_module = a.svc.derive(a.bob, c.module.module.moduleId);
  auto remixed = a.svc.get_composition(remix_module.module.contentRef);
  a.op(a.bob, remixed, {{"op", "set_label"}, {"nodeId", "watch"}, {"label", "bob"}});
  // A draft remix is invisible to the original's author.
  EXPECT_EQ(code_of([&] { a.svc.merge(a.alice, c.graph.compositionId, remix_module.module.moduleId, c.module.module.version); }),
            ErrorCode::UnknownModule);
  a.svc.publish(a.bob, remix_module.module.moduleId);
  c = a.op(a.alice, c, {{"op", "set_label"}, {"nodeId", "watch"}, {"label", "alice"}});
  const auto merged = a.svc.merge(a.alice, c.graph.compositionId, remix_module.module.moduleId, c.module.module.version);
  EXPECT_FALSE(merged.applied);
  ASSERT_EQ(merged.result.conflicts.size(), 1u);
  EXPECT_EQ(merged.result.conflicts[0].path, "watch.displayLabel");
  EXPECT_EQ(a.svc.get_composition(c.graph.compositionId).module.module.version, c.module.module.version);
}

TEST(Service, StateSurvivesRestart) {
  TempDir dir;
  std::string alice, module;
  {
    Service svc(fast_config(dir.path.string()), fixed_clock());
    alice = svc.register_user(account("alice")).account.userId;
    module = svc.import_package(alice, quiz_bytes()).module.module.moduleId;
    svc.publish(alice, module);
    const auto bob = svc.register_user(account("bob")).account.userId;
    svc.like(bob, module);
    const auto derived = svc.derive(bob, module);
    svc.publish(bob, derived.module.moduleId);
  }
  Service svc(fast_config(dir.path.string()), fixed_clock());
  EXPECT_EQ(svc.user_for_logon("alice"), alice);
  EXPECT_NO_THROW(svc.login("alice", "correct horse"));
  EXPECT_EQ(svc.like_count(module), 1);
  EXPECT_EQ(svc.rewards(alice).totalPoints, remix::points_for(remix::EventKind::PassiveReused));
}

// -- HTTP

namespace {

struct Server {
  Service svc{fast_config(), fixed_clock()};
  HttpServer http{svc};
  std::thread thread;
  int port = 0;

  Server() {
    port = http.bind_to_any_port("127.0.0.1");
    thread = std::thread([this] { http.listen_after_bind(); });
    http.wait_until_ready();
  }
  ~Server() {
    http.stop();
    thread.join();
  }
};

httplib::Headers bearer(const std::string& token) { return {{"Authorization", "Bearer " + token}}; }

}  // namespace

TEST(Http, StatusMapping) {
  EXPECT_EQ(http_status(ErrorCode::InvalidCredentials), 401);
  EXPECT_EQ(http_status(ErrorCode::Unauthorized), 403);
  EXPECT_EQ(http_status(ErrorCode::UnknownModule), 404);
  EXPECT_EQ(http_status(ErrorCode::VersionConflict), 409);
  EXPECT_EQ(http_status(ErrorCode::ValidationErrorsPresent), 422);
  EXPECT_EQ(http_status(ErrorCode::WeakPassword), 400);
}

TEST(Http, EndToEnd) {
  Server server;
  httplib::Client cli("127.0.0.1", server.port);
  ASSERT_EQ(cli.Get("/health")->status, 200);

  auto res = cli.Post("/users", R"({"logonId":"alice","password":"correct horse"})", "application/json");
  ASSERT_EQ(res->status, 201);
  const auto alice = json::parse(res->body).at("user").at("userId").get<std::string>();
  EXPECT_EQ(cli.Post("/users", R"({"logonId":"alice","password":"correct horse"})", "application/json")->status, 409);
  EXPECT_EQ(cli.Post("/login", R"({"logonId":"alice","password":"nope nope"})", "application/json")->status, 401);
  res = cli.Post("/login", R"({"logonId":"alice","password":"correct horse"})", "application/json");
  ASSERT_EQ(res->status, 200);
  const auto token = json::parse(res->body).at("token").get<std::string>();

  EXPECT_EQ(cli.Post("/modules", R"({"title":"Rivers"})", "application/json")->status, 401);
  const auto archive = quiz_bytes();
  res = cli.Post("/import?title=Quiz", bearer(token), std::string(archive.begin(), archive.end()), "application/zip");
  ASSERT_EQ(res->status, 201) << res->body;
  const auto quiz = json::parse(res->body).at("module").at("moduleId").get<std::string>();
  EXPECT_EQ(cli.Post("/modules/" + quiz + "/publish", bearer(token), "", "application/json")->status, 200);

  res = cli.Post("/modules", bearer(token), R"({"title":"Rivers"})", "application/json");
  ASSERT_EQ(res->status, 201);
  auto view = json::parse(res->body);
  const auto comp = view.at("graph").at("compositionId").get<std::string>();
  const auto module = view.at("module").at("moduleId").get<std::string>();
  json op{{"op", "add_node"}, {"moduleRef", quiz}, {"nodeId", "q"}, {"expectedVersion", 1}};
  res = cli.Post("/compositions/" + comp, bearer(token), op.dump(), "application/json");
  ASSERT_EQ(res->status, 200) << res->body;
  EXPECT_EQ(cli.Post("/compositions/" + comp, bearer(token), op.dump(), "application/json")->status, 409);
  op = {{"op", "add_edge"}, {"from", "start"}, {"to", "q"}, {"condition", "completed"}, {"priority", 0}, {"expectedVersion", 2}};
  ASSERT_EQ(cli.Post("/compositions/" + comp, bearer(token), op.dump(), "application/json")->status, 200);
  res = cli.Post("/compositions/" + comp + "/validate?locale=nb", "", "application/json");
  ASSERT_EQ(res->status, 200);
  EXPECT_FALSE(json::parse(res->body).at("errors").empty());
  EXPECT_EQ(cli.Post("/modules/" + module + "/publish", bearer(token), "", "application/json")->status, 422);

  op = {{"op", "add_edge"}, {"from", "start"}, {"to", "q"}, {"priority", 1}, {"expectedVersion", 3}};
  ASSERT_EQ(cli.Post("/compositions/" + comp, bearer(token), op.dump(), "application/json")->status, 200);
  res = cli.Get("/compositions/" + comp + "/export", bearer(token));
  ASSERT_EQ(res->status, 200);
  EXPECT_EQ(res->get_header_value("Content-Type"), "application/zip");

  res = cli.Get("/search?q=qu");
  ASSERT_EQ(res->status, 200);
  const auto results = json::parse(res->body).at("results");
  ASSERT_EQ(results.size(), 2u);
  EXPECT_TRUE(results.back().at("createNew").get<bool>());

  res = cli.Post("/conditions/parse", R"({"source":"score >= "})", "application/json");
  EXPECT_EQ(res->status, 400);
  EXPECT_EQ(json::parse(res->body).at("column"), 10);

  res = cli.Post("/chat", bearer(token), json{{"to", alice}, {"templateId", "T-LIKE"}, {"text", "hi"}}.dump(),
                 "application/json");
  EXPECT_EQ(res->status, 400);
  EXPECT_EQ(json::parse(res->body).at("error"), "BadRequest");
  res = cli.Get("/users/" + alice + "/rewards");
  EXPECT_EQ(res->status, 200);
  EXPECT_EQ(cli.Get("/users/nobody")->status, 404);
}
