#include "canvas/service/http.hpp"

#include <httplib.h>

#include <iostream>

#include "canvas/condition.hpp"
#include "canvas/serialization.hpp"

namespace canvas::service {

using nlohmann::json;

namespace {

constexpr const char* kJson = "application/json";

struct Unauthenticated : std::runtime_error {
  Unauthenticated() : std::runtime_error("missing or unknown bearer token") {}
};

void send(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), kJson);
}

void send_error(httplib::Response& res, int status, std::string_view code, std::string_view message,
                json extra = json::object()) {
  extra["error"] = code;
  extra["message"] = message;
  send(res, status, extra);
}

json body_json(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  try {
    return json::parse(req.body);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::BadRequest, std::string("request body is not JSON: ") + e.what());
  }
}

template <typename T>
T required(const json& body, const char* key) {
  if (!body.is_object() || !body.contains(key)) throw Error(ErrorCode::BadRequest, std::string("missing field '") + key + "'");
  try {
    return body.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::BadRequest, std::string("field '") + key + "' has the wrong type");
  }
}

std::optional<std::string> optional_string(const json& body, const char* key) {
  if (!body.contains(key) || body.at(key).is_null()) return std::nullopt;
  return required<std::string>(body, key);
}

std::optional<std::string> query(const httplib::Request& req, const char* key) {
  if (!req.has_param(key)) return std::nullopt;
  return req.get_param_value(key);
}

int query_int(const httplib::Request& req, const char* key) {
  auto v = query(req, key);
  if (!v) throw Error(ErrorCode::BadRequest, std::string("missing query parameter '") + key + "'");
  try {
    return std::stoi(*v);
  } catch (const std::exception&) {
    throw Error(ErrorCode::BadRequest, std::string("query parameter '") + key + "' must be an integer");
  }
}

std::span<const std::uint8_t> raw_body(const httplib::Request& req) {
  return {reinterpret_cast<const std::uint8_t*>(req.body.data()), req.body.size()};
}

}  // namespace

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidCredentials:
      return 401;
    case ErrorCode::Unauthorized:
      return 403;
    case ErrorCode::UnknownComposition:
    case ErrorCode::UnknownModule:
    case ErrorCode::UnknownUser:
    case ErrorCode::UnknownTarget:
    case ErrorCode::UnknownSession:
    case ErrorCode::UnknownReviewItem:
      return 404;
    case ErrorCode::LogonIdTaken:
    case ErrorCode::VersionConflict:
    case ErrorCode::UnrelatedHistories:
    case ErrorCode::SessionNotActive:
    case ErrorCode::WrongNode:
    case ErrorCode::SessionNotFinished:
      return 409;
    case ErrorCode::ValidationErrorsPresent:
    case ErrorCode::ExportBlocked:
    case ErrorCode::MissingPackage:
      return 422;
    case ErrorCode::StoreFailure:
      return 500;
    default:
      return 400;
  }
}

struct HttpServer::Impl {
  Service& service;
  httplib::Server server;

  explicit Impl(Service& s) : service(s) { routes(); }

  std::string auth(const httplib::Request& req) const {
    auto header = req.get_header_value("Authorization");
    constexpr std::string_view prefix = "Bearer ";
    if (header.rfind(prefix, 0) != 0) throw Unauthenticated();
    auto user = service.user_for_token(header.substr(prefix.size()));
    if (!user) throw Unauthenticated();
    return *user;
  }

  std::string optional_auth(const httplib::Request& req) const {
    if (!req.has_header("Authorization")) return "";
    return auth(req);
  }

  using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

  static Handler guarded(Handler h) {
    return [h = std::move(h)](const httplib::Request& req, httplib::Response& res) {
      try {
        h(req, res);
      } catch (const Unauthenticated& e) {
        send_error(res, 401, "Unauthenticated", e.what());
      } catch (const h5p::H5pError& e) {
        send_error(res, http_status(e.code()), to_string(e.code()), e.what(), json{{"diagnostics", e.diagnostics()}});
      } catch (const Error& e) {
        send_error(res, http_status(e.code()), to_string(e.code()), e.what());
      } catch (const json::exception& e) {
        send_error(res, 400, "BadRequest", e.what());
      } catch (const std::exception& e) {
        std::cerr << "internal error on " << req.method << " " << req.path << ": " << e.what() << "\n";
        send_error(res, 500, "InternalError", "internal error");
      }
    };
  }

  void get(const std::string& pattern, Handler h) { server.Get(pattern, guarded(std::move(h))); }
  void post(const std::string& pattern, Handler h) { server.Post(pattern, guarded(std::move(h))); }
  void put(const std::string& pattern, Handler h) { server.Put(pattern, guarded(std::move(h))); }

  void routes() {
    get("/health", [](const httplib::Request&, httplib::Response& res) { send(res, 200, json{{"ok", true}}); });

    // -- accounts
    post("/users", [this](const httplib::Request& req, httplib::Response& res) {
      const auto body = body_json(req);
      RegisterRequest r;
      r.logonId = required<std::string>(body, "logonId");
      r.password = required<std::string>(body, "password");
      r.email = optional_string(body, "email");
      r.avatarName = optional_string(body, "avatarName");
      r.locale = optional_string(body, "locale").value_or("en");
      const auto reg = service.register_user(r);
      json out{{"user", reg.account}, {"notice", nullptr}};
      if (reg.notice) out["notice"] = *reg.notice;
      send(res, 201, out);
    });
    post("/login", [this](const httplib::Request& req, httplib::Response& res) {
      const auto body = body_json(req);
      const auto logon = required<std::string>(body, "logonId");
      const auto token = service.login(logon, required<std::string>(body, "password"));
      send(res, 200, json{{"token", token}, {"userId", *service.user_for_token(token)}});
    });
    post("/recover", [this](const httplib::Request& req, httplib::Response& res) {
      service.request_password_reset(required<std::string>(body_json(req), "logonId"));
      send(res, 202, json{{"ok", true}});
    });
    post("/recover/confirm", [this](const httplib::Request& req, httplib::Response& res) {
      const auto body = body_json(req);
      service.reset_password(required<std::string>(body, "token"), required<std::string>(body, "password"));
      send(res, 200, json{{"ok", true}});
    });
    get(R"(/users/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      send(res, 200, json(service.get_user(req.matches[1].str())));
    });
    get(R"(/users/([^/]+)/rewards)", [this](const httplib::Request& req, httplib::Response& res) {
      send(res, 200, json(service.rewards(req.matches[1].str())));
    });
    get(R"(/users/([^/]+)/favourites)", [this](const httplib::Request& req, httplib::Response& res) {
      const auto user = auth(req);
      if (user != req.matches[1].str()) throw Error(ErrorCode::Unauthorized, "favourites are private");
      send(res, 200, json(service.list_favourites(user)));
    });
    post(R"(/avatars/([^/]+)/favourite)", [this](const httplib::Request& req, httplib::Response& res) {
      const auto user = auth(req);
      service.favourite(user, Favourite{FavouriteKind::avatar, req.matches[1].str()});
      send(res, 200, json(service.list_favourites(user)));
    });

    // -- modules
    get("/modules", [this](const httplib::Request& req, httplib::Response& res) {
      send(res, 200, json(service.list_modules(optional_auth(req))));
    });
    post("/modules", [this](const httplib::Request& req, httplib::Response& res) {
      const auto user = auth(req);
      const auto body = body_json(req);
      const auto kind = optional_string(body, "kind").value_or("composite");
      if (kind != "composite") throw Error(ErrorCode::BadRequest, "atomic modules are created with POST /import");
      send(res, 201, json(service.create_composition(user, required<std::string>(body, "title"))));
    });
    get(R"(/modules/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      const auto user = optional_auth(req);
      const auto m = service.get_module(req.matches[1].str());
      if (!m.published && m.module.authorId != user) throw Error(ErrorCode::UnknownModule, "no module " + req.matches[1].str());
      send(res, 200, json(m));
    });
    put(R"(/modules/([^/]+)/package)", [this](const httplib::Request& req, httplib::Response& res) {
      const auto user = auth(req);
      send(res, 200, json(service.replace_package(user, req.matches[1].str(), query_int(req, "expectedVersion"),
                                                  raw_body(req))));
    });
    post(R"(/modules/([^/]+)/publish)", [this](const httplib::Request& req, httplib::Response& res) {
      send(res, 200, json(service.publish(auth(req), req.matches[1].str())));
    });
    post(R"(/modules/([^/]+)/derive)", [this](const httplib::Request& req, httplib::Response& res) {
      send(res, 201, json(service.derive(auth(req), req.matches[1].str())));
    });
    post(R"(/modules/([^/]+)/like)", [this](const httplib::Request& req, httplib::Response& res) {
      send(res, 200, json{{"likes", service.like(auth(req), req.matches[1].str())}});
    });
    post(R"(/modules/([^/]+)/favourite)", [this](const httplib::Request& req, httplib::Response& res) {
      const auto user = auth(req);
      service.favourite(user, Favourite{FavouriteKind::module, req.matches[1].str()});
      send(res, 200, json(service.list_favourites(user)));
    });
    get("/search", [this](const httplib::Request& req, httplib::Response& res) {
      const auto q = query(req, "q").value_or("");
      auto type = query(req, "type");
      if (type && type->empty()) type.reset();
      json results = service.search(q, type, optional_auth(req));
      // Existing modules always come before the "create new" affordance.
      results.push_back(json{{"createNew", true}, {"title", q}});
      send(res, 200, json{{"results", results}});
    });
    post("/import", [this](const httplib::Request& req, httplib::Response& res) {
      const auto user = auth(req);
      const auto result = service.import_package(user, raw_body(req), query(req, "title"), query(req, "type"));
      send(res, 201, json{{"module", result.module}, {"notices", result.notices}});
    });

    // -- compositions
    get(R"(/compositions/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      const auto user = optional_auth(req);
      const auto c = service.get_composition(req.matches[1].str());
      if (!c.module.published && c.module.module.authorId != user) {
        throw Error(ErrorCode::UnknownComposition, "no composition " + req.matches[1].str());
      }
      send(res, 200, json(c));
    });
    post(R"(/compositions/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      const auto user = auth(req);
      const auto body = body_json(req);
      send(res, 200, json(service.apply_operation(user, req.matches[1].str(), required<int>(body, "expectedVersion"), body)));
    });
    put(R"(/compositions/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      const auto user = auth(req);
      const auto body = body_json(req);
      const auto version = required<int>(body, "expectedVersion");
      if (!body.contains("graph")) throw Error(ErrorCode::BadRequest, "missing field 'graph'");
      send(res, 200, json(service.replace_composition(user, req.matches[1].str(), version,
                                                      body.at("graph").get<CompositionGraph>())));
    });
    post(R"(/compositions/([^/]+)/validate)", [this](const httplib::Request& req, httplib::Response& res) {
      const auto body = body_json(req);
      auto locale = query(req, "locale");
      if (!locale) locale = optional_string(body, "locale");
      send(res, 200, json(service.validate(req.matches[1].str(), locale.value_or("en"))));
    });
    post(R"(/compositions/([^/]+)/merge)", [this](const httplib::Request& req, httplib::Response& res) {
      const auto user = auth(req);
      const auto body = body_json(req);
      const auto outcome = service.merge(user, req.matches[1].str(), required<std::string>(body, "remixModuleId"),
                                         required<int>(body, "expectedVersion"));
      send(res, outcome.applied ? 200 : 409, json(outcome));
    });
    get(R"(/compositions/([^/]+)/export)", [this](const httplib::Request& req, httplib::Response& res) {
      const auto id = req.matches[1].str();
      const auto exported = service.export_composition(optional_auth(req), id);
      res.set_header("Content-Disposition", "attachment; filename=\"" + id + ".h5p\"");
      if (!exported.diagnostics.empty()) res.set_header("X-Export-Diagnostics", json(exported.diagnostics).dump());
      res.set_content(std::string(exported.archive.begin(), exported.archive.end()), "application/zip");
    });
    post("/conditions/parse", [](const httplib::Request& req, httplib::Response& res) {
      const auto result = cond::parse(required<std::string>(body_json(req), "source"));
      if (const auto* c = std::get_if<cond::Condition>(&result)) {
        send(res, 200, json{{"condition", cond::print(*c)}});
        return;
      }
      const auto& d = std::get<cond::ParseDiagnostic>(result);
      send_error(res, 400, "InvalidCondition", d.message,
                 json{{"line", d.line}, {"column", d.column}, {"expected", d.expected}});
    });

    // -- runs
    post("/runs", [this](const httplib::Request& req, httplib::Response& res) {
      const auto user = auth(req);
      send(res, 201, json(service.start_run(user, required<std::string>(body_json(req), "compositionId"))));
    });
    post(R"(/runs/([^/]+)/outcome)", [this](const httplib::Request& req, httplib::Response& res) {
      const auto user = auth(req);
      const auto id = req.matches[1].str();
      auto body = body_json(req);
      if (!body.is_object()) throw Error(ErrorCode::BadRequest, "outcome must be an object");
      if (!body.contains("nodeId")) body["nodeId"] = service.get_run(user, id).currentNode;
      send(res, 200, json(service.submit_outcome(user, id, body.get<OutcomeRecord>())));
    });
    get(R"(/runs/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      send(res, 200, json(service.get_run(auth(req), req.matches[1].str())));
    });
    get(R"(/runs/([^/]+)/trace)", [this](const httplib::Request& req, httplib::Response& res) {
      res.set_content(session::trace_jsonl(service.get_run(auth(req), req.matches[1].str())), "application/x-ndjson");
    });

    // -- reviews
    get("/reviews/due", [this](const httplib::Request& req, httplib::Response& res) {
      const auto user = auth(req);
      const auto today = query(req, "today");
      send(res, 200, json(service.due_reviews(user, today ? sched::parse_date(*today) : sched::today_utc())));
    });
    post(R"(/reviews/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      const auto user = auth(req);
      const auto body = body_json(req);
      const auto today = optional_string(body, "today");
      send(res, 200, json(service.record_review(user, req.matches[1].str(), required<int>(body, "grade"),
                                                today ? sched::parse_date(*today) : sched::today_utc())));
    });

    // -- chat
    post("/chat", [this](const httplib::Request& req, httplib::Response& res) {
      const auto user = auth(req);
      const auto body = body_json(req);
      // Only catalog references are accepted; anything else is rejected so
      // that no free text can ride along.
      for (const auto& [key, value] : body.items()) {
        if (key != "to" && key != "templateId" && key != "slots") {
          throw Error(ErrorCode::BadRequest, "unexpected field '" + key + "'");
        }
      }
      const auto slots = body.contains("slots") ? required<std::map<std::string, std::string>>(body, "slots")
                                                : std::map<std::string, std::string>{};
      const auto m = service.send_chat(user, required<std::string>(body, "to"),
                                       required<std::string>(body, "templateId"), slots);
      send(res, 201, json(m));
    });
    get("/chat/inbox", [this](const httplib::Request& req, httplib::Response& res) { send(res, 200, json(service.inbox(auth(req)))); });
  }
};

HttpServer::HttpServer(Service& service) : impl_(std::make_unique<Impl>(service)) {}
HttpServer::~HttpServer() = default;

bool HttpServer::listen(const std::string& host, int port) { return impl_->server.listen(host, port); }
int HttpServer::bind_to_any_port(const std::string& host) { return impl_->server.bind_to_any_port(host); }
bool HttpServer::listen_after_bind() { return impl_->server.listen_after_bind(); }
void HttpServer::wait_until_ready() const { impl_->server.wait_until_ready(); }
void HttpServer::stop() { impl_->server.stop(); }

}  // namespace canvas::service
