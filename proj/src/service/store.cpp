#include "canvas/service/store.hpp"

#include "canvas/error.hpp"

namespace canvas::service {

using nlohmann::json;

namespace {

const std::vector<json> kNoEvents;

void fail(const std::string& what) { throw Error(ErrorCode::StoreFailure, what); }

}  // namespace

Store::Store() = default;

Store::Store(std::filesystem::path directory, int snapshotEvery)
    : dir_(std::move(directory)), snapshotEvery_(snapshotEvery > 0 ? snapshotEvery : 1000) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) fail("cannot create store directory " + dir_.string() + ": " + ec.message());

  const auto snapshot = dir_ / "snapshot.json";
  if (std::filesystem::exists(snapshot)) {
    std::ifstream in(snapshot);
    json state;
    try {
      in >> state;
    } catch (const json::exception& e) {
      fail("corrupt snapshot " + snapshot.string() + ": " + e.what());
    }
    for (const auto& [name, records] : state.at("collections").items()) {
      auto& c = collections_[name];
      for (const auto& [key, r] : records.items()) c[key] = Record{r.at("version").get<std::int64_t>(), r.at("value")};
    }
    for (const auto& [name, events] : state.at("streams").items()) {
      streams_[name] = events.get<std::vector<json>>();
    }
  }

  const auto journal_path = dir_ / "journal.jsonl";
  if (std::filesystem::exists(journal_path)) {
    std::ifstream in(journal_path);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      json entry;
      try {
        entry = json::parse(line);
      } catch (const json::parse_error&) {
        if (in.peek() == std::char_traits<char>::eof()) break;  // torn tail
        fail("corrupt journal line in " + journal_path.string());
      }
      apply(entry);
      ++pending_;
    }
  }
  // Start every session from a clean snapshot so a torn tail never survives.
  compact();
}

std::optional<Store::Record> Store::get(std::string_view collection, std::string_view key) const {
  auto c = collections_.find(collection);
  if (c == collections_.end()) return std::nullopt;
  auto r = c->second.find(key);
  if (r == c->second.end()) return std::nullopt;
  return r->second;
}

std::vector<std::pair<std::string, Store::Record>> Store::list(std::string_view collection) const {
  std::vector<std::pair<std::string, Record>> out;
  auto c = collections_.find(collection);
  if (c == collections_.end()) return out;
  out.assign(c->second.begin(), c->second.end());
  return out;
}

std::int64_t Store::put(std::string_view collection, std::string_view key, json value,
                        std::optional<std::int64_t> expectedVersion) {
  const auto current = get(collection, key);
  const std::int64_t have = current ? current->version : 0;
  if (expectedVersion && *expectedVersion != have) {
    throw Error(ErrorCode::VersionConflict, std::string(collection) + "/" + std::string(key) + " is at version " +
                                                std::to_string(have) + ", expected " +
                                                std::to_string(*expectedVersion));
  }
  json entry{{"op", "put"}, {"c", collection}, {"k", key}, {"v", have + 1}, {"value", std::move(value)}};
  journal(entry);
  return have + 1;
}

void Store::erase(std::string_view collection, std::string_view key) {
  if (!get(collection, key)) return;
  journal(json{{"op", "del"}, {"c", collection}, {"k", key}});
}

void Store::append(std::string_view stream, json event) {
  journal(json{{"op", "event"}, {"s", stream}, {"e", std::move(event)}});
}

const std::vector<json>& Store::events(std::string_view stream) const {
  auto s = streams_.find(stream);
  return s == streams_.end() ? kNoEvents : s->second;
}

void Store::apply(const json& entry) {
  const auto op = entry.at("op").get<std::string>();
  if (op == "put") {
    collections_[entry.at("c").get<std::string>()][entry.at("k").get<std::string>()] =
        Record{entry.at("v").get<std::int64_t>(), entry.at("value")};
  } else if (op == "del") {
    auto c = collections_.find(entry.at("c").get<std::string>());
    if (c != collections_.end()) c->second.erase(entry.at("k").get<std::string>());
  } else if (op == "event") {
    streams_[entry.at("s").get<std::string>()].push_back(entry.at("e"));
  } else {
    fail("unknown journal op '" + op + "'");
  }
}

// Appends to the journal, then applies; compaction runs only once the
// entry is part of the in-memory state it snapshots.
void Store::journal(const json& entry) {
  if (dir_.empty()) {
    apply(entry);
    return;
  }
  if (!journal_.is_open()) {
    journal_.open(dir_ / "journal.jsonl", std::ios::app | std::ios::binary);
    if (!journal_) fail("cannot open journal in " + dir_.string());
  }
  journal_ << entry.dump() << '\n';
  journal_.flush();
  if (!journal_) fail("journal write failed in " + dir_.string());
  apply(entry);
  if (++pending_ >= snapshotEvery_) compact();
}

json Store::state_json() const {
  json collections = json::object();
  for (const auto& [name, records] : collections_) {
    json c = json::object();
    for (const auto& [key, r] : records) c[key] = json{{"version", r.version}, {"value", r.value}};
    collections[name] = std::move(c);
  }
  json streams = json::object();
  for (const auto& [name, events] : streams_) streams[name] = events;
  return json{{"collections", std::move(collections)}, {"streams", std::move(streams)}};
}

void Store::compact() {
  if (dir_.empty()) return;
  const auto tmp = dir_ / "snapshot.json.tmp";
  {
    std::ofstream out(tmp, std::ios::trunc | std::ios::binary);
    out << state_json().dump();
    out.flush();
    if (!out) fail("snapshot write failed in " + dir_.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, dir_ / "snapshot.json", ec);
  if (ec) fail("snapshot rename failed: " + ec.message());
  if (journal_.is_open()) journal_.close();
  journal_.open(dir_ / "journal.jsonl", std::ios::trunc | std::ios::binary);
  if (!journal_) fail("cannot reset journal in " + dir_.string());
  pending_ = 0;
}

}  // namespace canvas::service
