#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

namespace canvas::service {

/// Embedded key-value store. Records live in named collections and carry a
/// version that increments on every write; named event streams are
/// append-only. With a directory, every mutation is appended to
/// journal.jsonl and the state is periodically compacted into
/// snapshot.json; opening replays snapshot then journal. A torn final
/// journal line (crash mid-write) is discarded.
///
/// Single writer: the store does no locking of its own.
class Store {
 public:
  struct Record {
    std::int64_t version = 0;
    nlohmann::json value;
  };

  /// In-memory store.
  Store();
  explicit Store(std::filesystem::path directory, int snapshotEvery = 1000);

  std::optional<Record> get(std::string_view collection, std::string_view key) const;
  std::vector<std::pair<std::string, Record>> list(std::string_view collection) const;

  /// Writes a record and returns its new version. With `expectedVersion`
  /// the write only happens if the stored version matches (0 = must not
  /// exist); otherwise VersionConflict.
  std::int64_t put(std::string_view collection, std::string_view key, nlohmann::json value,
                   std::optional<std::int64_t> expectedVersion = std::nullopt);
  void erase(std::string_view collection, std::string_view key);

  void append(std::string_view stream, nlohmann::json event);
  const std::vector<nlohmann::json>& events(std::string_view stream) const;

  /// Writes a snapshot and truncates the journal.
  void compact();
  bool persistent() const { return !dir_.empty(); }

 private:
  void apply(const nlohmann::json& entry);
  void journal(const nlohmann::json& entry);
  nlohmann::json state_json() const;

  using Collection = std::map<std::string, Record, std::less<>>;
  std::map<std::string, Collection, std::less<>> collections_;
  std::map<std::string, std::vector<nlohmann::json>, std::less<>> streams_;
  std::filesystem::path dir_;
  std::ofstream journal_;
  int snapshotEvery_ = 1000;
  int pending_ = 0;
};

}  // namespace canvas::service
