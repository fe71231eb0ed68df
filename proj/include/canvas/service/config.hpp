#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "canvas/service/password.hpp"

namespace canvas::service {

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  // Empty means in-memory only (nothing persisted).
  std::filesystem::path storePath;
  HashParams hash;
  // Journal lines written before the store compacts into a snapshot.
  int snapshotEvery = 1000;
};

/// Reads a JSON config file (if given), then applies environment overrides:
/// CANVAS_HOST, CANVAS_PORT, CANVAS_STORE_PATH, CANVAS_HASH_OPSLIMIT,
/// CANVAS_HASH_MEMLIMIT, CANVAS_SNAPSHOT_EVERY.
ServiceConfig load_config(const std::optional<std::filesystem::path>& file);

}  // namespace canvas::service
