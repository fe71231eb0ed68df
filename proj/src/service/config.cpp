#include "canvas/service/config.hpp"

#include <cstdlib>
#include <fstream>

#include <json.hpp>

#include "canvas/error.hpp"

namespace canvas::service {

namespace {

std::optional<std::string> env(const char* name) {
  if (const char* v = std::getenv(name); v && *v) return std::string(v);
  return std::nullopt;
}

template <typename T>
T env_number(const char* name, T fallback) {
  auto v = env(name);
  if (!v) return fallback;
  try {
    return static_cast<T>(std::stoull(*v));
  } catch (const std::exception&) {
    throw Error(ErrorCode::BadRequest, std::string(name) + " must be a number");
  }
}

}  // namespace

ServiceConfig load_config(const std::optional<std::filesystem::path>& file) {
  ServiceConfig config;
  if (file) {
    std::ifstream in(*file);
    if (!in) throw Error(ErrorCode::BadRequest, "cannot open config file " + file->string());
    nlohmann::json j;
    try {
      in >> j;
      config.host = j.value("host", config.host);
      config.port = j.value("port", config.port);
      if (j.contains("storePath")) config.storePath = j.at("storePath").get<std::string>();
      if (j.contains("hash")) {
        config.hash.opslimit = j.at("hash").value("opslimit", config.hash.opslimit);
        config.hash.memlimit = j.at("hash").value("memlimit", config.hash.memlimit);
      }
      config.snapshotEvery = j.value("snapshotEvery", config.snapshotEvery);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::BadRequest, "invalid config file " + file->string() + ": " + e.what());
    }
  }
  if (auto v = env("CANVAS_HOST")) config.host = *v;
  config.port = env_number("CANVAS_PORT", config.port);
  if (auto v = env("CANVAS_STORE_PATH")) config.storePath = *v;
  config.hash.opslimit = env_number("CANVAS_HASH_OPSLIMIT", config.hash.opslimit);
  config.hash.memlimit = env_number("CANVAS_HASH_MEMLIMIT", config.hash.memlimit);
  config.snapshotEvery = env_number("CANVAS_SNAPSHOT_EVERY", config.snapshotEvery);
  return config;
}

}  // namespace canvas::service
