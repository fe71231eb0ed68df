#include <csignal>
#include <fstream>
#include <iostream>
#include <iterator>

#include <CLI11.hpp>
#include <json.hpp>

#include "canvas/analysis.hpp"
#include "canvas/h5p/export.hpp"
#include "canvas/serialization.hpp"
#include "canvas/service/community.hpp"
#include "canvas/service/config.hpp"
#include "canvas/service/http.hpp"

using namespace canvas;
using nlohmann::json;

namespace {

service::HttpServer* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

h5p::Bytes read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::BadRequest, "cannot open " + path);
  return h5p::Bytes(std::istreambuf_iterator<char>(in), {});
}

void write_file(const std::string& path, const h5p::Bytes& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (!out) throw Error(ErrorCode::StoreFailure, "cannot write " + path);
}

service::ServiceConfig config_for(const std::string& configFile, const std::string& store) {
  auto config = service::load_config(configFile.empty() ? std::nullopt : std::optional<std::filesystem::path>(configFile));
  if (!store.empty()) config.storePath = store;
  return config;
}

json package_summary(const h5p::H5pPackage& p) {
  json libs = json::array();
  for (const auto& lib : p.libraries) {
    libs.push_back(json{{"library", lib.ref().to_string()},
                        {"patch", lib.patchVersion},
                        {"runnable", lib.runnable},
                        {"semanticsFields", lib.semantics.size()}});
  }
  json out{{"title", p.manifest.title},
           {"mainLibrary", p.manifest.mainLibrary},
           {"language", p.manifest.language},
           {"license", p.manifest.license},
           {"libraries", libs},
           {"assets", p.assets.size()}};
  if (p.content.is_object() && p.content.contains("composition")) {
    out["composition"] = h5p::extract_composition(p);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Composable e-learning canvas: service and package tools"};
  app.require_subcommand(1);
  std::string configFile, store;
  app.add_option("-c,--config", configFile, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("-s,--store", store, "Store directory (overrides config and environment)");

  auto* serve = app.add_subcommand("serve", "Run the HTTP API");
  std::optional<int> port;
  std::string host;
  serve->add_option("-p,--port", port, "Port to listen on");
  serve->add_option("--host", host, "Address to bind");

  auto* import = app.add_subcommand("import", "Check an .h5p package, optionally storing it as a module");
  std::string importFile, owner, title;
  import->add_option("file", importFile, ".h5p archive")->required()->check(CLI::ExistingFile);
  import->add_option("--owner", owner, "Logon id of the author; stores the package in the store");
  import->add_option("--title", title, "Module title (defaults to the manifest title)");

  auto* exportCmd = app.add_subcommand("export", "Export a stored composition as .h5p");
  std::string compositionId, output;
  exportCmd->add_option("compositionId", compositionId)->required();
  exportCmd->add_option("-o,--output", output, "Output file")->required();

  auto* validate = app.add_subcommand("validate", "Validate a composition (graph JSON file or stored id)");
  std::string target, locale = "en";
  validate->add_option("target", target, "Path to graph JSON, or a composition id in the store")->required();
  validate->add_option("--locale", locale, "Message locale");

  auto* inspect = app.add_subcommand("inspect", "Print a summary of an .h5p package");
  std::string inspectFile;
  inspect->add_option("file", inspectFile)->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*serve) {
      auto config = config_for(configFile, store);
      if (port) config.port = *port;
      if (!host.empty()) config.host = host;
      service::Service svc(config);
      service::HttpServer server(svc);
      g_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::clog << "listening on " << config.host << ":" << config.port
                << (config.storePath.empty() ? " (in-memory store)" : " store " + config.storePath.string()) << "\n";
      if (!server.listen(config.host, config.port)) {
        std::cerr << "cannot listen on " << config.host << ":" << config.port << "\n";
        return 1;
      }
      return 0;
    }

    if (*import) {
      const auto bytes = read_file(importFile);
      if (owner.empty()) {
        std::vector<h5p::Diagnostic> notices;
        const auto package = h5p::read_package(bytes, &notices);
        auto out = package_summary(package);
        out["notices"] = notices;
        std::cout << out.dump(2) << "\n";
        return 0;
      }
      const auto config = config_for(configFile, store);
      if (config.storePath.empty()) throw Error(ErrorCode::BadRequest, "--owner needs a store (--store or CANVAS_STORE_PATH)");
      service::Service svc(config);
      const auto user = svc.user_for_logon(owner);
      if (!user) throw Error(ErrorCode::UnknownUser, "no user with logon id " + owner);
      const auto result = svc.import_package(*user, bytes, title.empty() ? std::nullopt : std::optional(title));
      std::cout << json{{"module", result.module}, {"notices", result.notices}}.dump(2) << "\n";
      return 0;
    }

    if (*exportCmd) {
      const auto config = config_for(configFile, store);
      if (config.storePath.empty()) throw Error(ErrorCode::BadRequest, "export needs a store (--store or CANVAS_STORE_PATH)");
      service::Service svc(config);
      const auto c = svc.get_composition(compositionId);
      const auto exported = svc.export_composition(c.module.module.authorId, compositionId);
      for (const auto& d : exported.diagnostics) std::cerr << "warning: " << h5p::to_string(d) << "\n";
      write_file(output, exported.archive);
      std::cout << "wrote " << output << " (" << exported.archive.size() << " bytes)\n";
      return 0;
    }

    if (*validate) {
      analysis::ValidationReport report;
      if (std::filesystem::is_regular_file(target)) {
        std::ifstream in(target);
        json j;
        in >> j;
        // A bare graph only knows its own modules; use a store to resolve
        // references to stored modules.
        const auto graph = j.contains("graph") ? j.at("graph").get<CompositionGraph>() : j.get<CompositionGraph>();
        const auto config = config_for(configFile, store);
        if (config.storePath.empty()) {
          InMemoryRegistry registry;
          if (j.contains("modules")) {
            for (const auto& m : j.at("modules")) registry.put_module(m.get<ModuleDescriptor>());
          }
          report = analysis::validate(graph, registry, locale);
        } else {
          service::Service svc(config);
          InMemoryRegistry registry;
          for (const auto& m : svc.list_modules("")) registry.put_module(m.module);
          report = analysis::validate(graph, registry, locale);
        }
      } else {
        const auto config = config_for(configFile, store);
        if (config.storePath.empty()) throw Error(ErrorCode::BadRequest, target + " is not a file and no store is configured");
        service::Service svc(config);
        report = svc.validate(target, locale);
      }
      std::cout << json(report).dump(2) << "\n";
      return report.ok() ? 0 : 2;
    }

    if (*inspect) {
      std::vector<h5p::Diagnostic> notices;
      const auto package = h5p::read_package(read_file(inspectFile), &notices);
      auto out = package_summary(package);
      out["notices"] = notices;
      std::cout << out.dump(2) << "\n";
      return 0;
    }
  } catch (const h5p::H5pError& e) {
    std::cerr << to_string(e.code()) << ": " << e.what() << "\n";
    for (const auto& d : e.diagnostics()) std::cerr << "  " << h5p::to_string(d) << "\n";
    return 1;
  } catch (const Error& e) {
    std::cerr << to_string(e.code()) << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
