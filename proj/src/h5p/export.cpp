#include "canvas/h5p/export.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "canvas/analysis.hpp"
#include "canvas/serialization.hpp"

namespace canvas::h5p {

using nlohmann::json;

namespace {

constexpr int kMaxNesting = 64;

// Attaches to the single container H5P hands it and announces itself on the
// event dispatcher; flow interpretation happens in the hosting canvas app.
constexpr std::string_view kPlayerScript = R"js(var Canvas = Canvas || {};
Canvas.CompositionPlayer = (function (EventDispatcher) {
  function CompositionPlayer(params, contentId) {
    EventDispatcher.call(this);
    this.params = params;
    this.contentId = contentId;
  }
  CompositionPlayer.prototype = Object.create(EventDispatcher.prototype);
  CompositionPlayer.prototype.constructor = CompositionPlayer;
  CompositionPlayer.prototype.attach = function ($container) {
    $container.addClass('canvas-composition');
    this.trigger('canvas-composition-ready', {
      composition: this.params.composition,
      subContents: this.params.subContents
    });
  };
  return CompositionPlayer;
})(H5P.EventDispatcher);
)js";

SemanticsField text_field(std::string name, std::string label, bool optional = false) {
  SemanticsField f;
  f.name = std::move(name);
  f.type = FieldType::text;
  f.rawType = "text";
  f.label = std::move(label);
  f.optional = optional;
  return f;
}

SemanticsField group_field(std::string name, std::string label, std::vector<SemanticsField> fields) {
  SemanticsField f;
  f.name = std::move(name);
  f.type = FieldType::group;
  f.rawType = "group";
  f.label = std::move(label);
  f.fields = std::move(fields);
  return f;
}

SemanticsField list_field(std::string name, std::string label, std::string entity, SemanticsField item) {
  SemanticsField f;
  f.name = std::move(name);
  f.type = FieldType::list;
  f.rawType = "list";
  f.label = std::move(label);
  f.entity = std::move(entity);
  f.itemField.push_back(std::move(item));
  return f;
}

std::string sanitize_segment(std::string_view id) {
  std::string out;
  for (char c : id) {
    const bool ok = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-' ||
                    c == '_' || c == '.';
    out += ok ? c : '_';
  }
  if (out.empty() || out == "." || out == "..") out = "_" + out;
  return out;
}

void rewrite_paths(json& v, const std::set<std::string>& known, const std::string& prefix) {
  if (v.is_object()) {
    for (auto& [key, child] : v.items()) {
      if (key == "path" && child.is_string() && known.count(child.get<std::string>())) {
        child = prefix + child.get<std::string>();
      } else {
        rewrite_paths(child, known, prefix);
      }
    }
  } else if (v.is_array()) {
    for (auto& child : v) rewrite_paths(child, known, prefix);
  }
}

struct Assembly {
  std::map<std::string, LibraryDefinition> libraries;  // by machineName, highest version wins
  std::map<std::string, LibraryRef> dependencies;
  std::map<std::string, Bytes> assets;
  std::vector<Diagnostic> diagnostics;

  void add_library(const LibraryDefinition& lib, const std::map<std::string, Bytes>& source_assets) {
    auto it = libraries.find(lib.machineName);
    if (it != libraries.end()) {
      const auto& held = it->second;
      if (held.majorVersion != lib.majorVersion) {
        diagnostics.push_back({"VersionConflict", lib.machineName,
                               "major versions " + std::to_string(held.majorVersion) + " and " +
                                   std::to_string(lib.majorVersion) + " both requested; keeping the highest"});
      }
      if (std::tie(lib.majorVersion, lib.minorVersion, lib.patchVersion) <=
          std::tie(held.majorVersion, held.minorVersion, held.patchVersion))
        return;
      const std::string old_dir = held.ref().directory() + "/";
      std::erase_if(assets, [&](const auto& kv) { return kv.first.starts_with(old_dir); });
    }
    libraries.insert_or_assign(lib.machineName, lib);
    const std::string dir = lib.ref().directory() + "/";
    for (const auto& [path, data] : source_assets) {
      if (path.starts_with(dir)) assets.insert_or_assign(path, data);
    }
  }

  void add_dependency(const LibraryRef& ref) {
    auto it = dependencies.find(ref.machineName);
    if (it == dependencies.end()) {
      dependencies.emplace(ref.machineName, ref);
      return;
    }
    if (it->second.majorVersion != ref.majorVersion) {
      diagnostics.push_back({"VersionConflict", ref.machineName,
                             "dependency requested at " + it->second.to_string() + " and " + ref.to_string() +
                                 "; keeping the highest"});
    }
    if (std::tie(ref.majorVersion, ref.minorVersion) > std::tie(it->second.majorVersion, it->second.minorVersion))
      it->second = ref;
  }

  // Pulls a sub-package in under content/nodes/<folder>/ and returns its
  // params with media paths rewritten.
  json absorb(const H5pPackage& sub, const std::string& folder) {
    for (const auto& lib : sub.libraries) add_library(lib, sub.assets);
    for (const auto& ref : sub.manifest.preloadedDependencies) add_dependency(ref);
    std::set<std::string> content_assets;
    for (const auto& [path, data] : sub.assets) {
      if (!path.starts_with("content/")) continue;
      const std::string rest = path.substr(8);
      content_assets.insert(rest);
      assets.insert_or_assign("content/nodes/" + folder + "/" + rest, data);
    }
    json params = sub.content;
    rewrite_paths(params, content_assets, "nodes/" + folder + "/");
    return params;
  }
};

json build_content(const CompositionGraph& graph, const ModuleResolver& modules, const PackageResolver& packages,
                   Assembly& assembly, int depth) {
  if (depth > kMaxNesting) {
    throw Error(ErrorCode::ExportBlocked, "compositions nest deeper than " + std::to_string(kMaxNesting) + " levels");
  }
  const auto report = analysis::validate(graph, modules);
  if (!report.ok()) {
    throw Error(ErrorCode::ExportBlocked, "composition " + graph.compositionId + " has validation errors: " +
                                              report.errors.front().message);
  }

  CompositionGraph sorted = graph;
  canonicalize(sorted);
  json sub_contents = json::array();
  std::set<std::string> folders;
  for (const auto& node : sorted.nodes) {
    if (node.moduleRef == kStartModuleId) continue;
    const auto module = modules.find_module(node.moduleRef);
    if (!module) throw Error(ErrorCode::MissingPackage, "module " + node.moduleRef + " does not resolve");

    std::string folder = sanitize_segment(node.nodeId);
    while (!folders.insert(folder).second) folder += "_";

    json entry{{"nodeId", node.nodeId}, {"moduleRef", node.moduleRef}, {"title", module->title}};
    if (module->kind == ModuleKind::atomic) {
      const auto sub = packages.find_package(module->contentRef);
      if (!sub) throw Error(ErrorCode::MissingPackage, "no package for module " + module->moduleId);
      const auto* main = sub->main_library();
      if (!main) throw Error(ErrorCode::MissingPackage, "package for " + module->moduleId + " has no main library");
      entry["content"] = json{{"library", main->ref().to_string()},
                              {"params", assembly.absorb(*sub, folder)},
                              {"subContentId", node.nodeId}};
    } else {
      const auto nested = modules.find_composition(module->contentRef);
      if (!nested) throw Error(ErrorCode::MissingPackage, "no composition " + module->contentRef);
      // Nested content is assembled into its own package first so that its
      // content assets get re-rooted exactly like an atomic sub-package.
      Assembly inner;
      H5pPackage nested_pkg;
      nested_pkg.content = build_content(*nested, modules, packages, inner, depth + 1);
      nested_pkg.assets = inner.assets;
      for (auto& [name, lib] : inner.libraries) nested_pkg.libraries.push_back(lib);
      for (auto& [name, ref] : inner.dependencies) nested_pkg.manifest.preloadedDependencies.push_back(ref);
      for (auto& d : inner.diagnostics) assembly.diagnostics.push_back(std::move(d));
      const LibraryRef player{std::string(kPlayerLibrary), kPlayerMajor, kPlayerMinor};
      entry["content"] = json{{"library", player.to_string()},
                              {"params", assembly.absorb(nested_pkg, folder)},
                              {"subContentId", node.nodeId}};
    }
    sub_contents.push_back(std::move(entry));
  }
  return json{{"composition", json(sorted)}, {"subContents", std::move(sub_contents)}};
}

}  // namespace

LibraryDefinition player_library() {
  LibraryDefinition lib;
  lib.machineName = std::string(kPlayerLibrary);
  lib.title = "Canvas composition player";
  lib.majorVersion = kPlayerMajor;
  lib.minorVersion = kPlayerMinor;
  lib.patchVersion = 0;
  lib.runnable = true;
  lib.preloadedScriptAssets = {"dist/player.js"};
  lib.hasSemantics = true;

  SemanticsField priority;
  priority.name = "priority";
  priority.type = FieldType::number;
  priority.rawType = "number";
  priority.label = "Priority";
  priority.min = 0;

  auto node = group_field("node", "Node",
                          {text_field("nodeId", "Node id"), text_field("moduleRef", "Module"),
                           text_field("displayLabel", "Label", true)});
  auto flow = group_field("flow", "Flow",
                          {text_field("from", "From"), text_field("to", "To"),
                           text_field("condition", "Condition", true), priority});
  auto composition = group_field(
      "composition", "Composition",
      {text_field("compositionId", "Composition id"), text_field("startNodeId", "Start node"),
       list_field("nodes", "Nodes", "node", node), list_field("edges", "Flows", "flow", flow)});

  SemanticsField content;
  content.name = "content";
  content.type = FieldType::library;
  content.rawType = "library";
  content.label = "Content";
  auto sub = group_field("subContent", "Node content",
                         {text_field("nodeId", "Node id"), text_field("moduleRef", "Module"),
                          text_field("title", "Title"), content});
  lib.semantics = {composition, list_field("subContents", "Node contents", "node content", sub)};
  return lib;
}

ExportResult export_composition(const CompositionGraph& graph, const ModuleResolver& modules,
                                const PackageResolver& packages, std::string_view title) {
  Assembly assembly;
  ExportResult result;
  auto& p = result.package;
  p.content = build_content(graph, modules, packages, assembly, 0);

  const auto player = player_library();
  std::map<std::string, Bytes> player_assets{
      {player.ref().directory() + "/dist/player.js", Bytes(kPlayerScript.begin(), kPlayerScript.end())}};
  assembly.add_library(player, player_assets);

  p.manifest.title = title.empty() ? "Composition" : std::string(title);
  p.manifest.language = "und";
  p.manifest.mainLibrary = std::string(kPlayerLibrary);
  p.manifest.embedTypes = {"div"};
  p.manifest.license = "CC BY-SA";
  p.manifest.preloadedDependencies.push_back(player.ref());
  for (const auto& [name, ref] : assembly.dependencies) {
    if (name != kPlayerLibrary) p.manifest.preloadedDependencies.push_back(ref);
  }
  for (auto& [name, lib] : assembly.libraries) p.libraries.push_back(std::move(lib));
  std::sort(p.libraries.begin(), p.libraries.end(), [](const LibraryDefinition& a, const LibraryDefinition& b) {
    return std::tie(a.machineName, a.majorVersion, a.minorVersion) < std::tie(b.machineName, b.majorVersion, b.minorVersion);
  });
  p.assets = std::move(assembly.assets);
  result.diagnostics = std::move(assembly.diagnostics);

  if (auto problem = check_package(p)) throw H5pError(problem->code, std::move(problem->diagnostics));
  return result;
}

CompositionGraph extract_composition(const H5pPackage& package) {
  if (!package.content.is_object() || !package.content.contains("composition")) {
    throw Error(ErrorCode::InvalidPackage, "package content has no /composition document");
  }
  return package.content.at("composition").get<CompositionGraph>();
}

}  // namespace canvas::h5p
