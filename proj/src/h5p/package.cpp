#include "canvas/h5p/package.hpp"

#include <algorithm>
#include <charconv>
#include <set>

#include "canvas/h5p/semantics.hpp"

namespace canvas::h5p {

using nlohmann::json;

namespace {

constexpr std::string_view kManifestPath = "h5p.json";
constexpr std::string_view kContentPath = "content/content.json";

std::string first_path(const std::vector<Diagnostic>& d) {
  if (d.empty()) return "";
  return d.front().path.empty() ? d.front().message : d.front().path + ": " + d.front().message;
}

bool valid_machine_name(std::string_view name) {
  if (name.empty()) return false;
  return std::all_of(name.begin(), name.end(), [](char c) {
    return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '.' || c == '-';
  });
}

bool valid_relative_path(std::string_view path) {
  if (path.empty() || path.front() == '/' || path.find('\\') != std::string_view::npos) return false;
  std::size_t start = 0;
  while (start <= path.size()) {
    const auto end = std::min(path.find('/', start), path.size());
    const auto segment = path.substr(start, end - start);
    if (segment == ".." || segment == "." || segment.empty()) return false;
    start = end + 1;
  }
  return true;
}

Bytes string_to_bytes(const std::string& s) { return Bytes(s.begin(), s.end()); }

std::optional<json> parse_json(const Bytes& data) {
  try {
    return json::parse(data.begin(), data.end());
  } catch (const json::parse_error&) {
    return std::nullopt;
  }
}

// Field readers appending to a diagnostic list instead of throwing, so a
// malformed manifest reports every bad field at once.
struct FieldReader {
  const json& object;
  std::string path;
  std::vector<Diagnostic>& out;
  const char* code;

  template <typename T>
  std::optional<T> get(const char* key, bool required) {
    if (!object.contains(key)) {
      if (required) out.push_back({code, path + "#/" + key, std::string("missing field '") + key + "'"});
      return std::nullopt;
    }
    try {
      return object.at(key).get<T>();
    } catch (const json::exception&) {
      out.push_back({code, path + "#/" + key, std::string("field '") + key + "' has the wrong type"});
      return std::nullopt;
    }
  }
};

std::vector<LibraryRef> read_refs(const json& object, const char* key, const std::string& path,
                                  std::vector<Diagnostic>& out, bool required) {
  std::vector<LibraryRef> refs;
  if (!object.contains(key)) {
    if (required) out.push_back({"MalformedManifest", path + "#/" + key, std::string("missing field '") + key + "'"});
    return refs;
  }
  const auto& list = object.at(key);
  if (!list.is_array()) {
    out.push_back({"MalformedManifest", path + "#/" + key, "dependencies must be an array"});
    return refs;
  }
  for (std::size_t i = 0; i < list.size(); ++i) {
    const std::string here = path + "#/" + key + "/" + std::to_string(i);
    if (!list[i].is_object()) {
      out.push_back({"MalformedManifest", here, "dependency must be an object"});
      continue;
    }
    FieldReader r{list[i], here, out, "MalformedManifest"};
    auto name = r.get<std::string>("machineName", true);
    auto major = r.get<int>("majorVersion", true);
    auto minor = r.get<int>("minorVersion", true);
    if (name && major && minor) refs.push_back(LibraryRef{*name, *major, *minor});
  }
  return refs;
}

json refs_to_json(const std::vector<LibraryRef>& refs) {
  json out = json::array();
  for (const auto& r : refs) {
    out.push_back(json{{"machineName", r.machineName}, {"majorVersion", r.majorVersion}, {"minorVersion", r.minorVersion}});
  }
  return out;
}

json merge_extra(json base, const json& extra) {
  for (const auto& [k, v] : extra.items()) {
    if (!base.contains(k)) base[k] = v;
  }
  return base;
}

H5pManifest parse_manifest(const json& j, std::vector<Diagnostic>& out) {
  H5pManifest m;
  const std::string path(kManifestPath);
  if (!j.is_object()) {
    out.push_back({"MalformedManifest", path, "manifest must be a JSON object"});
    return m;
  }
  FieldReader r{j, path, out, "MalformedManifest"};
  m.title = r.get<std::string>("title", true).value_or("");
  m.language = r.get<std::string>("language", false).value_or("und");
  m.mainLibrary = r.get<std::string>("mainLibrary", true).value_or("");
  m.embedTypes = r.get<std::vector<std::string>>("embedTypes", false).value_or(std::vector<std::string>{"div"});
  m.license = r.get<std::string>("license", false).value_or("");
  m.preloadedDependencies = read_refs(j, "preloadedDependencies", path, out, true);
  for (const auto& [k, v] : j.items()) {
    if (k != "title" && k != "language" && k != "mainLibrary" && k != "embedTypes" && k != "license" &&
        k != "preloadedDependencies")
      m.extra[k] = v;
  }
  return m;
}

std::vector<std::string> read_asset_list(const json& j, const char* key, const std::string& path,
                                         std::vector<Diagnostic>& out) {
  std::vector<std::string> paths;
  if (!j.contains(key)) return paths;
  const auto& list = j.at(key);
  if (!list.is_array()) {
    out.push_back({"MalformedManifest", path + "#/" + key, "asset list must be an array"});
    return paths;
  }
  for (const auto& item : list) {
    if (item.is_object() && item.contains("path") && item.at("path").is_string()) {
      paths.push_back(item.at("path").get<std::string>());
    } else {
      out.push_back({"MalformedManifest", path + "#/" + key, "asset entries need a string 'path'"});
    }
  }
  return paths;
}

LibraryDefinition parse_library(const json& j, const std::string& path, std::vector<Diagnostic>& out) {
  LibraryDefinition lib;
  if (!j.is_object()) {
    out.push_back({"MalformedManifest", path, "library.json must be a JSON object"});
    return lib;
  }
  FieldReader r{j, path, out, "MalformedManifest"};
  lib.title = r.get<std::string>("title", true).value_or("");
  lib.machineName = r.get<std::string>("machineName", true).value_or("");
  lib.majorVersion = r.get<int>("majorVersion", true).value_or(0);
  lib.minorVersion = r.get<int>("minorVersion", true).value_or(0);
  lib.patchVersion = r.get<int>("patchVersion", true).value_or(0);
  if (j.contains("runnable")) {
    const auto& v = j.at("runnable");
    if (v.is_boolean()) {
      lib.runnable = v.get<bool>();
    } else if (v.is_number_integer()) {
      lib.runnable = v.get<int>() != 0;
    } else {
      out.push_back({"MalformedManifest", path + "#/runnable", "runnable must be 0, 1 or a boolean"});
    }
  }
  lib.preloadedScriptAssets = read_asset_list(j, "preloadedJs", path, out);
  lib.preloadedStyleAssets = read_asset_list(j, "preloadedCss", path, out);
  lib.preloadedDependencies = read_refs(j, "preloadedDependencies", path, out, false);
  for (const auto& [k, v] : j.items()) {
    if (k != "title" && k != "machineName" && k != "majorVersion" && k != "minorVersion" &&
        k != "patchVersion" && k != "runnable" && k != "preloadedJs" && k != "preloadedCss" &&
        k != "preloadedDependencies")
      lib.extra[k] = v;
  }
  return lib;
}

std::optional<FieldType> field_type_from(std::string_view s) {
  static constexpr std::pair<std::string_view, FieldType> kTypes[] = {
      {"text", FieldType::text},     {"number", FieldType::number}, {"boolean", FieldType::boolean},
      {"group", FieldType::group},   {"list", FieldType::list},     {"select", FieldType::select},
      {"library", FieldType::library}, {"image", FieldType::image}, {"video", FieldType::video},
      {"audio", FieldType::audio}};
  for (const auto& [name, type] : kTypes) {
    if (name == s) return type;
  }
  return std::nullopt;
}

SemanticsField parse_field(const json& j, const std::string& path, std::vector<Diagnostic>& out) {
  SemanticsField f;
  if (!j.is_object()) {
    out.push_back({"SemanticsViolation", path, "semantics field must be an object"});
    return f;
  }
  if (!j.contains("name") || !j.at("name").is_string()) {
    out.push_back({"SemanticsViolation", path, "semantics field needs a string 'name'"});
  } else {
    f.name = j.at("name").get<std::string>();
  }
  const std::string here = path.substr(0, path.rfind('/') + 1) + f.name;
  if (!j.contains("type") || !j.at("type").is_string()) {
    out.push_back({"SemanticsViolation", here, "semantics field needs a string 'type'"});
  } else {
    f.rawType = j.at("type").get<std::string>();
    f.type = field_type_from(f.rawType).value_or(FieldType::other);
  }
  for (const auto& [k, v] : j.items()) {
    if (k == "name" || k == "type") continue;
    if (k == "label" && v.is_string()) {
      f.label = v.get<std::string>();
    } else if (k == "optional" && v.is_boolean()) {
      f.optional = v.get<bool>();
    } else if (k == "default") {
      f.defaultValue = v;
    } else if (k == "entity" && v.is_string()) {
      f.entity = v.get<std::string>();
    } else if (k == "field" && v.is_object()) {
      f.itemField.push_back(parse_field(v, here + "/field", out));
    } else if (k == "fields" && v.is_array()) {
      for (std::size_t i = 0; i < v.size(); ++i) {
        const auto& child = v[i];
        const std::string child_name =
            child.is_object() && child.contains("name") && child.at("name").is_string()
                ? child.at("name").get<std::string>()
                : std::to_string(i);
        f.fields.push_back(parse_field(child, here + "/" + child_name, out));
      }
    } else if ((k == "min" || k == "max") && v.is_number()) {
      (k == "min" ? f.min : f.max) = v.get<double>();
    } else if (k == "options" && v.is_array()) {
      f.options = v.get<std::vector<json>>();
    } else {
      f.extra[k] = v;
    }
  }
  return f;
}

std::string library_dir_of(std::string_view path) {
  const auto slash = path.find('/');
  return slash == std::string_view::npos ? std::string{} : std::string(path.substr(0, slash));
}

}  // namespace

void to_json(json& j, const Diagnostic& d) { j = json{{"code", d.code}, {"path", d.path}, {"message", d.message}}; }

std::string to_string(const Diagnostic& d) {
  return d.code + " at " + (d.path.empty() ? "/" : d.path) + ": " + d.message;
}

H5pError::H5pError(ErrorCode code, std::vector<Diagnostic> diagnostics)
    : Error(code, std::string(canvas::to_string(code)) + ": " + first_path(diagnostics)),
      diagnostics_(std::move(diagnostics)) {}

std::string LibraryRef::to_string() const {
  return machineName + " " + std::to_string(majorVersion) + "." + std::to_string(minorVersion);
}

std::string LibraryRef::directory() const {
  return machineName + "-" + std::to_string(majorVersion) + "." + std::to_string(minorVersion);
}

std::optional<LibraryRef> parse_library_string(std::string_view text) {
  const auto space = text.rfind(' ');
  if (space == std::string_view::npos || space == 0) return std::nullopt;
  const auto version = text.substr(space + 1);
  const auto dot = version.find('.');
  if (dot == std::string_view::npos) return std::nullopt;
  LibraryRef ref;
  ref.machineName = std::string(text.substr(0, space));
  auto parse_int = [](std::string_view s, int& out) {
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size() && out >= 0;
  };
  if (!valid_machine_name(ref.machineName) || !parse_int(version.substr(0, dot), ref.majorVersion) ||
      !parse_int(version.substr(dot + 1), ref.minorVersion))
    return std::nullopt;
  return ref;
}

std::string_view to_string(FieldType type) {
  switch (type) {
    case FieldType::text: return "text";
    case FieldType::number: return "number";
    case FieldType::boolean: return "boolean";
    case FieldType::group: return "group";
    case FieldType::list: return "list";
    case FieldType::select: return "select";
    case FieldType::library: return "library";
    case FieldType::image: return "image";
    case FieldType::video: return "video";
    case FieldType::audio: return "audio";
    case FieldType::other: return "other";
  }
  return "other";
}

const LibraryDefinition* H5pPackage::find_library(std::string_view machineName) const {
  const LibraryDefinition* best = nullptr;
  for (const auto& lib : libraries) {
    if (lib.machineName != machineName) continue;
    if (!best || std::tie(lib.majorVersion, lib.minorVersion) > std::tie(best->majorVersion, best->minorVersion))
      best = &lib;
  }
  return best;
}

const LibraryDefinition* H5pPackage::main_library() const {
  for (const auto& ref : manifest.preloadedDependencies) {
    if (ref.machineName != manifest.mainLibrary) continue;
    for (const auto& lib : libraries) {
      if (satisfies(lib, ref)) return &lib;
    }
  }
  return find_library(manifest.mainLibrary);
}

bool satisfies(const LibraryDefinition& lib, const LibraryRef& ref) {
  return lib.machineName == ref.machineName &&
         std::tie(lib.majorVersion, lib.minorVersion) >= std::tie(ref.majorVersion, ref.minorVersion);
}

json field_to_json(const SemanticsField& f) {
  json j{{"name", f.name}, {"type", f.type == FieldType::other ? f.rawType : std::string(to_string(f.type))}};
  if (!f.label.empty()) j["label"] = f.label;
  if (f.optional) j["optional"] = true;
  if (f.defaultValue) j["default"] = *f.defaultValue;
  if (!f.entity.empty()) j["entity"] = f.entity;
  if (!f.itemField.empty()) j["field"] = field_to_json(f.itemField.front());
  if (f.type == FieldType::group || !f.fields.empty()) j["fields"] = semantics_to_json(f.fields);
  if (f.min) j["min"] = *f.min;
  if (f.max) j["max"] = *f.max;
  if (!f.options.empty()) j["options"] = f.options;
  return merge_extra(std::move(j), f.extra);
}

json semantics_to_json(const std::vector<SemanticsField>& fields) {
  json out = json::array();
  for (const auto& f : fields) out.push_back(field_to_json(f));
  return out;
}

std::vector<SemanticsField> semantics_from_json(const json& j, const std::string& path,
                                                std::vector<Diagnostic>& diagnostics) {
  std::vector<SemanticsField> fields;
  if (!j.is_array()) {
    diagnostics.push_back({"SemanticsViolation", path, "semantics must be an array of fields"});
    return fields;
  }
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string name = j[i].is_object() && j[i].contains("name") && j[i].at("name").is_string()
                                 ? j[i].at("name").get<std::string>()
                                 : std::to_string(i);
    fields.push_back(parse_field(j[i], path + "/" + name, diagnostics));
  }
  return fields;
}

json manifest_to_json(const H5pManifest& m) {
  json j{{"title", m.title},
         {"language", m.language},
         {"mainLibrary", m.mainLibrary},
         {"embedTypes", m.embedTypes},
         {"preloadedDependencies", refs_to_json(m.preloadedDependencies)}};
  if (!m.license.empty()) j["license"] = m.license;
  return merge_extra(std::move(j), m.extra);
}

json library_to_json(const LibraryDefinition& lib) {
  json j{{"title", lib.title},
         {"machineName", lib.machineName},
         {"majorVersion", lib.majorVersion},
         {"minorVersion", lib.minorVersion},
         {"patchVersion", lib.patchVersion},
         {"runnable", lib.runnable ? 1 : 0}};
  auto assets = [](const std::vector<std::string>& paths) {
    json out = json::array();
    for (const auto& p : paths) out.push_back(json{{"path", p}});
    return out;
  };
  if (!lib.preloadedScriptAssets.empty()) j["preloadedJs"] = assets(lib.preloadedScriptAssets);
  if (!lib.preloadedStyleAssets.empty()) j["preloadedCss"] = assets(lib.preloadedStyleAssets);
  if (!lib.preloadedDependencies.empty()) j["preloadedDependencies"] = refs_to_json(lib.preloadedDependencies);
  return merge_extra(std::move(j), lib.extra);
}

std::optional<PackageCheck> check_package(const H5pPackage& p) {
  std::vector<Diagnostic> manifest, dangling, semantics, structure;
  const std::string mpath(kManifestPath);

  if (p.manifest.title.empty()) manifest.push_back({"MalformedManifest", mpath + "#/title", "title is empty"});
  if (p.manifest.mainLibrary.empty()) {
    manifest.push_back({"MalformedManifest", mpath + "#/mainLibrary", "mainLibrary is empty"});
  } else if (std::none_of(p.manifest.preloadedDependencies.begin(), p.manifest.preloadedDependencies.end(),
                          [&](const LibraryRef& r) { return r.machineName == p.manifest.mainLibrary; })) {
    manifest.push_back({"MalformedManifest", mpath + "#/mainLibrary",
                        "mainLibrary " + p.manifest.mainLibrary + " is not listed in preloadedDependencies"});
  }
  auto check_refs = [&](const std::vector<LibraryRef>& refs, const std::string& where) {
    for (const auto& ref : refs) {
      if (ref.majorVersion < 0 || ref.minorVersion < 0) {
        manifest.push_back({"MalformedManifest", where, "negative version for " + ref.machineName});
        continue;
      }
      const bool found = std::any_of(p.libraries.begin(), p.libraries.end(),
                                     [&](const LibraryDefinition& lib) { return satisfies(lib, ref); });
      if (!found) dangling.push_back({"DanglingDependency", where, ref.to_string() + " is not in the package"});
    }
  };
  check_refs(p.manifest.preloadedDependencies, mpath + "#/preloadedDependencies");

  std::set<std::string> library_dirs;
  for (const auto& lib : p.libraries) {
    const std::string dir = lib.ref().directory();
    const std::string lpath = dir + "/library.json";
    if (!library_dirs.insert(dir).second)
      manifest.push_back({"MalformedManifest", lpath, "library " + lib.ref().to_string() + " appears twice"});
    if (!valid_machine_name(lib.machineName))
      manifest.push_back({"MalformedManifest", lpath + "#/machineName", "invalid machine name '" + lib.machineName + "'"});
    if (lib.majorVersion < 0 || lib.minorVersion < 0 || lib.patchVersion < 0)
      manifest.push_back({"MalformedManifest", lpath, "versions must be non-negative"});
    for (const auto* list : {&lib.preloadedScriptAssets, &lib.preloadedStyleAssets}) {
      for (const auto& asset : *list) {
        if (!valid_relative_path(asset))
          manifest.push_back({"MalformedManifest", lpath, "asset path '" + asset + "' must be archive-relative without '..'"});
      }
    }
    check_refs(lib.preloadedDependencies, lpath + "#/preloadedDependencies");
    for (auto& d : validate_semantics(lib.semantics)) {
      semantics.push_back({"SemanticsViolation", dir + "/semantics.json#" + d.path, d.message});
    }
  }

  if (const auto* main = p.main_library(); main && main->hasSemantics) {
    for (auto& d : validate_content(p.content, main->semantics)) {
      semantics.push_back({"SemanticsViolation", std::string(kContentPath) + "#" + d.path, d.code + ": " + d.message});
    }
  } else if (!p.content.is_object()) {
    semantics.push_back({"SemanticsViolation", std::string(kContentPath), "content document must be an object"});
  }

  for (const auto& [path, data] : p.assets) {
    if (!valid_relative_path(path)) {
      structure.push_back({"InvalidPackage", path, "asset path must be archive-relative without '..'"});
      continue;
    }
    const bool reserved = path == kManifestPath || path == kContentPath ||
                          (library_dirs.count(library_dir_of(path)) &&
                           (path.ends_with("/library.json") || path.ends_with("/semantics.json")) &&
                           std::count(path.begin(), path.end(), '/') == 1);
    if (reserved) structure.push_back({"InvalidPackage", path, "asset collides with a package document"});
  }

  if (!manifest.empty()) return PackageCheck{ErrorCode::MalformedManifest, std::move(manifest)};
  if (!dangling.empty()) return PackageCheck{ErrorCode::DanglingDependency, std::move(dangling)};
  if (!semantics.empty()) return PackageCheck{ErrorCode::SemanticsViolation, std::move(semantics)};
  if (!structure.empty()) return PackageCheck{ErrorCode::InvalidPackage, std::move(structure)};
  return std::nullopt;
}

H5pPackage read_package(std::span<const std::uint8_t> archive, std::vector<Diagnostic>* notices) {
  std::map<std::string, Bytes> files;
  for (auto& entry : zip::read(archive)) {
    if (!valid_relative_path(entry.path)) {
      throw H5pError(ErrorCode::InvalidPackage,
                     {{"InvalidPackage", entry.path, "archive path must be relative without '..'"}});
    }
    files.insert_or_assign(std::move(entry.path), std::move(entry.data));
  }

  auto manifest_it = files.find(std::string(kManifestPath));
  if (manifest_it == files.end()) {
    throw H5pError(ErrorCode::MissingManifest, {{"MissingManifest", std::string(kManifestPath), "h5p.json is absent"}});
  }

  std::vector<Diagnostic> malformed;
  std::vector<Diagnostic> semantics_diags;
  H5pPackage p;
  if (auto j = parse_json(manifest_it->second)) {
    p.manifest = parse_manifest(*j, malformed);
  } else {
    malformed.push_back({"MalformedManifest", std::string(kManifestPath), "not valid JSON"});
  }
  files.erase(manifest_it);

  auto content_it = files.find(std::string(kContentPath));
  if (content_it == files.end()) {
    throw H5pError(ErrorCode::InvalidPackage, {{"InvalidPackage", std::string(kContentPath), "content document is absent"}});
  }
  if (auto j = parse_json(content_it->second)) {
    p.content = std::move(*j);
  } else {
    throw H5pError(ErrorCode::InvalidPackage, {{"InvalidPackage", std::string(kContentPath), "not valid JSON"}});
  }
  files.erase(content_it);

  std::vector<std::string> library_files;
  for (const auto& [path, data] : files) {
    if (path.ends_with("/library.json") && std::count(path.begin(), path.end(), '/') == 1) library_files.push_back(path);
  }
  for (const auto& path : library_files) {
    const std::string dir = library_dir_of(path);
    LibraryDefinition lib;
    if (auto j = parse_json(files.at(path))) {
      lib = parse_library(*j, path, malformed);
    } else {
      malformed.push_back({"MalformedManifest", path, "not valid JSON"});
    }
    files.erase(path);
    const std::string sem_path = dir + "/semantics.json";
    if (auto it = files.find(sem_path); it != files.end()) {
      lib.hasSemantics = true;
      if (auto j = parse_json(it->second)) {
        lib.semantics = semantics_from_json(*j, sem_path + "#", semantics_diags);
      } else {
        semantics_diags.push_back({"SemanticsViolation", sem_path, "not valid JSON"});
      }
      files.erase(it);
    }
    if (notices && !lib.machineName.empty() && dir != lib.ref().directory()) {
      notices->push_back({"DirectoryName", path, "directory " + dir + " does not match " + lib.ref().directory()});
    }
    if (notices) {
      std::vector<const SemanticsField*> stack;
      for (const auto& f : lib.semantics) stack.push_back(&f);
      while (!stack.empty()) {
        const auto* f = stack.back();
        stack.pop_back();
        if (f->type == FieldType::other)
          notices->push_back({"UnknownFieldType", sem_path, "field '" + f->name + "' has unmodelled type '" + f->rawType + "'"});
        for (const auto& c : f->fields) stack.push_back(&c);
        for (const auto& c : f->itemField) stack.push_back(&c);
      }
    }
    // Library assets keep their original archive path but are re-rooted to
    // the canonical directory name when it differs.
    if (!lib.machineName.empty() && dir != lib.ref().directory()) {
      std::map<std::string, Bytes> moved;
      for (auto it = files.begin(); it != files.end();) {
        if (library_dir_of(it->first) == dir) {
          moved.emplace(lib.ref().directory() + it->first.substr(dir.size()), std::move(it->second));
          it = files.erase(it);
        } else {
          ++it;
        }
      }
      files.merge(moved);
    }
    p.libraries.push_back(std::move(lib));
  }
  if (!malformed.empty()) throw H5pError(ErrorCode::MalformedManifest, std::move(malformed));
  if (!semantics_diags.empty()) throw H5pError(ErrorCode::SemanticsViolation, std::move(semantics_diags));

  std::sort(p.libraries.begin(), p.libraries.end(), [](const LibraryDefinition& a, const LibraryDefinition& b) {
    return std::tie(a.machineName, a.majorVersion, a.minorVersion) < std::tie(b.machineName, b.majorVersion, b.minorVersion);
  });
  p.assets = std::move(files);

  if (auto problem = check_package(p)) throw H5pError(problem->code, std::move(problem->diagnostics));
  return p;
}

Bytes write_package(const H5pPackage& p) {
  if (auto problem = check_package(p)) throw H5pError(problem->code, std::move(problem->diagnostics));

  std::vector<zip::Entry> entries;
  std::set<std::string> written;
  auto add = [&](std::string path, Bytes data) {
    written.insert(path);
    entries.push_back(zip::Entry{std::move(path), std::move(data)});
  };
  auto add_assets_under = [&](const std::string& prefix) {
    for (const auto& [path, data] : p.assets) {
      if (path.starts_with(prefix) && !written.count(path)) add(path, data);
    }
  };

  add(std::string(kManifestPath), string_to_bytes(manifest_to_json(p.manifest).dump(2)));
  add(std::string(kContentPath), string_to_bytes(p.content.dump(2)));
  add_assets_under("content/");

  auto libs = p.libraries;
  std::sort(libs.begin(), libs.end(), [](const LibraryDefinition& a, const LibraryDefinition& b) {
    return std::tie(a.machineName, a.majorVersion, a.minorVersion) < std::tie(b.machineName, b.majorVersion, b.minorVersion);
  });
  for (const auto& lib : libs) {
    const std::string dir = lib.ref().directory();
    add(dir + "/library.json", string_to_bytes(library_to_json(lib).dump(2)));
    if (lib.hasSemantics) add(dir + "/semantics.json", string_to_bytes(semantics_to_json(lib.semantics).dump(2)));
    add_assets_under(dir + "/");
  }
  add_assets_under("");
  return zip::write(entries);
}

}  // namespace canvas::h5p
