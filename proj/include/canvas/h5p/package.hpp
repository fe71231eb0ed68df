#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "canvas/error.hpp"
#include "canvas/h5p/zip.hpp"

namespace canvas::h5p {

struct Diagnostic {
  std::string code;  // e.g. "MissingField", "RangeViolation", "DanglingDependency"
  std::string path;  // file and/or JSON pointer the diagnostic is about
  std::string message;

  friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
};

std::string to_string(const Diagnostic& d);
void to_json(nlohmann::json& j, const Diagnostic& d);

/// Error carrying the full list of diagnostics that caused it. The first
/// diagnostic's path is part of what().
class H5pError : public Error {
 public:
  H5pError(ErrorCode code, std::vector<Diagnostic> diagnostics);

  const std::vector<Diagnostic>& diagnostics() const noexcept { return diagnostics_; }

 private:
  std::vector<Diagnostic> diagnostics_;
};

struct LibraryRef {
  std::string machineName;
  int majorVersion = 0;
  int minorVersion = 0;

  /// "H5P.MultiChoice 1.16", the form used in content `library` fields.
  std::string to_string() const;
  /// "H5P.MultiChoice-1.16", the archive directory name.
  std::string directory() const;

  friend bool operator==(const LibraryRef&, const LibraryRef&) = default;
};

enum class FieldType { text, number, boolean, group, list, select, library, image, video, audio, other };

std::string_view to_string(FieldType type);

struct SemanticsField {
  std::string name;
  FieldType type = FieldType::text;
  std::string rawType;  // the type string as written (kept for FieldType::other)
  std::string label;
  bool optional = false;
  std::optional<nlohmann::json> defaultValue;
  std::string entity;                   // list
  std::vector<SemanticsField> itemField;  // list: exactly one element
  std::vector<SemanticsField> fields;     // group
  std::optional<double> min;            // number value range, list item count
  std::optional<double> max;
  std::vector<nlohmann::json> options;  // select: {value,label}; library: "Machine.Name x.y"
  nlohmann::json extra = nlohmann::json::object();  // keys we do not model

  friend bool operator==(const SemanticsField&, const SemanticsField&) = default;
};

struct H5pManifest {
  std::string title;
  std::string language = "und";
  std::string mainLibrary;
  std::vector<std::string> embedTypes{"div"};
  std::vector<LibraryRef> preloadedDependencies;
  std::string license;
  nlohmann::json extra = nlohmann::json::object();

  friend bool operator==(const H5pManifest&, const H5pManifest&) = default;
};

struct LibraryDefinition {
  std::string machineName;
  std::string title;
  int majorVersion = 1;
  int minorVersion = 0;
  int patchVersion = 0;
  bool runnable = false;
  std::vector<std::string> preloadedScriptAssets;
  std::vector<std::string> preloadedStyleAssets;
  std::vector<LibraryRef> preloadedDependencies;
  bool hasSemantics = false;
  std::vector<SemanticsField> semantics;
  nlohmann::json extra = nlohmann::json::object();

  LibraryRef ref() const { return LibraryRef{machineName, majorVersion, minorVersion}; }

  friend bool operator==(const LibraryDefinition&, const LibraryDefinition&) = default;
};

struct H5pPackage {
  H5pManifest manifest;
  std::vector<LibraryDefinition> libraries;  // sorted by machineName
  nlohmann::json content = nlohmann::json::object();
  std::map<std::string, Bytes> assets;  // every other archive file, by path

  const LibraryDefinition* main_library() const;
  const LibraryDefinition* find_library(std::string_view machineName) const;

  friend bool operator==(const H5pPackage&, const H5pPackage&) = default;
};

/// A dependency is satisfied by a library with the same machine name and a
/// (major, minor) version at least the requested one.
bool satisfies(const LibraryDefinition& lib, const LibraryRef& ref);

/// Every invariant violation of a package, grouped by the error code that
/// reports it. Empty when the package is valid.
struct PackageCheck {
  ErrorCode code = ErrorCode::InvalidPackage;
  std::vector<Diagnostic> diagnostics;
};
std::optional<PackageCheck> check_package(const H5pPackage& p);

/// Parses a `.h5p` archive. `notices`, when given, receives non-fatal
/// observations (unknown field types, directory/name mismatches).
H5pPackage read_package(std::span<const std::uint8_t> archive, std::vector<Diagnostic>* notices = nullptr);

/// Deterministic archive: h5p.json, content/ entries, then library
/// directories in machineName order; remaining assets in path order.
Bytes write_package(const H5pPackage& p);

// JSON forms of the individual documents.
nlohmann::json manifest_to_json(const H5pManifest& m);
nlohmann::json library_to_json(const LibraryDefinition& lib);
nlohmann::json semantics_to_json(const std::vector<SemanticsField>& fields);
nlohmann::json field_to_json(const SemanticsField& f);
/// Parses a semantics document; shape errors are reported as
/// SemanticsViolation diagnostics under `path`.
std::vector<SemanticsField> semantics_from_json(const nlohmann::json& j, const std::string& path,
                                                std::vector<Diagnostic>& diagnostics);

std::optional<LibraryRef> parse_library_string(std::string_view text);

}  // namespace canvas::h5p
