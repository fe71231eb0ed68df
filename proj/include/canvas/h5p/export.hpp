#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "canvas/h5p/package.hpp"
#include "canvas/model.hpp"

namespace canvas::h5p {

/// Machine name of the generated library that plays a composition inside a
/// single H5P attachment container.
inline constexpr std::string_view kPlayerLibrary = "Canvas.CompositionPlayer";
inline constexpr int kPlayerMajor = 1;
inline constexpr int kPlayerMinor = 0;

class PackageResolver {
 public:
  virtual ~PackageResolver() = default;
  /// Package holding the content of an atomic module (by its contentRef).
  virtual std::optional<H5pPackage> find_package(std::string_view contentRef) const = 0;
};

struct ExportResult {
  H5pPackage package;
  // Non-fatal: dependency version conflicts resolved to the highest version.
  std::vector<Diagnostic> diagnostics;
};

/// The player library definition (semantics describe the content document
/// the exporter produces).
LibraryDefinition player_library();

/// Compiles a composition into one package whose main library is the
/// composition player. The content document holds the canonical graph JSON
/// at /composition and one entry per content-bearing node at
/// /subContents/<i>, ordered by nodeId. Nested compositions are exported
/// recursively into their node's entry. Each node's content assets are
/// copied under content/nodes/<nodeId>/ and media paths rewritten.
///
/// ExportBlocked if validation reports errors; MissingPackage if an atomic
/// module has no package.
ExportResult export_composition(const CompositionGraph& graph, const ModuleResolver& modules,
                                const PackageResolver& packages, std::string_view title = "Composition");

/// Reads the embedded graph back out of an exported package.
CompositionGraph extract_composition(const H5pPackage& package);

}  // namespace canvas::h5p
