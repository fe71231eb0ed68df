#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "canvas/h5p/package.hpp"

namespace canvas::h5p {

/// Checks a content document against a library's semantics. Returns one
/// diagnostic per violation (missing required field, wrong type, number or
/// list length out of range, unknown select option, malformed media or
/// library reference); empty means the content conforms. Keys the
/// semantics do not mention are ignored.
std::vector<Diagnostic> validate_content(const nlohmann::json& content,
                                         const std::vector<SemanticsField>& semantics);

/// Checks the semantics definition itself: list fields need a non-empty
/// entity and one item field, groups need at least one child, sibling
/// names are unique. Paths are JSON pointers rooted at `path`.
std::vector<Diagnostic> validate_semantics(const std::vector<SemanticsField>& semantics,
                                           const std::string& path = "");

}  // namespace canvas::h5p
