#pragma once

// Hand-built packages and graphs shared by the unit and acceptance tests.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "canvas/h5p/export.hpp"
#include "canvas/h5p/package.hpp"
#include "canvas/model.hpp"
#include "canvas/serialization.hpp"

namespace fixtures {

using canvas::h5p::Bytes;
using canvas::h5p::H5pPackage;
using canvas::h5p::LibraryDefinition;
using canvas::h5p::LibraryRef;
using nlohmann::json;

inline Bytes bytes(std::string_view s) { return Bytes(s.begin(), s.end()); }

inline LibraryDefinition library(std::string name, int major, int minor, int patch, bool runnable,
                                 json semantics = json::array(), std::vector<LibraryRef> deps = {}) {
  LibraryDefinition lib;
  lib.machineName = std::move(name);
  lib.title = lib.machineName;
  lib.majorVersion = major;
  lib.minorVersion = minor;
  lib.patchVersion = patch;
  lib.runnable = runnable;
  lib.preloadedDependencies = std::move(deps);
  if (!semantics.empty()) {
    lib.hasSemantics = true;
    std::vector<canvas::h5p::Diagnostic> notices;
    lib.semantics = canvas::h5p::semantics_from_json(semantics, lib.ref().directory() + "/semantics.json", notices);
  }
  return lib;
}

inline json quiz_semantics() {
  return json::parse(R"([
    {"name": "question", "type": "text", "label": "Question"},
    {"name": "answers", "type": "list", "label": "Answers", "entity": "answer", "min": 1, "max": 10,
     "field": {"name": "answer", "type": "group", "label": "Answer", "fields": [
       {"name": "text", "type": "text", "label": "Text"},
       {"name": "correct", "type": "boolean", "label": "Correct", "default": false}]}},
    {"name": "media", "type": "image", "label": "Image", "optional": true},
    {"name": "passPercentage", "type": "number", "label": "Pass mark", "min": 0, "max": 100, "default": 50},
    {"name": "mode", "type": "select", "label": "Mode", "default": "single",
     "options": [{"value": "single", "label": "Single"}, {"value": "multi", "label": "Multi"}]}
  ])");
}

inline H5pPackage quiz_package(int questionMinor = 5) {
  H5pPackage p;
  p.manifest.title = "Otter quiz";
  p.manifest.language = "en";
  p.manifest.mainLibrary = "H5P.MultiChoice";
  p.manifest.license = "CC BY-SA";
  p.manifest.preloadedDependencies = {{"H5P.MultiChoice", 1, 16}, {"H5P.Question", 1, questionMinor}};
  p.libraries = {library("H5P.MultiChoice", 1, 16, 3, true, quiz_semantics(), {{"H5P.Question", 1, questionMinor}}),
                 library("H5P.Question", 1, questionMinor, 0, false)};
  p.libraries[0].preloadedScriptAssets = {"js/multichoice.js"};
  p.libraries[0].preloadedStyleAssets = {"css/multichoice.css"};
  p.content = json::parse(R"({
    "question": "What do otters eat?",
    "answers": [{"text": "Fish", "correct": true}, {"text": "Grass", "correct": false}],
    "media": {"path": "images/otter.png", "mime": "image/png"},
    "passPercentage": 80,
    "mode": "single"
  })");
  p.assets["content/images/otter.png"] = bytes(std::string("\x89PNG\r\n\x1a\n", 8) + std::string(300, '\x07'));
  p.assets["H5P.MultiChoice-1.16/js/multichoice.js"] = bytes("H5P.MultiChoice = function () {};\n");
  p.assets["H5P.MultiChoice-1.16/css/multichoice.css"] = bytes(".h5p-multichoice { margin: 0; }\n");
  return p;
}

inline H5pPackage video_package() {
  H5pPackage p;
  p.manifest.title = "River video";
  p.manifest.mainLibrary = "H5P.Video";
  p.manifest.preloadedDependencies = {{"H5P.Video", 1, 6}};
  p.manifest.extra["authors"] = json::array({json{{"name", "Lutra"}, {"role", "Author"}}});
  auto semantics = json::parse(R"([
    {"name": "sources", "type": "video", "label": "Sources"},
    {"name": "visuals", "type": "group", "label": "Visuals", "fields": [
      {"name": "fit", "type": "boolean", "label": "Fit", "default": true},
      {"name": "poster", "type": "image", "label": "Poster", "optional": true}]},
    {"name": "playback", "type": "wizard", "label": "Playback", "optional": true}
  ])");
  p.libraries = {library("H5P.Video", 1, 6, 1, true, semantics)};
  p.content = json::parse(R"({
    "sources": [{"path": "videos/river.mp4", "mime": "video/mp4"}],
    "visuals": {"fit": true}
  })");
  p.assets["content/videos/river.mp4"] = bytes(std::string(4096, '\x42'));
  p.assets["README.txt"] = bytes("unknown assets survive\n");
  return p;
}

inline H5pPackage text_package() {
  H5pPackage p;
  p.manifest.title = "Article on rivers";
  p.manifest.mainLibrary = "H5P.AdvancedText";
  p.manifest.preloadedDependencies = {{"H5P.AdvancedText", 1, 1}};
  p.libraries = {library("H5P.AdvancedText", 1, 1, 0, true,
                         json::parse(R"([{"name": "text", "type": "text", "label": "Text", "widget": "html"}])"))};
  p.content = json{{"text", "<p>Rivers flow downhill.</p>"}};
  return p;
}

inline std::vector<H5pPackage> all_packages() { return {quiz_package(), video_package(), text_package()}; }

/// Registry plus package lookup for atomic modules.
struct World : canvas::ModuleResolver, canvas::h5p::PackageResolver {
  canvas::InMemoryRegistry registry;
  std::map<std::string, H5pPackage, std::less<>> packages;

  canvas::ModuleDescriptor add_atomic(const std::string& id, const std::string& title, H5pPackage p,
                                      const std::string& type) {
    canvas::ModuleDescriptor m;
    m.moduleId = id;
    m.kind = canvas::ModuleKind::atomic;
    m.title = title;
    m.authorId = "author";
    m.contentRef = "pkg-" + id;
    m.contentType = type;
    registry.put_module(m);
    packages[m.contentRef] = std::move(p);
    return m;
  }

  std::optional<canvas::ModuleDescriptor> find_module(std::string_view id) const override {
    return registry.find_module(id);
  }
  std::optional<canvas::CompositionGraph> find_composition(std::string_view id) const override {
    return registry.find_composition(id);
  }
  std::optional<H5pPackage> find_package(std::string_view ref) const override {
    auto it = packages.find(ref);
    if (it == packages.end()) return std::nullopt;
    return it->second;
  }
};

/// The three-module example: watch a video, read an article, then take a
/// quiz; an article that was not completed sends the learner back to the
/// video.
inline canvas::CompositionGraph video_article_quiz(World& world) {
  world.add_atomic("video", "River video", video_package(), "video");
  world.add_atomic("article", "Article on rivers", text_package(), "text");
  world.add_atomic("quiz", "Otter quiz", quiz_package(), "quiz");
  auto [module, graph] = canvas::new_composition("Rivers", "author");
  graph = canvas::add_node(graph, "video", world, std::string("watch"));
  graph = canvas::add_node(graph, "article", world, std::string("read"));
  graph = canvas::add_node(graph, "quiz", world, std::string("test"), std::string("Final quiz"));
  graph = canvas::add_edge(graph, graph.startNodeId, "watch", std::nullopt, 0);
  graph = canvas::add_edge(graph, "watch", "read", std::nullopt, 0);
  graph = canvas::add_edge(graph, "read", "test", canvas::cond::parse_or_throw("completed"), 0);
  graph = canvas::add_edge(graph, "read", "watch", std::nullopt, 1);
  world.registry.put_composition(graph);
  return graph;
}

}  // namespace fixtures
