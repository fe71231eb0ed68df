#include <gtest/gtest.h>

#include <random>

#include "canvas/h5p/export.hpp"
#include "canvas/h5p/package.hpp"
#include "canvas/h5p/semantics.hpp"
#include "canvas/h5p/zip.hpp"
#include "oracles/content_oracle.hpp"
#include "oracles/zip_oracle.hpp"
#include "support/fixtures.hpp"

using namespace canvas;
using namespace canvas::h5p;
using nlohmann::json;

namespace {

std::multiset<std::string> library_codes(const json& content, const json& semantics) {
  std::vector<Diagnostic> notices;
  const auto fields = semantics_from_json(semantics, "", notices);
  std::multiset<std::string> out;
  for (const auto& d : validate_content(content, fields)) out.insert(d.code + " " + d.path);
  return out;
}

ErrorCode read_error(const Bytes& bytes) {
  try {
    read_package(bytes);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "archive was accepted";
  return ErrorCode::StoreFailure;
}

// Rewrites one archive entry in place.
Bytes with_entry(const Bytes& archive, const std::string& path, const std::optional<std::string>& data) {
  auto entries = zip::read(archive);
  std::vector<zip::Entry> out;
  for (auto& e : entries) {
    if (e.path != path) out.push_back(std::move(e));
  }
  if (data) out.push_back({path, fixtures::bytes(*data)});
  return zip::write(out);
}

}  // namespace

TEST(Zip, WriteIsReadableByIndependentReader) {
  std::vector<zip::Entry> entries{{"a.txt", fixtures::bytes("hello")},
                                  {"dir/b.bin", fixtures::bytes(std::string(5000, 'z'))},
                                  {"empty", {}}};
  const auto bytes = zip::write(entries);
  EXPECT_EQ(zip::read(bytes), entries);
  const auto listed = oracle::zip::list(bytes);
  ASSERT_EQ(listed.size(), 3u);
  EXPECT_EQ(listed[0].name, "a.txt");
  EXPECT_EQ(listed[1].uncompressedSize, 5000u);
  EXPECT_EQ(zip::write(entries), bytes);
}

TEST(Zip, RejectsGarbage) {
  EXPECT_THROW(zip::read(fixtures::bytes("not a zip at all")), Error);
  auto bytes = zip::write({{"a.txt", fixtures::bytes("hello world")}});
  bytes[40] ^= 0xff;
  EXPECT_THROW(zip::read(bytes), Error);
}

TEST(Package, RoundTripsFixtures) {
  for (const auto& p : fixtures::all_packages()) {
    const auto bytes = write_package(p);
    EXPECT_EQ(read_package(bytes), p) << p.manifest.title;
    const auto listed = oracle::zip::list(bytes);
    ASSERT_FALSE(listed.empty());
    EXPECT_EQ(listed[0].name, "h5p.json");
  }
}

TEST(Package, ArchiveLayout) {
  const auto bytes = write_package(fixtures::quiz_package());
  std::set<std::string> names;
  for (const auto& e : oracle::zip::list(bytes)) names.insert(e.name);
  for (const char* n : {"h5p.json", "content/content.json", "content/images/otter.png",
                        "H5P.MultiChoice-1.16/library.json", "H5P.MultiChoice-1.16/semantics.json",
                        "H5P.MultiChoice-1.16/js/multichoice.js", "H5P.Question-1.5/library.json"}) {
    EXPECT_TRUE(names.count(n)) << n;
  }
}

TEST(Package, UnknownFieldTypeIsKeptWithNotice) {
  std::vector<Diagnostic> notices;
  const auto p = read_package(write_package(fixtures::video_package()), &notices);
  const auto& playback = p.main_library()->semantics.back();
  EXPECT_EQ(playback.type, FieldType::other);
  EXPECT_EQ(playback.rawType, "wizard");
  EXPECT_TRUE(std::any_of(notices.begin(), notices.end(), [](const Diagnostic& d) { return d.code == "UnknownFieldType"; }));
  EXPECT_TRUE(p.assets.count("README.txt"));
  EXPECT_EQ(p.manifest.extra.at("authors")[0].at("name"), "Lutra");
}

TEST(Package, MissingManifest) {
  const auto bytes = with_entry(write_package(fixtures::text_package()), "h5p.json", std::nullopt);
  EXPECT_EQ(read_error(bytes), ErrorCode::MissingManifest);
}

TEST(Package, MalformedManifest) {
  const auto bytes = with_entry(write_package(fixtures::text_package()), "h5p.json", "{\"title\": 3");
  EXPECT_EQ(read_error(bytes), ErrorCode::MalformedManifest);
}

TEST(Package, MissingContentIsInvalid) {
  const auto bytes = with_entry(write_package(fixtures::text_package()), "content/content.json", std::nullopt);
  EXPECT_EQ(read_error(bytes), ErrorCode::InvalidPackage);
}

TEST(Package, NotAnArchive) { EXPECT_EQ(read_error(fixtures::bytes("PK but not really")), ErrorCode::NotAnArchive); }

TEST(Package, DanglingDependency) {
  auto p = fixtures::quiz_package();
  p.libraries.pop_back();  // drop H5P.Question
  const auto check = check_package(p);
  ASSERT_TRUE(check);
  EXPECT_EQ(check->code, ErrorCode::DanglingDependency);
  EXPECT_THROW(write_package(p), H5pError);
  const auto archive =
      with_entry(write_package(fixtures::quiz_package()), "H5P.Question-1.5/library.json", std::nullopt);
  EXPECT_EQ(read_error(archive), ErrorCode::DanglingDependency);
}

TEST(Package, NewerMinorSatisfiesDependency) {
  auto p = fixtures::quiz_package(5);
  p.libraries[1].minorVersion = 7;
  EXPECT_FALSE(check_package(p));
  auto older = fixtures::quiz_package(5);
  older.libraries[1].minorVersion = 4;
  EXPECT_TRUE(check_package(older));
  EXPECT_TRUE(satisfies(p.libraries[1], LibraryRef{"H5P.Question", 1, 5}));
  EXPECT_FALSE(satisfies(p.libraries[1], LibraryRef{"H5P.Question", 2, 0}));
}

TEST(Package, ContentMustMatchSemantics) {
  auto p = fixtures::quiz_package();
  p.content["passPercentage"] = 150;
  const auto check = check_package(p);
  ASSERT_TRUE(check);
  EXPECT_EQ(check->code, ErrorCode::SemanticsViolation);
  ASSERT_EQ(check->diagnostics.size(), 1u);
  EXPECT_EQ(check->diagnostics[0].path, "content/content.json#/passPercentage");
  EXPECT_TRUE(check->diagnostics[0].message.starts_with("RangeViolation"));
  auto on_disk = with_entry(write_package(fixtures::quiz_package()), "content/content.json", p.content.dump());
  EXPECT_EQ(read_error(on_disk), ErrorCode::SemanticsViolation);
}

TEST(Package, LibraryStrings) {
  const auto ref = parse_library_string("H5P.MultiChoice 1.16");
  ASSERT_TRUE(ref);
  EXPECT_EQ(ref->minorVersion, 16);
  EXPECT_EQ(ref->directory(), "H5P.MultiChoice-1.16");
  EXPECT_FALSE(parse_library_string("H5P.MultiChoice"));
  EXPECT_FALSE(parse_library_string("H5P.MultiChoice 1.x"));
}

TEST(Semantics, AgreesWithOracleOnMutatedContent) {
  const auto semantics = fixtures::quiz_semantics();
  const auto base = fixtures::quiz_package().content;
  std::mt19937 rng(11);
  const std::vector<json> junk{json(), json(-5), json(500), json("text"), json(true), json::array(),
                               json::object(), json::array({json()}), json("multi"), json{{"path", 3}}};
  const std::vector<std::string> pointers{"/question",       "/answers",         "/answers/0",
                                          "/answers/0/text", "/answers/1/correct", "/media",
                                          "/media/path",     "/passPercentage",  "/mode"};
  for (int i = 0; i < 400; ++i) {
    json content = base;
    const int edits = std::uniform_int_distribution<int>(1, 3)(rng);
    for (int k = 0; k < edits; ++k) {
      const auto& ptr = pointers[std::uniform_int_distribution<std::size_t>(0, pointers.size() - 1)(rng)];
      const auto& value = junk[std::uniform_int_distribution<std::size_t>(0, junk.size() - 1)(rng)];
      try {
        content[json::json_pointer(ptr)] = value;
      } catch (const json::exception&) {
        // Parent was replaced by a scalar earlier; skip this edit.
      }
    }
    EXPECT_EQ(library_codes(content, semantics), oracle::content::check(content, semantics)) << content.dump();
  }
  EXPECT_TRUE(library_codes(base, semantics).empty());
}

TEST(Semantics, ChecksDefinitions) {
  std::vector<Diagnostic> notices;
  const auto bad = semantics_from_json(json::parse(R"([
    {"name": "a", "type": "text"}, {"name": "a", "type": "text"},
    {"name": "l", "type": "list", "field": {"name": "x", "type": "text"}},
    {"name": "g", "type": "group", "fields": []}
  ])"),
                                       "", notices);
  EXPECT_EQ(validate_semantics(bad).size(), 3u);
  EXPECT_TRUE(validate_semantics(semantics_from_json(fixtures::quiz_semantics(), "", notices)).empty());
}

TEST(Export, CompilesCompositionIntoOnePackage) {
  fixtures::World world;
  const auto graph = fixtures::video_article_quiz(world);
  const auto result = export_composition(graph, world, world, "Rivers");
  const auto& p = result.package;
  EXPECT_EQ(p.manifest.mainLibrary, kPlayerLibrary);
  EXPECT_FALSE(check_package(p));
  EXPECT_TRUE(p.find_library("H5P.MultiChoice"));
  EXPECT_TRUE(p.find_library("H5P.Video"));
  EXPECT_TRUE(p.assets.count("content/nodes/test/images/otter.png"));
  EXPECT_EQ(extract_composition(read_package(write_package(p))), graph);
}

TEST(Export, HighestDependencyWins) {
  fixtures::World world;
  world.add_atomic("q1", "Quiz one", fixtures::quiz_package(5), "quiz");
  world.add_atomic("q2", "Quiz two", fixtures::quiz_package(7), "quiz");
  auto graph = new_composition("Two quizzes", "author").second;
  graph = add_node(graph, "q1", world, std::string("one"));
  graph = add_node(graph, "q2", world, std::string("two"));
  graph = add_edge(graph, "start", "one", std::nullopt, 0);
  graph = add_edge(graph, "one", "two", std::nullopt, 0);
  const auto result = export_composition(graph, world, world);
  EXPECT_EQ(result.package.find_library("H5P.Question")->minorVersion, 7);
  // Same major version: compatible, so nothing to report.
  EXPECT_TRUE(result.diagnostics.empty());
}

TEST(Export, BlockedByValidationAndMissingPackage) {
  fixtures::World world;
  world.add_atomic("q", "Quiz", fixtures::quiz_package(), "quiz");
  auto graph = new_composition("Broken", "author").second;
  graph = add_node(graph, "q", world, std::string("a"));
  graph = add_edge(graph, "start", "a", cond::parse_or_throw("completed"), 0);
  try {
    export_composition(graph, world, world);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ExportBlocked);
  }
  graph = add_edge(graph, "start", "a", std::nullopt, 1);
  world.packages.clear();
  try {
    export_composition(graph, world, world);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MissingPackage);
  }
}
