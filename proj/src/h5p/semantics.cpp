#include "canvas/h5p/semantics.hpp"

#include <set>

namespace canvas::h5p {

using nlohmann::json;

namespace {

class ContentChecker {
 public:
  std::vector<Diagnostic> out;

  void fields(const json& object, const std::vector<SemanticsField>& defs, const std::string& path) {
    for (const auto& def : defs) {
      const std::string child = path + "/" + def.name;
      if (!object.contains(def.name) || object.at(def.name).is_null()) {
        if (!def.optional && !def.defaultValue) add("MissingField", child, "required field '" + def.name + "' is missing");
        continue;
      }
      value(object.at(def.name), def, child);
    }
  }

  void value(const json& v, const SemanticsField& def, const std::string& path) {
    switch (def.type) {
      case FieldType::text:
        if (!v.is_string()) mismatch(path, "text");
        return;
      case FieldType::number:
        if (!v.is_number()) return mismatch(path, "number");
        range(v.get<double>(), def, path, "value");
        return;
      case FieldType::boolean:
        if (!v.is_boolean()) mismatch(path, "boolean");
        return;
      case FieldType::group:
        if (v.is_object()) return fields(v, def.fields, path);
        // A group with a single child is stored as that child's value.
        if (def.fields.size() == 1) return value(v, def.fields.front(), path);
        return mismatch(path, "group object");
      case FieldType::list: {
        if (!v.is_array()) return mismatch(path, "list");
        range(static_cast<double>(v.size()), def, path, "item count");
        if (def.itemField.empty()) return;
        for (std::size_t i = 0; i < v.size(); ++i) {
          const auto item_path = path + "/" + std::to_string(i);
          if (v[i].is_null()) {
            add("MissingField", item_path, "list item is null");
            continue;
          }
          value(v[i], def.itemField.front(), item_path);
        }
        return;
      }
      case FieldType::select: {
        if (def.options.empty()) return;
        for (const auto& option : def.options) {
          if (option.is_object() && option.contains("value") && option.at("value") == v) return;
        }
        add("InvalidOption", path, "value " + v.dump() + " is not one of the allowed options");
        return;
      }
      case FieldType::library: {
        if (!v.is_object()) return mismatch(path, "library object");
        if (!v.contains("library") || !v.at("library").is_string()) {
          add("MissingField", path + "/library", "library reference is missing");
          return;
        }
        const auto name = v.at("library").get<std::string>();
        const auto ref = parse_library_string(name);
        if (!ref) {
          add("TypeMismatch", path + "/library", "'" + name + "' is not of the form 'Machine.Name major.minor'");
        } else if (!def.options.empty()) {
          bool allowed = false;
          for (const auto& option : def.options) {
            if (!option.is_string()) continue;
            const auto opt = parse_library_string(option.get<std::string>());
            if (opt && opt->machineName == ref->machineName) allowed = true;
          }
          if (!allowed) add("InvalidOption", path + "/library", "library " + name + " is not allowed here");
        }
        if (v.contains("params") && !v.at("params").is_object()) mismatch(path + "/params", "object");
        return;
      }
      case FieldType::image:
        return media(v, path);
      case FieldType::video:
      case FieldType::audio:
        if (v.is_array()) {
          for (std::size_t i = 0; i < v.size(); ++i) media(v[i], path + "/" + std::to_string(i));
          return;
        }
        return media(v, path);
      case FieldType::other:
        return;
    }
  }

 private:
  void media(const json& v, const std::string& path) {
    if (!v.is_object()) return mismatch(path, "media object");
    if (!v.contains("path") || !v.at("path").is_string()) add("MissingField", path + "/path", "media path is missing");
  }

  void range(double x, const SemanticsField& def, const std::string& path, const char* what) {
    if ((def.min && x < *def.min) || (def.max && x > *def.max)) {
      std::string bounds = "[" + (def.min ? json(*def.min).dump() : "-inf") + ", " +
                           (def.max ? json(*def.max).dump() : "inf") + "]";
      add("RangeViolation", path, std::string(what) + " " + json(x).dump() + " is outside " + bounds);
    }
  }

  void mismatch(const std::string& path, const char* expected) {
    add("TypeMismatch", path, std::string("expected ") + expected);
  }

  void add(const char* code, std::string path, std::string message) {
    out.push_back(Diagnostic{code, std::move(path), std::move(message)});
  }
};

void check_definitions(const std::vector<SemanticsField>& fields, const std::string& path,
                       std::vector<Diagnostic>& out) {
  std::set<std::string> names;
  for (const auto& f : fields) {
    const std::string here = path + "/" + f.name;
    if (f.name.empty()) out.push_back({"InvalidSemantics", here, "field has no name"});
    if (!names.insert(f.name).second)
      out.push_back({"InvalidSemantics", here, "duplicate field name '" + f.name + "'"});
    if (f.min && f.max && *f.min > *f.max)
      out.push_back({"InvalidSemantics", here, "min is greater than max"});
    switch (f.type) {
      case FieldType::list:
        if (f.entity.empty())
          out.push_back({"InvalidSemantics", here, "list field '" + f.name + "' must name its entity"});
        if (f.itemField.size() != 1) {
          out.push_back({"InvalidSemantics", here, "list field '" + f.name + "' must define exactly one item field"});
        } else {
          check_definitions(f.itemField, here, out);
        }
        break;
      case FieldType::group:
        if (f.fields.empty())
          out.push_back({"InvalidSemantics", here, "group field '" + f.name + "' has no fields"});
        check_definitions(f.fields, here, out);
        break;
      default:
        break;
    }
  }
}

}  // namespace

std::vector<Diagnostic> validate_content(const json& content, const std::vector<SemanticsField>& semantics) {
  ContentChecker checker;
  if (!content.is_object()) {
    checker.out.push_back({"TypeMismatch", "", "content document must be an object"});
    return checker.out;
  }
  checker.fields(content, semantics, "");
  return checker.out;
}

std::vector<Diagnostic> validate_semantics(const std::vector<SemanticsField>& semantics, const std::string& path) {
  std::vector<Diagnostic> out;
  check_definitions(semantics, path, out);
  return out;
}

}  // namespace canvas::h5p
