#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace canvas::service {

struct ChatTemplate {
  std::string templateId;
  // Slot names, each filled with a moduleId by the sender.
  std::vector<std::string> slots;
  // locale -> text; "{slot}" is replaced by the module title.
  std::map<std::string, std::string> text;
};

/// Closed message catalog. Users pick a template and modules for its slots;
/// there is no way to send free text.
class ChatCatalog {
 public:
  /// T-LIKE, T-SUGGEST(module), T-THANKS, T-CHECKOUT(module) in en and nb.
  static ChatCatalog builtin();
  /// `{"locales": [...], "templates": [{"templateId", "slots", "text"}]}`;
  /// every template must have text for every locale.
  static ChatCatalog from_json(const nlohmann::json& j);

  const ChatTemplate* find(std::string_view templateId) const;
  const std::vector<ChatTemplate>& templates() const { return templates_; }
  const std::vector<std::string>& locales() const { return locales_; }

  /// Renders with module titles already substituted for moduleIds. Unknown
  /// locales fall back to the first catalog locale.
  std::string render(std::string_view templateId, const std::map<std::string, std::string>& titles,
                     std::string_view locale) const;

 private:
  std::vector<ChatTemplate> templates_;
  std::vector<std::string> locales_;
};

}  // namespace canvas::service
