#include "canvas/service/chat.hpp"

#include <algorithm>

#include "canvas/error.hpp"

namespace canvas::service {

using nlohmann::json;

ChatCatalog ChatCatalog::builtin() {
  ChatCatalog c;
  c.locales_ = {"en", "nb"};
  c.templates_ = {
      {"T-LIKE", {}, {{"en", "I like this module!"}, {"nb", "Jeg liker denne modulen!"}}},
      {"T-SUGGEST",
       {"module"},
       {{"en", "you should add [{module}] to your composition!"},
        {"nb", "du burde legge til [{module}] i komposisjonen din!"}}},
      {"T-THANKS", {}, {{"en", "Thank you!"}, {"nb", "Takk!"}}},
      {"T-CHECKOUT", {"module"}, {{"en", "check out [{module}]!"}, {"nb", "ta en titt på [{module}]!"}}},
  };
  return c;
}

ChatCatalog ChatCatalog::from_json(const json& j) {
  ChatCatalog c;
  try {
    c.locales_ = j.at("locales").get<std::vector<std::string>>();
    for (const auto& t : j.at("templates")) {
      ChatTemplate tpl{t.at("templateId").get<std::string>(), t.value("slots", std::vector<std::string>{}),
                       t.at("text").get<std::map<std::string, std::string>>()};
      for (const auto& locale : c.locales_) {
        if (!tpl.text.count(locale))
          throw Error(ErrorCode::BadRequest, "template " + tpl.templateId + " has no text for locale " + locale);
      }
      c.templates_.push_back(std::move(tpl));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::BadRequest, std::string("invalid chat catalog: ") + e.what());
  }
  if (c.locales_.empty()) throw Error(ErrorCode::BadRequest, "chat catalog has no locales");
  return c;
}

const ChatTemplate* ChatCatalog::find(std::string_view templateId) const {
  auto it = std::find_if(templates_.begin(), templates_.end(),
                         [&](const ChatTemplate& t) { return t.templateId == templateId; });
  return it == templates_.end() ? nullptr : &*it;
}

std::string ChatCatalog::render(std::string_view templateId, const std::map<std::string, std::string>& titles,
                                std::string_view locale) const {
  const auto* tpl = find(templateId);
  if (!tpl) throw Error(ErrorCode::UnknownTemplate, "no chat template " + std::string(templateId));
  auto text_it = tpl->text.find(std::string(locale));
  if (text_it == tpl->text.end()) text_it = tpl->text.find(locales_.front());
  std::string out = text_it->second;
  for (const auto& slot : tpl->slots) {
    auto title = titles.find(slot);
    if (title == titles.end()) throw Error(ErrorCode::UnresolvedSlot, "slot '" + slot + "' is not filled");
    const std::string marker = "{" + slot + "}";
    for (auto pos = out.find(marker); pos != std::string::npos; pos = out.find(marker, pos + title->second.size())) {
      out.replace(pos, marker.size(), title->second);
    }
  }
  return out;
}

}  // namespace canvas::service
