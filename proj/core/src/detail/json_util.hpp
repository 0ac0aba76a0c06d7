#pragma once

#include <nlohmann/json.hpp>

#include <string>
#include <string_view>

#include "gripkit/error.hpp"

namespace gripkit::detail {

using Json = nlohmann::json;

inline Json parse_json(std::string_view text, const std::string& source) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    std::size_t line = 1, col = 1;
    const std::size_t stop = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    for (std::size_t i = 0; i < stop; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ParseError(source, line, col, "malformed JSON");
  }
}

template <typename T>
T field(const Json& j, std::string_view key, const std::string& source) {
  const auto it = j.find(key);
  if (it == j.end()) throw ParseError(source, 0, 0, "missing field '" + std::string(key) + "'");
  try {
    return it->template get<T>();
  } catch (const Json::exception&) {
    throw ParseError(source, 0, 0, "field '" + std::string(key) + "' has the wrong type");
  }
}

template <typename T>
T field_or(const Json& j, std::string_view key, T fallback, const std::string& source) {
  return j.contains(key) ? field<T>(j, key, source) : fallback;
}

}  // namespace gripkit::detail
