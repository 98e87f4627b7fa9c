#pragma once

#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "fieldsim/errors.hpp"

// Field accessors that raise ConfigInvalid naming the full path of the
// offending member.
namespace fieldsim::json_util {

inline std::string join(std::string_view path, std::string_view key) {
  if (path.empty()) return std::string(key);
  return std::string(path) + "." + std::string(key);
}

inline std::string index(std::string_view path, std::size_t i) {
  return std::string(path) + "[" + std::to_string(i) + "]";
}

template <typename T>
T get_as(const nlohmann::json& value, std::string_view path) {
  try {
    return value.get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigInvalid(std::string(path), "has the wrong type (got " +
                                               std::string(value.type_name()) + ")");
  }
}

template <typename T>
T require(const nlohmann::json& obj, std::string_view key, std::string_view path) {
  if (!obj.is_object()) throw ConfigInvalid(std::string(path), "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw ConfigInvalid(join(path, key), "is required");
  return get_as<T>(*it, join(path, key));
}

template <typename T>
T optional(const nlohmann::json& obj, std::string_view key, std::string_view path, T fallback) {
  if (!obj.is_object()) throw ConfigInvalid(std::string(path), "expected an object");
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return fallback;
  return get_as<T>(*it, join(path, key));
}

inline const nlohmann::json& require_node(const nlohmann::json& obj, std::string_view key,
                                          std::string_view path) {
  if (!obj.is_object()) throw ConfigInvalid(std::string(path), "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw ConfigInvalid(join(path, key), "is required");
  return *it;
}

// Parses text, converting syntax errors into ConfigInvalid with line:column.
nlohmann::json parse_text(std::string_view text, std::string_view source_name);
// Reads and parses a file; IoFailure when unreadable.
nlohmann::json parse_file(const std::string& path);

}  // namespace fieldsim::json_util
