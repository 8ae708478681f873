#pragma once

#include "toolsynth/errors.hpp"

#include <json.hpp>

#include <string>

namespace toolsynth::detail {

template <typename T>
T get(const nlohmann::json& j, const char* key, const char* where) {
  if (!j.is_object()) throw ConfigError(std::string(where) + ": expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw ConfigError(std::string(where) + ": missing field '" + key + "'");
  try {
    return it->get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string(where) + "." + key + ": " + e.what());
  }
}

template <typename T>
void get_opt(const nlohmann::json& j, const char* key, T& out, const char* where) {
  if (j.contains(key)) out = get<T>(j, key, where);
}

}  // namespace toolsynth::detail
