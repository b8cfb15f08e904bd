#pragma once

#include <optional>
#include <string>
#include <type_traits>
#include <vector>

#include <json.hpp>

#include "coexist/errors.hpp"

namespace coexist::cli {

/// Parsed run configuration. Top-level sections are system, sim, optimize
/// and casestudy; any other key is rejected at load time.
class ConfigFile {
 public:
  ConfigFile() = default;
  explicit ConfigFile(nlohmann::json doc, std::string origin = "<inline>");

  const nlohmann::json& doc() const { return doc_; }
  const std::string& origin() const { return origin_; }
  bool empty() const { return doc_.empty(); }

  template <typename T>
  std::optional<T> get(const char* section, const char* key) const;

 private:
  [[noreturn]] void type_error(const char* section, const char* key, const char* want) const;

  nlohmann::json doc_ = nlohmann::json::object();
  std::string origin_;
};

ConfigFile load_config(const std::string& path);

template <typename T>
std::optional<T> ConfigFile::get(const char* section, const char* key) const {
  const auto s = doc_.find(section);
  if (s == doc_.end()) return std::nullopt;
  const auto it = s->find(key);
  if (it == s->end() || it->is_null()) return std::nullopt;
  const nlohmann::json& v = *it;
  if constexpr (std::is_same_v<T, bool>) {
    if (!v.is_boolean()) type_error(section, key, "boolean");
    return v.get<bool>();
  } else if constexpr (std::is_integral_v<T>) {
    if (!v.is_number_integer()) type_error(section, key, "integer");
    if constexpr (std::is_unsigned_v<T>) {
      if (v.is_number_unsigned()) return v.get<T>();
      if (v.get<long long>() < 0) type_error(section, key, "non-negative integer");
    }
    return v.get<T>();
  } else if constexpr (std::is_floating_point_v<T>) {
    if (!v.is_number()) type_error(section, key, "number");
    return v.get<T>();
  } else if constexpr (std::is_same_v<T, std::string>) {
    if (!v.is_string()) type_error(section, key, "string");
    return v.get<std::string>();
  } else if constexpr (std::is_same_v<T, std::vector<int>>) {
    if (!v.is_array()) type_error(section, key, "array of integers");
    std::vector<int> out;
    for (const auto& e : v) {
      if (!e.is_number_integer()) type_error(section, key, "array of integers");
      out.push_back(e.get<int>());
    }
    return out;
  } else {
    static_assert(sizeof(T) == 0, "unsupported config value type");
  }
}

}  // namespace coexist::cli
