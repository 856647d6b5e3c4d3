#pragma once

#include <filesystem>
#include <initializer_list>
#include <string_view>

#include <nlohmann/json.hpp>

namespace mmbat::util {

/// Rejects keys of `j` that are not listed in `allowed` (ConfigError names the
/// offending key and section).
void require_known_keys(const nlohmann::json& j, std::initializer_list<std::string_view> allowed,
                        std::string_view section);

/// Reads `key` into `out` when present; leaves the default otherwise.
template <typename T>
void read_optional(const nlohmann::json& j, const char* key, T& out) {
  if (auto it = j.find(key); it != j.end()) out = it->template get<T>();
}

nlohmann::json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);

/// Hex FNV-1a digest of the compact JSON dump (object keys are sorted).
std::string json_fingerprint(const nlohmann::json& j);

}  // namespace mmbat::util
