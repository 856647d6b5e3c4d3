#include "mmbat/util/json_config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "mmbat/errors.hpp"
#include "mmbat/util/random.hpp"

namespace mmbat::util {

void require_known_keys(const nlohmann::json& j, std::initializer_list<std::string_view> allowed,
                        std::string_view section) {
  if (!j.is_object()) throw ConfigError("config section '" + std::string(section) + "' must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError("unknown key '" + key + "' in config section '" + std::string(section) + "'");
    }
  }
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << j.dump(2) << '\n';
}

std::string json_fingerprint(const nlohmann::json& j) {
  const std::string s = j.dump();
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(s.data(), s.size())));
  return buf;
}

}  // namespace mmbat::util
