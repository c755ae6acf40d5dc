#pragma once

#include <string>

#include "common/error.hpp"
#include "json.hpp"

namespace n2olab {

using json = nlohmann::json;

json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

// Optional typed field: leaves `out` untouched when the key is absent,
// throws Configuration naming `where.key` when the type is wrong.
template <class T>
void read_field(const json& j, const char* key, T& out, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) return;
  try {
    out = it->template get<T>();
  } catch (const json::exception& e) {
    fail(ErrorKind::Configuration, where + "." + key + ": " + e.what());
  }
}

template <class T>
T require_field(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) fail(ErrorKind::Configuration, where + ": missing field '" + key + "'");
  T out{};
  read_field(j, key, out, where);
  return out;
}

}  // namespace n2olab
