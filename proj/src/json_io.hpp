#pragma once

// JSON Lines helpers shared by the snapshot, trace and payment readers.

#include <cstddef>
#include <string>

#include <json.hpp>

#include "lngossip/errors.hpp"
#include "lngossip/topology.hpp"

namespace lngossip {

nlohmann::json parse_json_line(const std::string& text, std::size_t line);
ChannelPolicy policy_from_json(const nlohmann::json& j, std::size_t line);
void policy_to_json(nlohmann::json& j, const ChannelPolicy& p);

template <typename T>
T json_field(const nlohmann::json& j, const char* key, std::size_t line) {
  auto it = j.find(key);
  if (it == j.end()) throw ParseError(line, std::string("missing field '") + key + "'");
  try {
    return it->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ParseError(line, std::string("bad value for '") + key + "'");
  }
}

}  // namespace lngossip
