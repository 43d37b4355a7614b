#include "lngossip/trace.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>

#include "json_io.hpp"

namespace lngossip {

using nlohmann::json;

namespace {

std::optional<NodeId> origin_from_json(const json& j, std::size_t line) {
  auto it = j.find("origin");
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_number_unsigned()) throw ParseError(line, "bad value for 'origin'");
  return it->get<NodeId>();
}

}  // namespace

Trace parse_trace(std::istream& in) {
  Trace trace;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j = parse_json_line(text, line);
    TraceRecord rec;
    const double time = json_field<double>(j, "time", line);
    if (time < 0) throw ParseError(line, "negative time");
    rec.inject_time = from_seconds(time);
    rec.origin_hint = origin_from_json(j, line);
    const auto kind = json_field<std::string>(j, "t", line);
    if (kind == "upd") {
      ChannelUpdate u;
      u.scid = json_field<std::uint64_t>(j, "scid", line);
      u.direction = json_field<unsigned>(j, "dir", line);
      if (u.direction > 1) throw ParseError(line, "dir must be 0 or 1");
      u.policy = policy_from_json(j, line);
      rec.payload = u;
    } else if (kind == "ann") {
      rec.payload = ChannelAnnouncement{json_field<std::uint64_t>(j, "scid", line),
                                        json_field<NodeId>(j, "a", line),
                                        json_field<NodeId>(j, "b", line)};
    } else if (kind == "node") {
      rec.payload = NodeAnnouncement{json_field<NodeId>(j, "node", line),
                                     json_field<std::uint64_t>(j, "ts", line)};
    } else {
      throw ParseError(line, "unknown record kind '" + kind + "'");
    }
    trace.records.push_back(std::move(rec));
  }
  std::stable_sort(trace.records.begin(), trace.records.end(),
                   [](const TraceRecord& a, const TraceRecord& b) { return a.inject_time < b.inject_time; });
  return trace;
}

Trace load_trace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trace " + path.string());
  return parse_trace(in);
}

void write_trace(std::ostream& out, const Trace& trace) {
  for (const auto& rec : trace.records) {
    json j;
    j["time"] = to_seconds(rec.inject_time);
    if (const auto* u = std::get_if<ChannelUpdate>(&rec.payload)) {
      j["t"] = "upd";
      j["scid"] = u->scid;
      j["dir"] = u->direction;
      policy_to_json(j, u->policy);
    } else if (const auto* a = std::get_if<ChannelAnnouncement>(&rec.payload)) {
      j["t"] = "ann";
      j["scid"] = a->scid;
      j["a"] = a->a;
      j["b"] = a->b;
    } else {
      const auto& n = std::get<NodeAnnouncement>(rec.payload);
      j["t"] = "node";
      j["node"] = n.node;
      j["ts"] = n.timestamp;
    }
    j["origin"] = rec.origin_hint ? json(*rec.origin_hint) : json(nullptr);
    out << j.dump() << '\n';
  }
}

}  // namespace lngossip
