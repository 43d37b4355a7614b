#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

#include "lngossip/messages.hpp"

namespace lngossip {

/// One recorded (or generated) gossip message awaiting injection.
struct TraceRecord {
  SimTime inject_time{0};
  MessagePayload payload;
  std::optional<NodeId> origin_hint;
};

/// Time-ordered gossip recording; doubles as the analyzer input.
struct Trace {
  std::vector<TraceRecord> records;

  std::size_t size() const { return records.size(); }
  bool empty() const { return records.empty(); }
};

/// Trace file: JSON Lines with "upd", "ann" and "node" records. Records are
/// sorted stably by inject time after parsing.
Trace parse_trace(std::istream& in);
Trace load_trace(const std::filesystem::path& path);
void write_trace(std::ostream& out, const Trace& trace);

}  // namespace lngossip
