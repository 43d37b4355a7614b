#pragma once

#include <cstdint>
#include <functional>
#include <variant>

#include "lngossip/time.hpp"
#include "lngossip/topology.hpp"

namespace lngossip {

enum class MessageKind : std::uint8_t { ChannelAnnouncement, NodeAnnouncement, ChannelUpdate };

const char* to_string(MessageKind kind);

struct NodeAnnouncement {
  NodeId node = 0;
  UnixSeconds timestamp = 0;
};

struct ChannelAnnouncement {
  ChannelId scid = 0;
  NodeId a = 0;
  NodeId b = 0;
};

using MessagePayload = std::variant<ChannelAnnouncement, NodeAnnouncement, ChannelUpdate>;

/// Index into a run's message table; doubles as the unique message id.
using MessageId = std::uint32_t;

struct GossipMessage {
  MessageId id = 0;
  NodeId origin = kNoNode;
  SimTime created_at{0};
  MessagePayload payload;

  MessageKind kind() const { return static_cast<MessageKind>(payload.index()); }
  /// Timestamp used for supersession; announcements of channels carry none.
  UnixSeconds timestamp() const;
};

/// Natural key under which queued messages compete.
struct DedupKey {
  MessageKind kind = MessageKind::ChannelUpdate;
  std::uint64_t id = 0;  // scid or node id
  unsigned direction = 0;

  bool operator==(const DedupKey&) const = default;
};

DedupKey dedup_key(const GossipMessage& msg);

/// Wire sizes per kind. Only the update size is pinned by measurement; the
/// announcement sizes approximate their encodings.
struct WireSizes {
  std::uint32_t channel_update = 128;
  std::uint32_t node_announcement = 140;
  std::uint32_t channel_announcement = 430;
  std::uint32_t inventory_item = 8;

  std::uint32_t of(MessageKind kind) const;
};

inline constexpr WireSizes kDefaultWireSizes{};

std::uint32_t wire_size(const GossipMessage& msg, const WireSizes& sizes = kDefaultWireSizes);
inline std::uint32_t inventory_size(const WireSizes& sizes = kDefaultWireSizes) {
  return sizes.inventory_item;
}

/// True iff a is strictly newer than b. Both must share a dedup key.
bool supersedes(const GossipMessage& a, const GossipMessage& b);

}  // namespace lngossip

template <>
struct std::hash<lngossip::DedupKey> {
  std::size_t operator()(const lngossip::DedupKey& k) const noexcept {
    std::uint64_t h = k.id * 0x9e3779b97f4a7c15ULL;
    h ^= (static_cast<std::uint64_t>(k.kind) << 1 | k.direction) + 0x632be59bd9b4e019ULL + (h << 6) +
         (h >> 2);
    return static_cast<std::size_t>(h);
  }
};
