#include "lngossip/messages.hpp"

#include "lngossip/errors.hpp"

namespace lngossip {

const char* to_string(MessageKind kind) {
  switch (kind) {
    case MessageKind::ChannelAnnouncement: return "channel_announcement";
    case MessageKind::NodeAnnouncement: return "node_announcement";
    case MessageKind::ChannelUpdate: return "channel_update";
  }
  return "unknown";
}

UnixSeconds GossipMessage::timestamp() const {
  if (auto* u = std::get_if<ChannelUpdate>(&payload)) return u->policy.timestamp;
  if (auto* n = std::get_if<NodeAnnouncement>(&payload)) return n->timestamp;
  return 0;
}

DedupKey dedup_key(const GossipMessage& msg) {
  if (auto* u = std::get_if<ChannelUpdate>(&msg.payload)) {
    return {MessageKind::ChannelUpdate, u->scid, u->direction};
  }
  if (auto* n = std::get_if<NodeAnnouncement>(&msg.payload)) {
    return {MessageKind::NodeAnnouncement, n->node, 0};
  }
  return {MessageKind::ChannelAnnouncement, std::get<ChannelAnnouncement>(msg.payload).scid, 0};
}

std::uint32_t WireSizes::of(MessageKind kind) const {
  switch (kind) {
    case MessageKind::ChannelAnnouncement: return channel_announcement;
    case MessageKind::NodeAnnouncement: return node_announcement;
    case MessageKind::ChannelUpdate: return channel_update;
  }
  return 0;
}

std::uint32_t wire_size(const GossipMessage& msg, const WireSizes& sizes) {
  return sizes.of(msg.kind());
}

bool supersedes(const GossipMessage& a, const GossipMessage& b) {
  if (!(dedup_key(a) == dedup_key(b))) {
    throw ContractViolation("supersedes: messages have different dedup keys");
  }
  return a.timestamp() > b.timestamp();
}

}  // namespace lngossip
