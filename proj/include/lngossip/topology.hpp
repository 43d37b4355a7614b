#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "lngossip/rng.hpp"
#include "lngossip/time.hpp"

namespace lngossip {

/// Dense node index, assigned in snapshot file order.
using NodeId = std::uint32_t;
/// Short channel id.
using ChannelId = std::uint64_t;
/// Directed edge handle within one snapshot: channel_index * 2 + direction.
using EdgeIndex = std::uint32_t;

inline constexpr NodeId kNoNode = std::numeric_limits<NodeId>::max();

constexpr EdgeIndex make_edge(std::uint32_t channel_index, unsigned direction) {
  return channel_index * 2 + (direction & 1u);
}
constexpr std::uint32_t edge_channel(EdgeIndex e) { return e / 2; }
constexpr unsigned edge_direction(EdgeIndex e) { return e & 1u; }

struct ChannelPolicy {
  UnixSeconds timestamp = 0;
  bool disabled = false;
  std::uint16_t cltv_expiry_delta = 0;
  std::uint64_t htlc_minimum_msat = 0;
  std::optional<std::uint64_t> htlc_maximum_msat;
  std::uint64_t fee_base_msat = 0;
  std::uint64_t fee_proportional_millionths = 0;

  bool operator==(const ChannelPolicy&) const = default;

  bool equal_except_timestamp(const ChannelPolicy& other) const {
    ChannelPolicy copy = other;
    copy.timestamp = timestamp;
    return copy == *this;
  }
};

struct Channel {
  ChannelId scid = 0;
  NodeId a = 0;
  NodeId b = 0;
};

/// Policy change for one direction of a channel. Direction 0 is set by
/// endpoint a, direction 1 by endpoint b.
struct ChannelUpdate {
  ChannelId scid = 0;
  unsigned direction = 0;
  ChannelPolicy policy;
};

struct Adjacency {
  NodeId neighbor;
  EdgeIndex outgoing;  // edge from this node towards neighbor
};

/// Ground-truth channel graph. Immutable once finalized.
class NetworkSnapshot {
 public:
  NodeId add_node(std::string label = {});
  std::uint32_t add_channel(ChannelId scid, NodeId a, NodeId b);
  void set_policy(ChannelId scid, unsigned direction, const ChannelPolicy& policy);

  std::size_t node_count() const { return labels_.size(); }
  std::size_t channel_count() const { return channels_.size(); }
  std::size_t edge_count() const { return policies_.size(); }

  const std::string& label(NodeId n) const { return labels_.at(n); }
  const std::vector<Channel>& channels() const { return channels_; }
  const Channel& channel(std::uint32_t index) const { return channels_.at(index); }

  std::optional<std::uint32_t> find_channel(ChannelId scid) const;
  std::optional<EdgeIndex> find_edge(ChannelId scid, unsigned direction) const;

  const std::optional<ChannelPolicy>& policy(EdgeIndex e) const { return policies_.at(e); }
  ChannelId edge_scid(EdgeIndex e) const { return channels_[edge_channel(e)].scid; }
  NodeId edge_source(EdgeIndex e) const;
  NodeId edge_target(EdgeIndex e) const;

  /// Outgoing edges per node, in channel order.
  const std::vector<Adjacency>& adjacency(NodeId n) const { return adjacency_.at(n); }
  /// Distinct channel neighbors, ascending.
  const std::vector<NodeId>& neighbors(NodeId n) const { return neighbors_.at(n); }
  std::size_t degree(NodeId n) const { return neighbors_.at(n).size(); }

  /// Connected-component label per node (labels are the smallest member id).
  const std::vector<NodeId>& components() const { return component_; }
  std::size_t component_size(NodeId n) const { return component_size_.at(component_[n]); }

  /// Builds adjacency and component indexes. Must be called after the last
  /// mutation; loaders call it.
  void finalize();

 private:
  std::vector<std::string> labels_;
  std::vector<Channel> channels_;
  std::vector<std::optional<ChannelPolicy>> policies_;
  std::unordered_map<ChannelId, std::uint32_t> index_;
  std::vector<std::vector<Adjacency>> adjacency_;
  std::vector<std::vector<NodeId>> neighbors_;
  std::vector<NodeId> component_;
  std::unordered_map<NodeId, std::size_t> component_size_;
};

/// Snapshot file: JSON Lines with "node", "chan" and "policy" records.
NetworkSnapshot parse_snapshot(std::istream& in);
NetworkSnapshot load_snapshot(const std::filesystem::path& path);
void write_snapshot(std::ostream& out, const NetworkSnapshot& snapshot);

/// Mutable per-direction policy map seeded from a snapshot.
class PolicyMap {
 public:
  explicit PolicyMap(const NetworkSnapshot& snapshot);

  const ChannelPolicy* find(ChannelId scid, unsigned direction) const;
  const ChannelPolicy* find(EdgeIndex e) const {
    return policies_[e] ? &*policies_[e] : nullptr;
  }
  /// Updates that referenced a channel absent from the snapshot.
  std::size_t unknown_channel_updates() const { return unknown_; }

  friend bool apply_update(PolicyMap& view, const ChannelUpdate& update);

 private:
  const NetworkSnapshot* snapshot_;
  std::vector<std::optional<ChannelPolicy>> policies_;
  std::size_t unknown_ = 0;
};

/// True iff an incoming policy should replace the stored one.
inline bool is_newer(const ChannelPolicy* stored, const ChannelPolicy& incoming) {
  return stored == nullptr || incoming.timestamp > stored->timestamp;
}

/// Replaces the stored policy iff the update is strictly newer.
bool apply_update(PolicyMap& view, const ChannelUpdate& update);

/// Active-syncer relation used by staggered gossip.
struct GossipOverlay {
  std::vector<std::vector<NodeId>> syncers;      // peers a node receives gossip from
  std::vector<std::vector<NodeId>> subscribers;  // inverse relation, ascending
  std::vector<std::size_t> rotation_cursor;
  SimTime rotation_interval{0};
};

GossipOverlay build_overlay(const NetworkSnapshot& snapshot, std::size_t k, SimTime rotation,
                            Rng& rng);

struct SyncerSwap {
  NodeId node;
  NodeId removed;
  NodeId added;
};

/// Swaps the syncer at the node's round-robin position for a uniformly drawn
/// non-syncer neighbor. No-op when every neighbor is already a syncer.
std::optional<SyncerSwap> rotate_syncer(GossipOverlay& overlay, const NetworkSnapshot& snapshot,
                                        NodeId node, Rng& rng);

/// Checks the syncer/subscriber inverse relation by full scan.
bool overlay_consistent(const GossipOverlay& overlay);

/// Undirected random-peer connection graph (not tied to channels). Each node
/// opens min(k, n-1) outbound links; links are symmetric.
struct PeerOverlay {
  std::vector<std::vector<NodeId>> links;  // ascending per node
};

PeerOverlay build_peer_overlay(std::size_t node_count, std::size_t k, Rng& rng);

}  // namespace lngossip
