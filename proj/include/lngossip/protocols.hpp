#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "lngossip/messages.hpp"
#include "lngossip/time.hpp"
#include "lngossip/topology.hpp"

namespace lngossip {

enum class Strategy : std::uint8_t { Staggered, Flooding, SpanningTree, Reconciliation };

std::string_view to_string(Strategy s);

struct RateLimit {
  bool enabled = false;
  SimTime refill_interval = whole_seconds(60);
  std::uint32_t burst = 10;
};

struct KeepAlivePolicy {
  SimTime check_interval = whole_seconds(30 * 60);
  std::uint64_t staleness_seconds = 86'400;
};

/// Every knob a run's gossip strategy reads.
struct ProtocolSpec {
  std::string name;
  Strategy strategy = Strategy::Staggered;
  bool inventory_mode = false;

  // staggered broadcast
  SimTime stagger_interval = whole_seconds(90);
  SimTime sub_batch_delay = whole_seconds(5);
  std::size_t min_batch_size = 10;
  std::size_t max_batches = 18;

  // overlay: active syncers (staggered) or random peer links (flooding, reconciliation)
  std::size_t syncer_count = 3;
  SimTime rotation_interval = whole_seconds(20 * 60);

  RateLimit rate_limit;
  KeepAlivePolicy keepalive;
  /// Drop relay of keep-alives that arrive less than a day after their predecessor.
  bool keepalive_relay_filter = false;
  std::uint64_t prune_after_seconds = 14 * 86'400;

  // set reconciliation
  SimTime reconcile_interval = whole_seconds(8);
  std::uint32_t sketch_element_bytes = 8;
  double diff_margin = 1.0;

  NodeId tree_root = 0;
};

/// Preset names, in the order they are listed to users.
const std::vector<std::string>& preset_names();

/// Throws std::invalid_argument for unknown names.
ProtocolSpec preset(std::string_view name);

/// Applies one "key=value" override; throws std::invalid_argument on an
/// unknown key or unparsable value.
void apply_override(ProtocolSpec& spec, std::string_view assignment);

struct Batching {
  std::size_t batch_size = 0;
  std::size_t num_batches = 0;
  bool operator==(const Batching&) const = default;
};

/// Sub-batch sizing: batch_size = max(min_batch, ceil(n / max_batches)),
/// num_batches = ceil(n / batch_size). With the defaults this is LND's
/// trickle schedule, capped at 18 batches.
Batching lnd_batching(std::size_t n, std::size_t min_batch = 10, std::size_t max_batches = 18);

struct QueuedMessage {
  MessageId msg = 0;
  UnixSeconds timestamp = 0;
  std::uint64_t seq = 0;
  SimTime enqueued_at{0};
  bool own = false;  // originated by the queue's owner
  std::vector<NodeId> received_from;
};

/// Per-node staggered broadcast queue; one live entry per dedup key.
class BroadcastQueue {
 public:
  /// stagger_enqueue. Keeps the newer of the incumbent and msg; equal
  /// timestamps keep the incumbent. Returns true if msg was stored.
  bool enqueue(const GossipMessage& msg, SimTime now, bool own, NodeId from = kNoNode);

  /// Records another peer that delivered a queued message. No-op if msg is
  /// not queued.
  void note_received_from(MessageId msg, NodeId from);

  bool contains(MessageId msg) const { return by_id_.contains(msg); }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  /// Removes and returns every entry in enqueue order.
  std::vector<QueuedMessage> drain();

 private:
  std::unordered_map<DedupKey, QueuedMessage> entries_;
  std::unordered_map<MessageId, DedupKey> by_id_;
  std::uint64_t next_seq_ = 0;
};

struct SubBatch {
  SimTime send_time{0};
  std::vector<QueuedMessage> messages;
};

/// Splits and clears the queue into sub-batches sent sub_batch_delay apart,
/// starting at now.
std::vector<SubBatch> stagger_flush(BroadcastQueue& queue, SimTime now, const ProtocolSpec& spec);

/// Per-edge update budget; refills one token per interval up to capacity.
class TokenBucket {
 public:
  TokenBucket(std::uint32_t capacity, SimTime refill_interval, SimTime now)
      : tokens_(capacity), capacity_(capacity), refill_interval_(refill_interval), last_refill_(now) {}

  /// rate_limit_admit
  bool admit(SimTime now);
  double tokens() const { return tokens_; }

 private:
  double tokens_;
  std::uint32_t capacity_;
  SimTime refill_interval_;
  SimTime last_refill_;
};

/// Keep-alives due for a node's own edges whose last update is at least
/// staleness_seconds old. `latest` returns the node's current policy per edge.
std::vector<ChannelUpdate> keepalive_tick(
    const NetworkSnapshot& snapshot, NodeId node, UnixSeconds now,
    const std::function<const ChannelPolicy*(EdgeIndex)>& latest, const ProtocolSpec& spec);

/// LND relays a keep-alive only if it refreshes a policy at least a day old.
bool keepalive_relay_admit(UnixSeconds prev_ts, UnixSeconds new_ts);

/// Breadth-first spanning forest over the channel graph. The root's
/// component is grown from root; any other component from its smallest node.
struct SpanningTree {
  NodeId root = 0;
  std::vector<NodeId> parent;                        // kNoNode for roots
  std::vector<std::vector<NodeId>> tree_neighbors;   // ascending

  std::size_t edge_count() const;
};

SpanningTree build_tree(const NetworkSnapshot& snapshot, NodeId root);

/// Sketch capacity estimate from the two fresh-set sizes.
std::size_t sketch_capacity(std::size_t size_a, std::size_t size_b, double margin);

struct ReconcileOutcome {
  std::size_t difference = 0;      // |A xor B| of the fresh sets
  std::size_t attempts = 0;        // sketches exchanged, >= 1
  std::size_t sketch_elements = 0; // summed over attempts
  std::vector<MessageId> to_a;     // ids b sends to a
  std::vector<MessageId> to_b;     // ids a sends to b
};

/// One reconciliation between two peers. `fresh_*` hold the ids each side
/// acquired since their last round (excluding ids learned from the other);
/// `*_has` report full set membership. Failed decodes retry with doubled
/// capacity until the difference fits.
ReconcileOutcome reconcile_round(std::span<const MessageId> fresh_a,
                                 std::span<const MessageId> fresh_b,
                                 const std::function<bool(MessageId)>& a_has,
                                 const std::function<bool(MessageId)>& b_has,
                                 const ProtocolSpec& spec);

}  // namespace lngossip
