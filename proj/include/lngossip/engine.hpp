#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <queue>
#include <unordered_map>
#include <vector>

#include "lngossip/messages.hpp"
#include "lngossip/metrics.hpp"
#include "lngossip/payments.hpp"
#include "lngossip/protocols.hpp"
#include "lngossip/rng.hpp"
#include "lngossip/time.hpp"
#include "lngossip/topology.hpp"
#include "lngossip/trace.hpp"

namespace lngossip {

enum class EventKind : std::uint8_t {
  MessageArrival,
  InventoryArrival,
  RequestArrival,
  StaggerTick,
  SubBatchSend,
  SyncerRotation,
  KeepAliveTick,
  ReconcileTick,
  PaymentAttempt,
  TraceInjection,
};

const char* to_string(EventKind kind);

struct Event {
  SimTime time{0};
  std::uint64_t seq = 0;
  EventKind kind = EventKind::MessageArrival;
  std::uint8_t flags = 0;
  NodeId node = kNoNode;  // handling node
  NodeId peer = kNoNode;  // sender, where there is one
  std::uint32_t item = 0; // message, payment, link or batch slot
  std::uint32_t bytes = 0;
};

/// Min-queue on (time, seq).
class EventQueue {
 public:
  /// Assigns the next seq. Throws ContractViolation if e.time < now().
  void schedule(Event e);
  /// Removes the next event and advances the clock to its time.
  Event pop();
  const Event& top() const { return heap_.top(); }
  bool empty() const { return heap_.empty(); }
  std::size_t size() const { return heap_.size(); }
  SimTime now() const { return now_; }

 private:
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      return a.time != b.time ? a.time > b.time : a.seq > b.seq;
    }
  };
  std::priority_queue<Event, std::vector<Event>, Later> heap_;
  std::uint64_t next_seq_ = 0;
  SimTime now_{0};
};

struct EngineOptions {
  ProtocolSpec protocol;
  std::uint64_t seed = 1;
  double bandwidth_bytes_per_second = 1e6;
  SimTime latency = SimTime{100'000};
  WireSizes sizes = kDefaultWireSizes;
  /// Unix time at simulation time zero.
  UnixSeconds epoch = 1'600'000'000;
  /// Let nodes originate keep-alives. Replayed traces already carry them.
  bool originate_keepalives = false;
  /// Apply the stale-policy prune rule when routing payments.
  bool prune_stale_routes = false;
};

/// One reconciliation round as seen by an observer. Held sets count
/// messages in flight to the node; all lists are sorted.
struct ReconcileRecord {
  NodeId a = kNoNode;
  NodeId b = kNoNode;
  SimTime time{0};
  std::vector<MessageId> fresh_a, fresh_b;  // the sets that were reconciled
  std::vector<MessageId> before_a, before_b, after_a, after_b;
};

class Simulation {
 public:
  Simulation(std::shared_ptr<const NetworkSnapshot> snapshot, EngineOptions options);

  /// Attributes an origin to every record and schedules its injection.
  void load_trace(const Trace& trace);
  /// Schedules a single injection at `at` from `origin`.
  MessageId inject(SimTime at, MessagePayload payload, NodeId origin);
  void add_payments(const std::vector<PaymentAttempt>& attempts);

  /// Processes every event with time <= t_end and builds the report.
  RunReport run(SimTime t_end);

  /// Sends msg from -> to at the current clock and schedules its arrival.
  /// Returns the arrival time.
  SimTime deliver(NodeId from, NodeId to, MessageId msg, std::uint32_t bytes,
                  EventKind arrival = EventKind::MessageArrival, std::uint8_t flags = 0);

  SimTime now() const { return queue_.now(); }
  const NetworkSnapshot& snapshot() const { return *snapshot_; }
  const EngineOptions& options() const { return opts_; }

  std::size_t message_count() const { return messages_.size(); }
  const GossipMessage& message(MessageId id) const { return messages_.at(id); }
  /// Copies received, including duplicates and inventory announcements.
  std::uint32_t seen_count(NodeId node, MessageId msg) const;
  std::optional<SimTime> first_seen(NodeId node, MessageId msg) const;
  /// Holds the full message (received or originated).
  bool has_message(NodeId node, MessageId msg) const;
  std::optional<SimTime> first_broadcast(MessageId msg) const;

  std::uint64_t bytes_in(NodeId n) const { return nodes_.at(n).bytes_in; }
  std::uint64_t bytes_out(NodeId n) const { return nodes_.at(n).bytes_out; }
  std::uint64_t pending_in_bytes(NodeId n) const { return nodes_.at(n).pending_in; }
  std::uint64_t total_bytes() const { return total_bytes_; }

  const ChannelPolicy* view_policy(NodeId node, EdgeIndex e) const;
  const ChannelPolicy* truth_policy(EdgeIndex e) const { return truth_.find(e); }

  const GossipOverlay& overlay() const { return overlay_; }
  const PeerOverlay& peers() const { return peers_; }
  const SpanningTree& tree() const { return tree_; }
  const std::vector<PaymentOutcome>& payment_outcomes() const { return payment_outcomes_; }
  const RunCounters& counters() const { return counters_; }

  void on_event(std::function<void(const Event&)> observer) { event_observer_ = std::move(observer); }
  void on_reconcile(std::function<void(const ReconcileRecord&)> observer) {
    reconcile_observer_ = std::move(observer);
  }

 private:
  static constexpr MessageId kNoMessage = std::numeric_limits<MessageId>::max();
  static constexpr std::uint8_t kHas = 1;        // full message held
  static constexpr std::uint8_t kRequested = 2;  // full copy in flight
  static constexpr std::uint8_t kResponse = 1;   // arrival flag: answer to a request

  struct MessageTrack {
    std::vector<std::int64_t> first_seen;  // microseconds, -1 if never
    std::vector<std::uint8_t> seen;
    std::vector<std::uint8_t> state;
    std::int64_t first_broadcast = -1;
  };

  struct NodeState {
    BroadcastQueue queue;
    std::uint64_t pending_in = 0;
    std::uint64_t bytes_in = 0;
    std::uint64_t bytes_out = 0;
    std::vector<MessageId> view;  // per updated-edge slot
    std::unordered_map<EdgeIndex, TokenBucket> buckets;
    std::vector<MessageId> log;   // reconciliation: acquisition order
    std::vector<NodeId> log_from;
  };

  struct Link {
    NodeId a, b;
    std::size_t cursor_a = 0, cursor_b = 0;
    bool a_initiates = true;
  };

  void start();
  void dispatch(const Event& e);

  MessageId create_message(MessagePayload payload, NodeId origin, SimTime at);
  void handle_injection(NodeId origin, MessageId msg);
  void handle_arrival(const Event& e);
  void handle_inventory(const Event& e);
  void handle_request(const Event& e);
  void handle_stagger(NodeId node);
  void handle_sub_batch(NodeId node, std::uint32_t slot);
  void handle_rotation();
  void handle_keepalive(NodeId node);
  void handle_reconcile(std::uint32_t link);
  void handle_payment(std::uint32_t index);

  /// First full copy at node: updates the view and relays per strategy.
  void accept(NodeId node, MessageId msg, const std::vector<NodeId>& from);
  void send(NodeId from, NodeId to, MessageId msg);
  void mark_has(NodeId node, MessageId msg);
  void append_log(NodeId node, MessageId msg, NodeId from);
  std::vector<MessageId> held(NodeId node) const;

  void store_view(NodeId node, EdgeIndex edge, MessageId msg);
  UnixSeconds unix_now() const;

  RunReport finalize() const;

  std::shared_ptr<const NetworkSnapshot> snapshot_;
  EngineOptions opts_;
  EventQueue queue_;
  PolicyMap truth_;

  std::vector<GossipMessage> messages_;
  std::vector<MessageTrack> tracks_;
  std::vector<std::optional<EdgeIndex>> message_edge_;
  std::unordered_map<DedupKey, std::vector<MessageId>> by_key_;
  std::vector<NodeState> nodes_;

  // edge -> slot in NodeState::view, assigned on first update
  std::vector<std::uint32_t> edge_slot_;
  std::uint32_t slot_count_ = 0;

  GossipOverlay overlay_;
  PeerOverlay peers_;
  SpanningTree tree_;
  std::vector<Link> links_;
  // (subscriber << 32 | syncer) -> time the subscription began
  std::unordered_map<std::uint64_t, SimTime> subscribed_at_;
  // (node << 32 | msg) -> peers that announced msg while it was requested
  std::unordered_map<std::uint64_t, std::vector<NodeId>> announcers_;

  std::vector<SubBatch> batch_slots_;
  std::vector<std::uint32_t> free_slots_;

  std::vector<PaymentAttempt> payments_;
  std::vector<PaymentOutcome> payment_outcomes_;

  std::vector<std::uint64_t> waiting_us_;
  RunCounters counters_;
  std::uint64_t total_bytes_ = 0;
  bool started_ = false;

  Rng origin_rng_;
  Rng phase_rng_;
  Rng rotation_rng_;

  std::function<void(const Event&)> event_observer_;
  std::function<void(const ReconcileRecord&)> reconcile_observer_;
};

/// Inputs shared by every run of a comparison.
struct Workload {
  std::shared_ptr<const NetworkSnapshot> snapshot;
  Trace trace;
  std::vector<PaymentAttempt> payments;
  SimTime duration{0};
  /// Extra time after `duration` for in-flight gossip to settle.
  SimTime drain = whole_seconds(1800);
};

/// Builds a simulation for `options`, installs the workload and runs it to
/// duration + drain.
RunReport run_experiment(const Workload& workload, const EngineOptions& options);

}  // namespace lngossip
