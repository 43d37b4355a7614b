#include "lngossip/engine.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lngossip/errors.hpp"
#include "lngossip/workload.hpp"

namespace lngossip {

namespace {

constexpr std::uint32_t kNoSlot = std::numeric_limits<std::uint32_t>::max();
constexpr std::uint8_t kReconcileTransfer = 2;

std::uint64_t pair_key(std::uint32_t hi, std::uint32_t lo) {
  return static_cast<std::uint64_t>(hi) << 32 | lo;
}

bool contains(const std::vector<NodeId>& v, NodeId n) {
  return std::find(v.begin(), v.end(), n) != v.end();
}

SimTime random_phase(Rng& rng, SimTime interval) {
  if (interval.count() <= 0) return SimTime{0};
  return SimTime{static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(interval.count())))};
}

}  // namespace

const char* to_string(EventKind kind) {
  switch (kind) {
    case EventKind::MessageArrival: return "MessageArrival";
    case EventKind::InventoryArrival: return "InventoryArrival";
    case EventKind::RequestArrival: return "RequestArrival";
    case EventKind::StaggerTick: return "StaggerTick";
    case EventKind::SubBatchSend: return "SubBatchSend";
    case EventKind::SyncerRotation: return "SyncerRotation";
    case EventKind::KeepAliveTick: return "KeepAliveTick";
    case EventKind::ReconcileTick: return "ReconcileTick";
    case EventKind::PaymentAttempt: return "PaymentAttempt";
    case EventKind::TraceInjection: return "TraceInjection";
  }
  return "?";
}

void EventQueue::schedule(Event e) {
  if (e.time < now_) {
    throw ContractViolation("event scheduled at " + std::to_string(to_seconds(e.time)) +
                            " s, before clock " + std::to_string(to_seconds(now_)) + " s");
  }
  e.seq = next_seq_++;
  heap_.push(e);
}

Event EventQueue::pop() {
  Event e = heap_.top();
  heap_.pop();
  now_ = e.time;
  return e;
}

Simulation::Simulation(std::shared_ptr<const NetworkSnapshot> snapshot, EngineOptions options)
    : snapshot_(std::move(snapshot)),
      opts_(std::move(options)),
      truth_(*snapshot_),
      nodes_(snapshot_->node_count()),
      edge_slot_(snapshot_->edge_count(), kNoSlot),
      origin_rng_(Rng::stream(opts_.seed, "workload/origin")),
      phase_rng_(Rng::stream(opts_.seed, "engine/phase")),
      rotation_rng_(Rng::stream(opts_.seed, "engine/rotation")) {
  const auto& spec = opts_.protocol;
  const auto n = snapshot_->node_count();
  switch (spec.strategy) {
    case Strategy::Staggered: {
      Rng rng = Rng::stream(opts_.seed, "engine/overlay");
      overlay_ = build_overlay(*snapshot_, spec.syncer_count, spec.rotation_interval, rng);
      break;
    }
    case Strategy::Flooding:
    case Strategy::Reconciliation: {
      Rng rng = Rng::stream(opts_.seed, "engine/peers");
      peers_ = build_peer_overlay(n, spec.syncer_count, rng);
      for (NodeId u = 0; u < n; ++u) {
        for (NodeId v : peers_.links[u]) {
          if (u < v) links_.push_back({u, v});
        }
      }
      break;
    }
    case Strategy::SpanningTree:
      if (n > 0) tree_ = build_tree(*snapshot_, std::min<NodeId>(spec.tree_root, static_cast<NodeId>(n - 1)));
      break;
  }
}

MessageId Simulation::create_message(MessagePayload payload, NodeId origin, SimTime at) {
  const auto id = static_cast<MessageId>(messages_.size());
  GossipMessage msg{id, origin, at, std::move(payload)};
  std::optional<EdgeIndex> edge;
  if (const auto* u = std::get_if<ChannelUpdate>(&msg.payload)) {
    edge = snapshot_->find_edge(u->scid, u->direction);
  }
  by_key_[dedup_key(msg)].push_back(id);
  messages_.push_back(std::move(msg));
  message_edge_.push_back(edge);
  const auto n = nodes_.size();
  tracks_.push_back({std::vector<std::int64_t>(n, -1), std::vector<std::uint8_t>(n, 0),
                     std::vector<std::uint8_t>(n, 0), -1});
  return id;
}

MessageId Simulation::inject(SimTime at, MessagePayload payload, NodeId origin) {
  if (origin >= nodes_.size()) throw std::invalid_argument("inject: origin out of range");
  const auto id = create_message(std::move(payload), origin, at);
  queue_.schedule({at, 0, EventKind::TraceInjection, 0, origin, kNoNode, id, 0});
  return id;
}

void Simulation::load_trace(const Trace& trace) {
  for (const auto& rec : trace.records) {
    inject(rec.inject_time, rec.payload, attribute_origin(rec, *snapshot_, origin_rng_));
  }
}

void Simulation::add_payments(const std::vector<PaymentAttempt>& attempts) {
  for (const auto& att : attempts) {
    if (att.source >= nodes_.size() || att.destination >= nodes_.size()) {
      throw std::invalid_argument("payment endpoint out of range");
    }
    const auto idx = static_cast<std::uint32_t>(payments_.size());
    payments_.push_back(att);
    queue_.schedule({att.time, 0, EventKind::PaymentAttempt, 0, att.source, kNoNode, idx, 0});
  }
}

void Simulation::start() {
  if (started_) return;
  started_ = true;
  const auto& spec = opts_.protocol;
  const auto n = static_cast<NodeId>(nodes_.size());
  const SimTime t0 = queue_.now();
  if (spec.strategy == Strategy::Staggered) {
    for (NodeId v = 0; v < n; ++v) {
      queue_.schedule({t0 + random_phase(phase_rng_, spec.stagger_interval), 0, EventKind::StaggerTick, 0, v});
    }
    if (spec.rotation_interval.count() > 0 && spec.syncer_count > 0) {
      queue_.schedule({t0 + spec.rotation_interval, 0, EventKind::SyncerRotation});
    }
  }
  if (spec.strategy == Strategy::Reconciliation) {
    for (std::uint32_t l = 0; l < links_.size(); ++l) {
      links_[l].a_initiates = l % 2 == 0;
      queue_.schedule({t0 + random_phase(phase_rng_, spec.reconcile_interval), 0,
                       EventKind::ReconcileTick, 0, kNoNode, kNoNode, l});
    }
  }
  if (opts_.originate_keepalives && spec.keepalive.check_interval.count() > 0) {
    for (NodeId v = 0; v < n; ++v) {
      queue_.schedule({t0 + random_phase(phase_rng_, spec.keepalive.check_interval), 0,
                       EventKind::KeepAliveTick, 0, v});
    }
  }
}

RunReport Simulation::run(SimTime t_end) {
  start();
  while (!queue_.empty() && queue_.top().time <= t_end) {
    const Event e = queue_.pop();
    ++counters_.events;
    if (event_observer_) event_observer_(e);
    try {
      dispatch(e);
    } catch (const std::exception& ex) {
      throw std::runtime_error(std::string("event ") + to_string(e.kind) + " at " +
                               std::to_string(to_seconds(e.time)) + " s (node " +
                               std::to_string(e.node) + ", item " + std::to_string(e.item) +
                               "): " + ex.what());
    }
  }
  return finalize();
}

void Simulation::dispatch(const Event& e) {
  switch (e.kind) {
    case EventKind::MessageArrival: handle_arrival(e); break;
    case EventKind::InventoryArrival: handle_inventory(e); break;
    case EventKind::RequestArrival: handle_request(e); break;
    case EventKind::StaggerTick: handle_stagger(e.node); break;
    case EventKind::SubBatchSend: handle_sub_batch(e.node, e.item); break;
    case EventKind::SyncerRotation: handle_rotation(); break;
    case EventKind::KeepAliveTick: handle_keepalive(e.node); break;
    case EventKind::ReconcileTick: handle_reconcile(e.item); break;
    case EventKind::PaymentAttempt: handle_payment(e.item); break;
    case EventKind::TraceInjection: handle_injection(e.node, e.item); break;
  }
}

SimTime Simulation::deliver(NodeId from, NodeId to, MessageId msg, std::uint32_t bytes,
                            EventKind arrival, std::uint8_t flags) {
  auto& receiver = nodes_.at(to);
  receiver.pending_in += bytes;
  nodes_.at(from).bytes_out += bytes;
  total_bytes_ += bytes;
  const auto transfer = SimTime{static_cast<std::int64_t>(
      std::llround(static_cast<double>(receiver.pending_in) * 1e6 / opts_.bandwidth_bytes_per_second))};
  const SimTime at = queue_.now() + opts_.latency + transfer;
  queue_.schedule({at, 0, arrival, flags, to, from, msg, bytes});
  return at;
}

void Simulation::send(NodeId from, NodeId to, MessageId msg) {
  if (opts_.protocol.inventory_mode) {
    deliver(from, to, msg, inventory_size(opts_.sizes), EventKind::InventoryArrival);
  } else {
    deliver(from, to, msg, wire_size(messages_[msg], opts_.sizes));
  }
}

void Simulation::mark_has(NodeId node, MessageId msg) {
  auto& track = tracks_[msg];
  track.state[node] |= kHas;
  const auto now = queue_.now().count();
  if (track.first_seen[node] < 0) track.first_seen[node] = now;
  // an older message for the same key is moot once a newer one is here
  const auto& m = messages_[msg];
  const auto ts = m.timestamp();
  for (MessageId other : by_key_[dedup_key(m)]) {
    if (other == msg || messages_[other].timestamp() >= ts) continue;
    auto& fs = tracks_[other].first_seen[node];
    if (fs < 0) fs = now;
  }
}

void Simulation::append_log(NodeId node, MessageId msg, NodeId from) {
  nodes_[node].log.push_back(msg);
  nodes_[node].log_from.push_back(from);
}

UnixSeconds Simulation::unix_now() const {
  return opts_.epoch + static_cast<UnixSeconds>(queue_.now().count() / 1'000'000);
}

const ChannelPolicy* Simulation::view_policy(NodeId node, EdgeIndex e) const {
  const auto slot = edge_slot_.at(e);
  const auto& view = nodes_.at(node).view;
  if (slot != kNoSlot && slot < view.size() && view[slot] != kNoMessage) {
    return &std::get<ChannelUpdate>(messages_[view[slot]].payload).policy;
  }
  const auto& p = snapshot_->policy(e);
  return p ? &*p : nullptr;
}

void Simulation::handle_injection(NodeId origin, MessageId id) {
  const auto& msg = messages_[id];
  mark_has(origin, id);
  if (const auto* u = std::get_if<ChannelUpdate>(&msg.payload)) {
    apply_update(truth_, *u);
    if (const auto edge = message_edge_[id]) {
      if (!is_newer(view_policy(origin, *edge), u->policy)) {
        ++counters_.stale_injections;
        return;
      }
      store_view(origin, *edge, id);
    }
  }
  auto& track = tracks_[id];
  switch (opts_.protocol.strategy) {
    case Strategy::Staggered:
      nodes_[origin].queue.enqueue(msg, queue_.now(), true);
      break;
    case Strategy::Flooding:
      track.first_broadcast = queue_.now().count();
      for (NodeId w : peers_.links[origin]) send(origin, w, id);
      break;
    case Strategy::SpanningTree:
      track.first_broadcast = queue_.now().count();
      for (NodeId w : tree_.tree_neighbors[origin]) send(origin, w, id);
      break;
    case Strategy::Reconciliation:
      track.first_broadcast = queue_.now().count();
      append_log(origin, id, kNoNode);
      break;
  }
}

void Simulation::store_view(NodeId node, EdgeIndex edge, MessageId msg) {
  auto& slot = edge_slot_[edge];
  if (slot == kNoSlot) slot = slot_count_++;
  auto& view = nodes_[node].view;
  if (view.size() <= slot) view.resize(slot + 1, kNoMessage);
  view[slot] = msg;
}

void Simulation::handle_arrival(const Event& e) {
  const NodeId v = e.node;
  const MessageId m = e.item;
  auto& node = nodes_[v];
  node.pending_in -= e.bytes;
  node.bytes_in += e.bytes;

  auto& track = tracks_[m];
  const bool response = e.flags & kResponse;
  if (!response && track.seen[v] < 255) ++track.seen[v];
  track.state[v] &= static_cast<std::uint8_t>(~kRequested);

  if (track.state[v] & kHas) {
    if (opts_.protocol.strategy == Strategy::Staggered) node.queue.note_received_from(m, e.peer);
    return;
  }
  mark_has(v, m);
  std::vector<NodeId> from{e.peer};
  if (opts_.protocol.strategy == Strategy::Reconciliation) {
    // the id set is reconciled whether or not the update was applied
    accept(v, m, from);
    append_log(v, m, e.peer);
    return;
  }
  if (response) {
    auto it = announcers_.find(pair_key(v, m));
    if (it != announcers_.end()) {
      from = std::move(it->second);
      announcers_.erase(it);
    }
  }
  accept(v, m, from);
}

void Simulation::handle_inventory(const Event& e) {
  const NodeId v = e.node;
  const MessageId m = e.item;
  auto& node = nodes_[v];
  node.pending_in -= e.bytes;
  node.bytes_in += e.bytes;

  auto& track = tracks_[m];
  if (track.seen[v] < 255) ++track.seen[v];
  if (track.state[v] & kHas) {
    if (opts_.protocol.strategy == Strategy::Staggered) node.queue.note_received_from(m, e.peer);
    return;
  }
  if (track.state[v] & kRequested) {
    announcers_[pair_key(v, m)].push_back(e.peer);
    return;
  }
  track.state[v] |= kRequested;
  announcers_[pair_key(v, m)] = {e.peer};
  queue_.schedule({queue_.now() + opts_.latency, 0, EventKind::RequestArrival, 0, e.peer, v, m});
}

void Simulation::handle_request(const Event& e) {
  if (!has_message(e.node, e.item)) {
    throw ContractViolation("node " + std::to_string(e.node) + " asked for message " +
                            std::to_string(e.item) + " it never announced");
  }
  deliver(e.node, e.peer, e.item, wire_size(messages_[e.item], opts_.sizes), EventKind::MessageArrival,
          kResponse);
}

void Simulation::accept(NodeId v, MessageId m, const std::vector<NodeId>& from) {
  const auto& spec = opts_.protocol;
  const auto& msg = messages_[m];
  if (const auto* u = std::get_if<ChannelUpdate>(&msg.payload)) {
    if (const auto edge = message_edge_[m]) {
      const ChannelPolicy* prev = view_policy(v, *edge);
      if (!is_newer(prev, u->policy)) {
        ++counters_.stale_dropped;
        return;
      }
      if (spec.rate_limit.enabled) {
        auto& buckets = nodes_[v].buckets;
        auto it = buckets.find(*edge);
        if (it == buckets.end()) {
          it = buckets.emplace(*edge, TokenBucket(spec.rate_limit.burst, spec.rate_limit.refill_interval,
                                                  queue_.now())).first;
        }
        if (!it->second.admit(queue_.now())) {
          ++counters_.rate_limited;
          return;
        }
      }
      const bool keepalive = prev != nullptr && prev->equal_except_timestamp(u->policy);
      const bool suppress = spec.keepalive_relay_filter && keepalive &&
                            !keepalive_relay_admit(prev->timestamp, u->policy.timestamp);
      store_view(v, *edge, m);
      if (suppress) {
        ++counters_.keepalives_not_relayed;
        return;
      }
    }
  }

  switch (spec.strategy) {
    case Strategy::Staggered: {
      auto& queue = nodes_[v].queue;
      queue.enqueue(msg, queue_.now(), false, from.front());
      for (std::size_t i = 1; i < from.size(); ++i) queue.note_received_from(m, from[i]);
      break;
    }
    case Strategy::Flooding:
      for (NodeId w : peers_.links[v]) {
        if (!contains(from, w)) send(v, w, m);
      }
      break;
    case Strategy::SpanningTree:
      for (NodeId w : tree_.tree_neighbors[v]) {
        if (!contains(from, w)) send(v, w, m);
      }
      break;
    case Strategy::Reconciliation:
      break;
  }
}

void Simulation::handle_stagger(NodeId v) {
  const auto& spec = opts_.protocol;
  auto& queue = nodes_[v].queue;
  if (!queue.empty()) {
    for (auto& batch : stagger_flush(queue, queue_.now(), spec)) {
      std::uint32_t slot;
      if (free_slots_.empty()) {
        slot = static_cast<std::uint32_t>(batch_slots_.size());
        batch_slots_.emplace_back();
      } else {
        slot = free_slots_.back();
        free_slots_.pop_back();
      }
      const SimTime at = batch.send_time;
      batch_slots_[slot] = std::move(batch);
      queue_.schedule({at, 0, EventKind::SubBatchSend, 0, v, kNoNode, slot});
    }
  }
  queue_.schedule({queue_.now() + spec.stagger_interval, 0, EventKind::StaggerTick, 0, v});
}

void Simulation::handle_sub_batch(NodeId v, std::uint32_t slot) {
  SubBatch batch = std::move(batch_slots_[slot]);
  batch_slots_[slot] = {};
  free_slots_.push_back(slot);
  const auto now = queue_.now();
  for (const auto& q : batch.messages) {
    waiting_us_.push_back(static_cast<std::uint64_t>((now - q.enqueued_at).count()));
    const auto& msg = messages_[q.msg];
    if (q.own) {
      auto& fb = tracks_[q.msg].first_broadcast;
      if (fb < 0) fb = now.count();
      for (NodeId w : snapshot_->neighbors(v)) {
        if (!contains(q.received_from, w)) send(v, w, q.msg);
      }
      continue;
    }
    for (NodeId w : overlay_.subscribers[v]) {
      if (contains(q.received_from, w)) continue;
      // a fresh subscription only asks for gossip newer than its start
      auto it = subscribed_at_.find(pair_key(w, v));
      if (it != subscribed_at_.end() && msg.created_at < it->second) continue;
      send(v, w, q.msg);
    }
  }
}

void Simulation::handle_rotation() {
  const auto now = queue_.now();
  for (NodeId v = 0; v < nodes_.size(); ++v) {
    if (auto swap = rotate_syncer(overlay_, *snapshot_, v, rotation_rng_)) {
      subscribed_at_.erase(pair_key(v, swap->removed));
      subscribed_at_[pair_key(v, swap->added)] = now;
    }
  }
  queue_.schedule({now + opts_.protocol.rotation_interval, 0, EventKind::SyncerRotation});
}

void Simulation::handle_keepalive(NodeId v) {
  const auto& spec = opts_.protocol;
  auto latest = [this](EdgeIndex e) { return truth_.find(e); };
  for (auto& upd : keepalive_tick(*snapshot_, v, unix_now(), latest, spec)) {
    const auto id = create_message(upd, v, queue_.now());
    ++counters_.keepalives_emitted;
    handle_injection(v, id);
  }
  queue_.schedule({queue_.now() + spec.keepalive.check_interval, 0, EventKind::KeepAliveTick, 0, v});
}

std::vector<MessageId> Simulation::held(NodeId node) const {
  std::vector<MessageId> out;
  for (MessageId m = 0; m < tracks_.size(); ++m) {
    if (tracks_[m].state[node] & (kHas | kRequested)) out.push_back(m);
  }
  return out;
}

void Simulation::handle_reconcile(std::uint32_t index) {
  const auto& spec = opts_.protocol;
  auto& link = links_[index];
  const NodeId a = link.a;
  const NodeId b = link.b;

  auto fresh = [this](NodeId self, NodeId peer, std::size_t cursor) {
    const auto& n = nodes_[self];
    std::vector<MessageId> out;
    for (std::size_t i = cursor; i < n.log.size(); ++i) {
      if (n.log_from[i] != peer) out.push_back(n.log[i]);
    }
    return out;
  };
  const auto fresh_a = fresh(a, b, link.cursor_a);
  const auto fresh_b = fresh(b, a, link.cursor_b);
  auto holds = [this](NodeId n) {
    return [this, n](MessageId m) { return (tracks_[m].state[n] & (kHas | kRequested)) != 0; };
  };

  ReconcileRecord record;
  if (reconcile_observer_) {
    record.a = a;
    record.b = b;
    record.time = queue_.now();
    record.fresh_a = fresh_a;
    record.fresh_b = fresh_b;
    std::sort(record.fresh_a.begin(), record.fresh_a.end());
    std::sort(record.fresh_b.begin(), record.fresh_b.end());
    record.before_a = held(a);
    record.before_b = held(b);
  }

  const auto outcome = reconcile_round(fresh_a, fresh_b, holds(a), holds(b), spec);

  const NodeId initiator = link.a_initiates ? a : b;
  const NodeId responder = link.a_initiates ? b : a;
  auto charge = [this](NodeId from, NodeId to, std::uint64_t bytes) {
    nodes_[from].bytes_out += bytes;
    nodes_[to].bytes_in += bytes;
    total_bytes_ += bytes;
  };
  charge(responder, initiator, outcome.sketch_elements * spec.sketch_element_bytes);

  auto transfer = [&](NodeId holder, NodeId receiver, const std::vector<MessageId>& ids) {
    if (ids.empty()) return;
    charge(receiver, holder, ids.size() * opts_.sizes.inventory_item);
    for (MessageId m : ids) {
      tracks_[m].state[receiver] |= kRequested;
      deliver(holder, receiver, m, wire_size(messages_[m], opts_.sizes), EventKind::MessageArrival,
              kReconcileTransfer);
    }
  };
  transfer(a, b, outcome.to_b);
  transfer(b, a, outcome.to_a);

  link.cursor_a = nodes_[a].log.size();
  link.cursor_b = nodes_[b].log.size();
  link.a_initiates = !link.a_initiates;
  ++counters_.reconcile_rounds;
  counters_.reconcile_decode_failures += outcome.attempts - 1;

  if (reconcile_observer_) {
    record.after_a = held(a);
    record.after_b = held(b);
    reconcile_observer_(record);
  }
  queue_.schedule({queue_.now() + spec.reconcile_interval, 0, EventKind::ReconcileTick, 0, kNoNode,
                   kNoNode, index});
}

void Simulation::handle_payment(std::uint32_t index) {
  const auto& att = payments_[index];
  PolicyLookup view = [this, src = att.source](EdgeIndex e) { return view_policy(src, e); };
  PolicyLookup truth = [this](EdgeIndex e) { return truth_.find(e); };
  RouteFilter filter;
  if (opts_.prune_stale_routes) {
    filter.now = unix_now();
    filter.prune_after_seconds = opts_.protocol.prune_after_seconds;
  }
  payment_outcomes_.push_back(evaluate_payment(*snapshot_, view, truth, att, filter));
}

std::uint32_t Simulation::seen_count(NodeId node, MessageId msg) const {
  return tracks_.at(msg).seen.at(node);
}

std::optional<SimTime> Simulation::first_seen(NodeId node, MessageId msg) const {
  const auto t = tracks_.at(msg).first_seen.at(node);
  if (t < 0) return std::nullopt;
  return SimTime{t};
}

bool Simulation::has_message(NodeId node, MessageId msg) const {
  return (tracks_.at(msg).state.at(node) & kHas) != 0;
}

std::optional<SimTime> Simulation::first_broadcast(MessageId msg) const {
  const auto t = tracks_.at(msg).first_broadcast;
  if (t < 0) return std::nullopt;
  return SimTime{t};
}

RunReport Simulation::finalize() const {
  RunReport r;
  r.protocol = opts_.protocol.name;
  r.seed = opts_.seed;
  r.nodes = nodes_.size();
  r.messages = messages_.size();

  const auto& comp = snapshot_->components();
  std::vector<double> delays;
  std::uint64_t population = 0;
  std::uint64_t seen_total = 0;
  double size_total = 0;
  for (MessageId m = 0; m < messages_.size(); ++m) {
    const auto& track = tracks_[m];
    size_total += wire_size(messages_[m], opts_.sizes);
    for (NodeId v = 0; v < nodes_.size(); ++v) {
      seen_total += track.seen[v];
      if (track.seen[v] > 0) ++r.redundancy[track.seen[v]];
    }
    if (track.first_broadcast < 0) continue;
    ++r.messages_broadcast;
    const NodeId origin = messages_[m].origin;
    for (NodeId v = 0; v < nodes_.size(); ++v) {
      if (v == origin) continue;
      if (comp[v] != comp[origin]) {
        ++r.excluded_pairs;
        continue;
      }
      ++population;
      if (track.first_seen[v] >= 0) {
        const auto d = std::max<std::int64_t>(0, track.first_seen[v] - track.first_broadcast);
        delays.push_back(static_cast<double>(d) / 1e6);
      }
    }
  }
  r.convergence = convergence_stats(std::move(delays), population);

  r.total_bytes = total_bytes_;
  const double avg = messages_.empty() ? 0.0 : size_total / static_cast<double>(messages_.size());
  r.b_min = b_min(r.nodes, r.messages, avg);
  r.overhead_factor = r.b_min > 0 ? static_cast<double>(r.total_bytes) / r.b_min : 0.0;
  const double pairs = static_cast<double>(r.nodes) * static_cast<double>(r.messages);
  r.mean_seen_count = pairs > 0 ? static_cast<double>(seen_total) / pairs : 0.0;

  for (auto w : waiting_us_) {
    ++r.waiting_time[static_cast<std::int64_t>(w / 1'000'000)];
    r.max_waiting_time = std::max(r.max_waiting_time, static_cast<double>(w) / 1e6);
  }

  for (const auto& o : payment_outcomes_) {
    ++r.payments.attempts;
    switch (o.status) {
      case PaymentStatus::Success: ++r.payments.success; break;
      case PaymentStatus::NoRoute: ++r.payments.no_route; break;
      case PaymentStatus::StaleFailure: ++r.payments.stale_failure; break;
    }
    if (o.unconverged) ++r.payments.unconverged;
  }

  r.counters = counters_;
  r.counters.unknown_channel_updates = truth_.unknown_channel_updates();
  return r;
}

}  // namespace lngossip

namespace lngossip {

RunReport run_experiment(const Workload& workload, const EngineOptions& options) {
  Simulation sim(workload.snapshot, options);
  sim.load_trace(workload.trace);
  sim.add_payments(workload.payments);
  return sim.run(workload.duration + workload.drain);
}

}  // namespace lngossip
