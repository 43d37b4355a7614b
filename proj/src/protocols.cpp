#include "lngossip/protocols.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <deque>
#include <stdexcept>
#include <unordered_set>

namespace lngossip {

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::Staggered: return "staggered";
    case Strategy::Flooding: return "flooding";
    case Strategy::SpanningTree: return "spanning_tree";
    case Strategy::Reconciliation: return "reconciliation";
  }
  return "staggered";
}

namespace {

// Per-link reconciliation period for minisketch-k is k times this, so each
// node starts roughly one round per this many seconds whatever k is.
constexpr std::int64_t kReconcileSecondsPerPeer = 2;

const std::vector<std::size_t> kConnectivities{4, 8, 16, 32};

ProtocolSpec lnd_base() {
  ProtocolSpec s;
  s.name = "lnd";
  s.strategy = Strategy::Staggered;
  s.stagger_interval = whole_seconds(90);
  s.sub_batch_delay = whole_seconds(5);
  s.min_batch_size = 10;
  s.max_batches = 18;
  s.syncer_count = 3;
  s.rotation_interval = whole_seconds(20 * 60);
  s.rate_limit = {true, whole_seconds(60), 10};
  s.keepalive = {whole_seconds(30 * 60), 86'400};
  s.keepalive_relay_filter = true;
  return s;
}

ProtocolSpec clightning_base() {
  ProtocolSpec s;
  s.name = "c-lightning";
  s.strategy = Strategy::Staggered;
  s.stagger_interval = whole_seconds(60);
  s.sub_batch_delay = SimTime{0};
  s.min_batch_size = 1;
  s.max_batches = 1;
  s.syncer_count = 5;
  s.rotation_interval = whole_seconds(60 * 60);
  s.rate_limit = {true, whole_seconds(86'400), 4};
  s.keepalive = {whole_seconds(30 * 60), 86'400};
  return s;
}

ProtocolSpec flooding(std::size_t k) {
  ProtocolSpec s;
  s.name = "flooding-" + std::to_string(k);
  s.strategy = Strategy::Flooding;
  s.syncer_count = k;
  s.rotation_interval = SimTime{0};
  return s;
}

ProtocolSpec minisketch(std::size_t k) {
  ProtocolSpec s;
  s.name = "minisketch-" + std::to_string(k);
  s.strategy = Strategy::Reconciliation;
  s.syncer_count = k;
  s.rotation_interval = SimTime{0};
  s.reconcile_interval = whole_seconds(kReconcileSecondsPerPeer * static_cast<std::int64_t>(k));
  s.sketch_element_bytes = 8;
  s.diff_margin = 1.0;
  return s;
}

}  // namespace

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n{"lnd",        "lnd-t1s",         "lnd-sb100",     "lnd-inv",
                               "lnd-inv-t1s", "lnd-inv-sb100", "c-lightning", "c-lightning-inv",
                               "spanning"};
    for (auto k : kConnectivities) n.push_back("flooding-" + std::to_string(k));
    for (auto k : kConnectivities) n.push_back("minisketch-" + std::to_string(k));
    return n;
  }();
  return names;
}

ProtocolSpec preset(std::string_view name) {
  auto lnd_variant = [](std::string_view n, bool inv, bool t1s, bool sb100) {
    ProtocolSpec s = lnd_base();
    s.name = std::string(n);
    s.inventory_mode = inv;
    if (t1s) s.sub_batch_delay = whole_seconds(1);
    if (sb100) s.min_batch_size = 100;
    return s;
  };
  if (name == "lnd") return lnd_variant(name, false, false, false);
  if (name == "lnd-t1s") return lnd_variant(name, false, true, false);
  if (name == "lnd-sb100") return lnd_variant(name, false, false, true);
  if (name == "lnd-inv") return lnd_variant(name, true, false, false);
  if (name == "lnd-inv-t1s") return lnd_variant(name, true, true, false);
  if (name == "lnd-inv-sb100") return lnd_variant(name, true, false, true);
  if (name == "c-lightning" || name == "c-lightning-inv") {
    ProtocolSpec s = clightning_base();
    s.name = std::string(name);
    s.inventory_mode = name == "c-lightning-inv";
    return s;
  }
  if (name == "spanning") {
    ProtocolSpec s;
    s.name = "spanning";
    s.strategy = Strategy::SpanningTree;
    s.rotation_interval = SimTime{0};
    return s;
  }
  for (auto k : kConnectivities) {
    if (name == "flooding-" + std::to_string(k)) return flooding(k);
    if (name == "minisketch-" + std::to_string(k)) return minisketch(k);
  }
  throw std::invalid_argument("unknown protocol preset '" + std::string(name) + "'");
}

namespace {

double parse_double(std::string_view key, std::string_view text) {
  try {
    std::size_t used = 0;
    double v = std::stod(std::string(text), &used);
    if (used != text.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("bad value for '" + std::string(key) + "': " + std::string(text));
  }
}

std::uint64_t parse_unsigned(std::string_view key, std::string_view text) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw std::invalid_argument("bad value for '" + std::string(key) + "': " + std::string(text));
  }
  return v;
}

bool parse_bool(std::string_view key, std::string_view text) {
  if (text == "true" || text == "1" || text == "on") return true;
  if (text == "false" || text == "0" || text == "off") return false;
  throw std::invalid_argument("bad value for '" + std::string(key) + "': " + std::string(text));
}

}  // namespace

void apply_override(ProtocolSpec& spec, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw std::invalid_argument("override must be key=value: " + std::string(assignment));
  }
  const auto key = assignment.substr(0, eq);
  const auto value = assignment.substr(eq + 1);
  auto secs = [&] { return from_seconds(parse_double(key, value)); };
  auto count = [&] { return static_cast<std::size_t>(parse_unsigned(key, value)); };

  if (key == "stagger_interval") spec.stagger_interval = secs();
  else if (key == "sub_batch_delay") spec.sub_batch_delay = secs();
  else if (key == "min_batch_size") spec.min_batch_size = count();
  else if (key == "max_batches") spec.max_batches = count();
  else if (key == "syncer_count") spec.syncer_count = count();
  else if (key == "rotation_interval") spec.rotation_interval = secs();
  else if (key == "rate_limit") spec.rate_limit.enabled = parse_bool(key, value);
  else if (key == "rate_limit_interval") spec.rate_limit.refill_interval = secs();
  else if (key == "rate_limit_burst") spec.rate_limit.burst = static_cast<std::uint32_t>(count());
  else if (key == "keepalive_check_interval") spec.keepalive.check_interval = secs();
  else if (key == "keepalive_staleness") spec.keepalive.staleness_seconds = parse_unsigned(key, value);
  else if (key == "keepalive_relay_filter") spec.keepalive_relay_filter = parse_bool(key, value);
  else if (key == "prune_after") spec.prune_after_seconds = parse_unsigned(key, value);
  else if (key == "reconcile_interval") spec.reconcile_interval = secs();
  else if (key == "sketch_element_bytes") spec.sketch_element_bytes = static_cast<std::uint32_t>(count());
  else if (key == "diff_margin") spec.diff_margin = parse_double(key, value);
  else if (key == "inventory") spec.inventory_mode = parse_bool(key, value);
  else if (key == "tree_root") spec.tree_root = static_cast<NodeId>(count());
  else throw std::invalid_argument("unknown override key '" + std::string(key) + "'");

  if (spec.max_batches == 0 || spec.min_batch_size == 0) {
    throw std::invalid_argument("batch parameters must be positive");
  }
}

Batching lnd_batching(std::size_t n, std::size_t min_batch, std::size_t max_batches) {
  if (n == 0) return {std::max<std::size_t>(min_batch, 0), 0};
  const std::size_t spread = (n + max_batches - 1) / max_batches;
  const std::size_t size = std::max(min_batch, spread);
  return {size, (n + size - 1) / size};
}

bool BroadcastQueue::enqueue(const GossipMessage& msg, SimTime now, bool own, NodeId from) {
  const auto key = dedup_key(msg);
  auto it = entries_.find(key);
  if (it != entries_.end()) {
    if (msg.timestamp() <= it->second.timestamp) return false;
    by_id_.erase(it->second.msg);
    entries_.erase(it);
  }
  QueuedMessage q;
  q.msg = msg.id;
  q.timestamp = msg.timestamp();
  q.seq = next_seq_++;
  q.enqueued_at = now;
  q.own = own;
  if (from != kNoNode) q.received_from.push_back(from);
  entries_.emplace(key, std::move(q));
  by_id_.emplace(msg.id, key);
  return true;
}

void BroadcastQueue::note_received_from(MessageId msg, NodeId from) {
  auto it = by_id_.find(msg);
  if (it == by_id_.end()) return;
  auto& from_list = entries_.at(it->second).received_from;
  if (std::find(from_list.begin(), from_list.end(), from) == from_list.end()) {
    from_list.push_back(from);
  }
}

std::vector<QueuedMessage> BroadcastQueue::drain() {
  std::vector<QueuedMessage> out;
  out.reserve(entries_.size());
  for (auto& [key, q] : entries_) out.push_back(std::move(q));
  entries_.clear();
  by_id_.clear();
  std::sort(out.begin(), out.end(),
            [](const QueuedMessage& a, const QueuedMessage& b) { return a.seq < b.seq; });
  return out;
}

std::vector<SubBatch> stagger_flush(BroadcastQueue& queue, SimTime now, const ProtocolSpec& spec) {
  auto queued = queue.drain();
  const auto plan = lnd_batching(queued.size(), spec.min_batch_size, spec.max_batches);
  std::vector<SubBatch> batches;
  batches.reserve(plan.num_batches);
  for (std::size_t i = 0; i < plan.num_batches; ++i) {
    SubBatch b;
    b.send_time = now + spec.sub_batch_delay * static_cast<std::int64_t>(i);
    const auto begin = i * plan.batch_size;
    const auto end = std::min(queued.size(), begin + plan.batch_size);
    b.messages.assign(std::make_move_iterator(queued.begin() + static_cast<std::ptrdiff_t>(begin)),
                      std::make_move_iterator(queued.begin() + static_cast<std::ptrdiff_t>(end)));
    batches.push_back(std::move(b));
  }
  return batches;
}

bool TokenBucket::admit(SimTime now) {
  if (now > last_refill_) {
    const double refill = static_cast<double>((now - last_refill_).count()) /
                          static_cast<double>(refill_interval_.count());
    tokens_ = std::min<double>(capacity_, tokens_ + refill);
    last_refill_ = now;
  }
  if (tokens_ >= 1.0) {
    tokens_ -= 1.0;
    return true;
  }
  return false;
}

std::vector<ChannelUpdate> keepalive_tick(
    const NetworkSnapshot& snapshot, NodeId node, UnixSeconds now,
    const std::function<const ChannelPolicy*(EdgeIndex)>& latest, const ProtocolSpec& spec) {
  std::vector<ChannelUpdate> out;
  for (const auto& adj : snapshot.adjacency(node)) {
    const ChannelPolicy* p = latest(adj.outgoing);
    if (p == nullptr) continue;
    if (p->timestamp + spec.keepalive.staleness_seconds > now) continue;
    ChannelUpdate u;
    u.scid = snapshot.edge_scid(adj.outgoing);
    u.direction = edge_direction(adj.outgoing);
    u.policy = *p;
    u.policy.timestamp = now;
    out.push_back(u);
  }
  return out;
}

bool keepalive_relay_admit(UnixSeconds prev_ts, UnixSeconds new_ts) {
  return new_ts >= prev_ts && new_ts - prev_ts >= 86'400;
}

std::size_t SpanningTree::edge_count() const {
  std::size_t n = 0;
  for (auto p : parent) n += p != kNoNode;
  return n;
}

SpanningTree build_tree(const NetworkSnapshot& snapshot, NodeId root) {
  const auto n = snapshot.node_count();
  if (root >= n) throw std::invalid_argument("tree root out of range");
  SpanningTree tree;
  tree.root = root;
  tree.parent.assign(n, kNoNode);
  tree.tree_neighbors.assign(n, {});
  std::vector<bool> visited(n, false);

  auto grow = [&](NodeId start) {
    std::deque<NodeId> frontier{start};
    visited[start] = true;
    while (!frontier.empty()) {
      const NodeId u = frontier.front();
      frontier.pop_front();
      for (NodeId v : snapshot.neighbors(u)) {  // ascending
        if (visited[v]) continue;
        visited[v] = true;
        tree.parent[v] = u;
        tree.tree_neighbors[u].push_back(v);
        tree.tree_neighbors[v].push_back(u);
        frontier.push_back(v);
      }
    }
  };
  grow(root);
  for (NodeId s = 0; s < n; ++s) {
    if (!visited[s]) grow(s);
  }
  for (auto& nb : tree.tree_neighbors) std::sort(nb.begin(), nb.end());
  return tree;
}

std::size_t sketch_capacity(std::size_t size_a, std::size_t size_b, double margin) {
  const double diff = size_a > size_b ? static_cast<double>(size_a - size_b)
                                      : static_cast<double>(size_b - size_a);
  const double est = diff + margin * std::sqrt(static_cast<double>(std::min(size_a, size_b)));
  return static_cast<std::size_t>(std::ceil(std::max(1.0, est)));
}

ReconcileOutcome reconcile_round(std::span<const MessageId> fresh_a,
                                 std::span<const MessageId> fresh_b,
                                 const std::function<bool(MessageId)>& a_has,
                                 const std::function<bool(MessageId)>& b_has,
                                 const ProtocolSpec& spec) {
  std::unordered_set<MessageId> set_a(fresh_a.begin(), fresh_a.end());
  std::unordered_set<MessageId> set_b(fresh_b.begin(), fresh_b.end());

  ReconcileOutcome out;
  std::vector<MessageId> only_a;
  std::vector<MessageId> only_b;
  for (auto id : fresh_a) {
    if (!set_b.contains(id)) only_a.push_back(id);
  }
  for (auto id : fresh_b) {
    if (!set_a.contains(id)) only_b.push_back(id);
  }
  // fresh lists may repeat ids; count each once
  std::sort(only_a.begin(), only_a.end());
  only_a.erase(std::unique(only_a.begin(), only_a.end()), only_a.end());
  std::sort(only_b.begin(), only_b.end());
  only_b.erase(std::unique(only_b.begin(), only_b.end()), only_b.end());
  out.difference = only_a.size() + only_b.size();

  std::size_t capacity = sketch_capacity(set_a.size(), set_b.size(), spec.diff_margin);
  while (true) {
    ++out.attempts;
    out.sketch_elements += capacity;
    if (out.difference <= capacity) break;
    capacity *= 2;
  }

  for (auto id : only_a) {
    if (!b_has(id)) out.to_b.push_back(id);
  }
  for (auto id : only_b) {
    if (!a_has(id)) out.to_a.push_back(id);
  }
  return out;
}

}  // namespace lngossip
