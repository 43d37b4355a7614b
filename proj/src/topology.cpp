#include "lngossip/topology.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include <json.hpp>

#include "lngossip/errors.hpp"
#include "json_io.hpp"

namespace lngossip {

using nlohmann::json;

NodeId NetworkSnapshot::add_node(std::string label) {
  labels_.push_back(std::move(label));
  return static_cast<NodeId>(labels_.size() - 1);
}

std::uint32_t NetworkSnapshot::add_channel(ChannelId scid, NodeId a, NodeId b) {
  if (index_.contains(scid)) {
    throw ValidationError("duplicate channel id " + std::to_string(scid));
  }
  const auto idx = static_cast<std::uint32_t>(channels_.size());
  channels_.push_back({scid, a, b});
  policies_.emplace_back();
  policies_.emplace_back();
  index_.emplace(scid, idx);
  return idx;
}

void NetworkSnapshot::set_policy(ChannelId scid, unsigned direction, const ChannelPolicy& policy) {
  auto edge = find_edge(scid, direction);
  if (!edge) throw ValidationError("policy for unknown channel " + std::to_string(scid));
  policies_[*edge] = policy;
}

std::optional<std::uint32_t> NetworkSnapshot::find_channel(ChannelId scid) const {
  auto it = index_.find(scid);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::optional<EdgeIndex> NetworkSnapshot::find_edge(ChannelId scid, unsigned direction) const {
  auto idx = find_channel(scid);
  if (!idx || direction > 1) return std::nullopt;
  return make_edge(*idx, direction);
}

NodeId NetworkSnapshot::edge_source(EdgeIndex e) const {
  const auto& c = channels_[edge_channel(e)];
  return edge_direction(e) == 0 ? c.a : c.b;
}

NodeId NetworkSnapshot::edge_target(EdgeIndex e) const {
  const auto& c = channels_[edge_channel(e)];
  return edge_direction(e) == 0 ? c.b : c.a;
}

void NetworkSnapshot::finalize() {
  const auto n = labels_.size();
  for (const auto& c : channels_) {
    if (c.a >= n || c.b >= n) {
      throw ValidationError("channel " + std::to_string(c.scid) + " references unknown node");
    }
    if (c.a == c.b) throw ValidationError("channel " + std::to_string(c.scid) + " is a self-loop");
  }

  adjacency_.assign(n, {});
  neighbors_.assign(n, {});
  for (std::uint32_t i = 0; i < channels_.size(); ++i) {
    const auto& c = channels_[i];
    adjacency_[c.a].push_back({c.b, make_edge(i, 0)});
    adjacency_[c.b].push_back({c.a, make_edge(i, 1)});
    neighbors_[c.a].push_back(c.b);
    neighbors_[c.b].push_back(c.a);
  }
  for (auto& nb : neighbors_) {
    std::sort(nb.begin(), nb.end());
    nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
  }

  component_.assign(n, kNoNode);
  component_size_.clear();
  for (NodeId start = 0; start < n; ++start) {
    if (component_[start] != kNoNode) continue;
    std::deque<NodeId> frontier{start};
    component_[start] = start;
    std::size_t size = 0;
    while (!frontier.empty()) {
      NodeId u = frontier.front();
      frontier.pop_front();
      ++size;
      for (NodeId v : neighbors_[u]) {
        if (component_[v] == kNoNode) {
          component_[v] = start;
          frontier.push_back(v);
        }
      }
    }
    component_size_[start] = size;
  }
}

ChannelPolicy policy_from_json(const json& j, std::size_t line) {
  ChannelPolicy p;
  p.timestamp = json_field<std::uint64_t>(j, "ts", line);
  p.disabled = json_field<bool>(j, "disabled", line);
  p.cltv_expiry_delta = json_field<std::uint16_t>(j, "cltv", line);
  p.htlc_minimum_msat = json_field<std::uint64_t>(j, "htlc_min", line);
  auto max = j.find("htlc_max");
  if (max != j.end() && !max->is_null()) {
    if (!max->is_number_unsigned()) throw ParseError(line, "bad value for 'htlc_max'");
    p.htlc_maximum_msat = max->get<std::uint64_t>();
  }
  p.fee_base_msat = json_field<std::uint64_t>(j, "fee_base", line);
  p.fee_proportional_millionths = json_field<std::uint64_t>(j, "fee_ppm", line);
  return p;
}

void policy_to_json(json& j, const ChannelPolicy& p) {
  j["ts"] = p.timestamp;
  j["disabled"] = p.disabled;
  j["cltv"] = p.cltv_expiry_delta;
  j["htlc_min"] = p.htlc_minimum_msat;
  j["htlc_max"] = p.htlc_maximum_msat ? json(*p.htlc_maximum_msat) : json(nullptr);
  j["fee_base"] = p.fee_base_msat;
  j["fee_ppm"] = p.fee_proportional_millionths;
}

json parse_json_line(const std::string& text, std::size_t line) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw ParseError(line, "not a JSON object");
  return j;
}

NetworkSnapshot parse_snapshot(std::istream& in) {
  NetworkSnapshot snap;
  struct PendingPolicy {
    ChannelId scid;
    unsigned dir;
    ChannelPolicy policy;
    std::size_t line;
  };
  std::vector<PendingPolicy> policies;

  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j = parse_json_line(text, line);
    auto kind = json_field<std::string>(j, "t", line);
    if (kind == "node") {
      snap.add_node(j.value("label", std::string{}));
    } else if (kind == "chan") {
      snap.add_channel(json_field<std::uint64_t>(j, "scid", line), json_field<NodeId>(j, "a", line),
                       json_field<NodeId>(j, "b", line));
    } else if (kind == "policy") {
      auto dir = json_field<unsigned>(j, "dir", line);
      if (dir > 1) throw ParseError(line, "dir must be 0 or 1");
      policies.push_back({json_field<std::uint64_t>(j, "scid", line), dir, policy_from_json(j, line), line});
    } else {
      throw ParseError(line, "unknown record kind '" + kind + "'");
    }
  }

  for (const auto& p : policies) {
    auto edge = snap.find_edge(p.scid, p.dir);
    if (!edge) {
      throw ValidationError("line " + std::to_string(p.line) + ": policy for unknown channel " +
                            std::to_string(p.scid));
    }
    if (snap.policy(*edge)) {
      throw ValidationError("line " + std::to_string(p.line) + ": duplicate policy for channel " +
                            std::to_string(p.scid));
    }
    snap.set_policy(p.scid, p.dir, p.policy);
  }
  snap.finalize();
  return snap;
}

NetworkSnapshot load_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open snapshot " + path.string());
  return parse_snapshot(in);
}

void write_snapshot(std::ostream& out, const NetworkSnapshot& snapshot) {
  for (NodeId n = 0; n < snapshot.node_count(); ++n) {
    json j{{"t", "node"}};
    if (!snapshot.label(n).empty()) j["label"] = snapshot.label(n);
    out << j.dump() << '\n';
  }
  for (const auto& c : snapshot.channels()) {
    out << json{{"t", "chan"}, {"scid", c.scid}, {"a", c.a}, {"b", c.b}}.dump() << '\n';
  }
  for (EdgeIndex e = 0; e < snapshot.edge_count(); ++e) {
    const auto& p = snapshot.policy(e);
    if (!p) continue;
    json j{{"t", "policy"}, {"scid", snapshot.edge_scid(e)}, {"dir", edge_direction(e)}};
    policy_to_json(j, *p);
    out << j.dump() << '\n';
  }
}

PolicyMap::PolicyMap(const NetworkSnapshot& snapshot) : snapshot_(&snapshot) {
  policies_.reserve(snapshot.edge_count());
  for (EdgeIndex e = 0; e < snapshot.edge_count(); ++e) policies_.push_back(snapshot.policy(e));
}

const ChannelPolicy* PolicyMap::find(ChannelId scid, unsigned direction) const {
  auto e = snapshot_->find_edge(scid, direction);
  return e ? find(*e) : nullptr;
}

bool apply_update(PolicyMap& view, const ChannelUpdate& update) {
  auto e = view.snapshot_->find_edge(update.scid, update.direction);
  if (!e) {
    ++view.unknown_;
    return false;
  }
  auto& slot = view.policies_[*e];
  if (!is_newer(slot ? &*slot : nullptr, update.policy)) return false;
  slot = update.policy;
  return true;
}

GossipOverlay build_overlay(const NetworkSnapshot& snapshot, std::size_t k, SimTime rotation,
                            Rng& rng) {
  const auto n = snapshot.node_count();
  GossipOverlay overlay;
  overlay.syncers.assign(n, {});
  overlay.subscribers.assign(n, {});
  overlay.rotation_cursor.assign(n, 0);
  overlay.rotation_interval = rotation;
  for (NodeId u = 0; u < n; ++u) {
    std::vector<NodeId> pool = snapshot.neighbors(u);
    const auto take = std::min(k, pool.size());
    // partial Fisher-Yates
    for (std::size_t i = 0; i < take; ++i) {
      std::swap(pool[i], pool[i + rng.below(pool.size() - i)]);
      overlay.syncers[u].push_back(pool[i]);
      overlay.subscribers[pool[i]].push_back(u);
    }
  }
  for (auto& subs : overlay.subscribers) std::sort(subs.begin(), subs.end());
  return overlay;
}

std::optional<SyncerSwap> rotate_syncer(GossipOverlay& overlay, const NetworkSnapshot& snapshot,
                                        NodeId node, Rng& rng) {
  auto& mine = overlay.syncers[node];
  if (mine.empty()) return std::nullopt;
  std::vector<NodeId> candidates;
  for (NodeId v : snapshot.neighbors(node)) {
    if (std::find(mine.begin(), mine.end(), v) == mine.end()) candidates.push_back(v);
  }
  if (candidates.empty()) return std::nullopt;

  auto& cursor = overlay.rotation_cursor[node];
  cursor %= mine.size();
  const NodeId removed = mine[cursor];
  const NodeId added = candidates[rng.below(candidates.size())];
  mine[cursor] = added;
  cursor = (cursor + 1) % mine.size();

  auto& old_subs = overlay.subscribers[removed];
  old_subs.erase(std::find(old_subs.begin(), old_subs.end(), node));
  auto& new_subs = overlay.subscribers[added];
  new_subs.insert(std::lower_bound(new_subs.begin(), new_subs.end(), node), node);
  return SyncerSwap{node, removed, added};
}

bool overlay_consistent(const GossipOverlay& overlay) {
  const auto n = overlay.syncers.size();
  std::size_t forward = 0;
  for (NodeId v = 0; v < n; ++v) {
    for (NodeId u : overlay.syncers[v]) {
      const auto& subs = overlay.subscribers[u];
      if (!std::binary_search(subs.begin(), subs.end(), v)) return false;
      ++forward;
    }
  }
  std::size_t backward = 0;
  for (NodeId u = 0; u < n; ++u) {
    for (NodeId v : overlay.subscribers[u]) {
      const auto& sy = overlay.syncers[v];
      if (std::find(sy.begin(), sy.end(), u) == sy.end()) return false;
      ++backward;
    }
  }
  return forward == backward;
}

PeerOverlay build_peer_overlay(std::size_t node_count, std::size_t k, Rng& rng) {
  PeerOverlay overlay;
  overlay.links.assign(node_count, {});
  if (node_count < 2) return overlay;
  const auto take = std::min(k, node_count - 1);
  for (NodeId u = 0; u < node_count; ++u) {
    std::vector<NodeId> picked;
    while (picked.size() < take) {
      auto v = static_cast<NodeId>(rng.below(node_count));
      if (v == u || std::find(picked.begin(), picked.end(), v) != picked.end()) continue;
      picked.push_back(v);
    }
    for (NodeId v : picked) {
      overlay.links[u].push_back(v);
      overlay.links[v].push_back(u);
    }
  }
  for (auto& l : overlay.links) {
    std::sort(l.begin(), l.end());
    l.erase(std::unique(l.begin(), l.end()), l.end());
  }
  return overlay;
}

}  // namespace lngossip
