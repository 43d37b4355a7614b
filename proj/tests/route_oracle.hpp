#pragma once

#include <optional>
#include <tuple>
#include <utility>
#include <vector>

#include "lngossip/payments.hpp"
#include "lngossip/rng.hpp"

namespace lngossip::testing {

struct OracleRoute {
  Millisatoshi fee = 0;
  std::vector<EdgeIndex> edges;
};

using EdgeKey = std::pair<ChannelId, unsigned>;

inline std::vector<EdgeKey> edge_keys(const NetworkSnapshot& s, const std::vector<EdgeIndex>& edges) {
  std::vector<EdgeKey> out;
  for (auto e : edges) out.emplace_back(s.edge_scid(e), edge_direction(e));
  return out;
}

/// Every simple path, cheapest by (fee, hops, (scid, dir) sequence).
inline std::optional<OracleRoute> exhaustive_route(const NetworkSnapshot& s, const PolicyLookup& view,
                                                   NodeId src, NodeId dst, Millisatoshi amount) {
  std::optional<OracleRoute> best;
  std::vector<bool> on_path(s.node_count(), false);
  std::vector<EdgeIndex> path;
  auto better = [&](Millisatoshi fee) {
    if (!best) return true;
    const auto a = std::make_tuple(fee, path.size(), edge_keys(s, path));
    const auto b = std::make_tuple(best->fee, best->edges.size(), edge_keys(s, best->edges));
    return a < b;
  };
  auto walk = [&](auto&& self, NodeId at, Millisatoshi fee) -> void {
    if (at == dst) {
      if (better(fee)) best = OracleRoute{fee, path};
      return;
    }
    on_path[at] = true;
    for (const auto& adj : s.adjacency(at)) {
      if (on_path[adj.neighbor]) continue;
      const auto* p = view(adj.outgoing);
      if (!edge_usable(p, amount)) continue;
      path.push_back(adj.outgoing);
      self(self, adj.neighbor, fee + edge_fee(*p, amount));
      path.pop_back();
    }
    on_path[at] = false;
  };
  walk(walk, src, 0);
  return best;
}

/// Random multigraph on 2..max_nodes nodes with varied policies.
inline NetworkSnapshot random_small_graph(Rng& rng, std::size_t max_nodes) {
  NetworkSnapshot s;
  const auto n = 2 + rng.below(max_nodes - 1);
  for (std::size_t i = 0; i < n; ++i) s.add_node();
  const auto channels = rng.below(2 * n + 1);
  for (std::size_t c = 0; c < channels; ++c) {
    const auto a = static_cast<NodeId>(rng.below(n));
    auto b = static_cast<NodeId>(rng.below(n - 1));
    if (b >= a) ++b;
    const ChannelId scid = (rng.below(1000) << 16) | c;
    s.add_channel(scid, a, b);
    for (unsigned dir = 0; dir < 2; ++dir) {
      if (rng.chance(0.1)) continue;
      ChannelPolicy p;
      p.timestamp = 1000;
      p.disabled = rng.chance(0.15);
      p.cltv_expiry_delta = 40;
      p.htlc_minimum_msat = rng.chance(0.1) ? 5000 : 1;
      if (rng.chance(0.5)) p.htlc_maximum_msat = rng.chance(0.1) ? 10 : 1'000'000;
      p.fee_base_msat = rng.below(4);
      p.fee_proportional_millionths = rng.below(3) * 1000;
      s.set_policy(scid, dir, p);
    }
  }
  s.finalize();
  return s;
}

}  // namespace lngossip::testing
