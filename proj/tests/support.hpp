#pragma once

#include <memory>
#include <utility>
#include <vector>

#include "lngossip/topology.hpp"

namespace lngossip::testing {

inline ChannelPolicy policy(UnixSeconds ts, std::uint64_t fee_base = 1000, std::uint64_t fee_ppm = 100,
                            std::uint16_t cltv = 40) {
  ChannelPolicy p;
  p.timestamp = ts;
  p.cltv_expiry_delta = cltv;
  p.htlc_minimum_msat = 1;
  p.htlc_maximum_msat = 1'000'000'000;
  p.fee_base_msat = fee_base;
  p.fee_proportional_millionths = fee_ppm;
  return p;
}

/// Snapshot over `n` nodes with channel i = edges[i], scid i + 1, both
/// directions announced with the default policy at ts 1000.
inline NetworkSnapshot graph(std::size_t n, const std::vector<std::pair<NodeId, NodeId>>& edges) {
  NetworkSnapshot s;
  for (std::size_t i = 0; i < n; ++i) s.add_node();
  ChannelId scid = 1;
  for (auto [a, b] : edges) {
    s.add_channel(scid, a, b);
    s.set_policy(scid, 0, policy(1000));
    s.set_policy(scid, 1, policy(1000));
    ++scid;
  }
  s.finalize();
  return s;
}

inline std::shared_ptr<const NetworkSnapshot> shared_graph(
    std::size_t n, const std::vector<std::pair<NodeId, NodeId>>& edges) {
  return std::make_shared<const NetworkSnapshot>(graph(n, edges));
}

inline std::vector<std::pair<NodeId, NodeId>> path_edges(std::size_t n) {
  std::vector<std::pair<NodeId, NodeId>> e;
  for (NodeId i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
  return e;
}

}  // namespace lngossip::testing
