#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "lngossip/catalog.hpp"
#include "lngossip/rng.hpp"
#include "lngossip/topology.hpp"
#include "lngossip/trace.hpp"

namespace lngossip {

/// Origin for a trace record: an explicit hint wins; otherwise the owner of
/// the updated direction, the announced node, or the lower channel endpoint.
/// Records that name nothing in the snapshot get a uniformly random node.
NodeId attribute_origin(const TraceRecord& record, const NetworkSnapshot& snapshot, Rng& rng);

/// Message and update-category mix for synthetic traffic.
struct TrafficMix {
  std::array<double, 3> kind_shares{};                   // indexed by MessageKind
  std::array<double, kCategoryCount> category_shares{};  // indexed by UpdateCategory
  double rate = 1.0;                                     // messages per second

  /// Shares observed on the live network; category shares are renormalized
  /// because the published percentages sum to 100.05.
  static TrafficMix observed(double rate);
  /// Channel updates only, same category shares.
  static TrafficMix updates_only(double rate);

  /// Throws std::invalid_argument unless each share vector sums to 1 +- 1e-9.
  void validate() const;
};

struct PolicyDefaults {
  std::uint64_t fee_base_msat = 1000;
  std::uint64_t fee_ppm = 100;
  std::uint16_t cltv = 40;
  std::uint64_t htlc_min_msat = 1000;
  std::uint64_t htlc_max_msat = 990'000'000;
  /// Share of directed edges disabled at snapshot time.
  double disabled_share = 0.10;
};

struct SyntheticParams {
  std::size_t nodes = 1000;
  std::size_t attach_m = 4;
  TrafficMix mix = TrafficMix::observed(2000.0 / 1200.0);
  SimTime duration = whole_seconds(1200);
  std::uint64_t seed = 1;
  /// Unix time corresponding to simulation time zero.
  UnixSeconds epoch = 1'600'000'000;
  PolicyDefaults policy;
};

struct SyntheticWorkload {
  NetworkSnapshot snapshot;
  Trace trace;
  /// Category each generated update was built to exhibit, in trace order.
  std::vector<UpdateCategory> intended;
};

/// Number of channels the attachment process opens for n nodes.
std::size_t attachment_channel_count(std::size_t nodes, std::size_t attach_m);

/// Preferential-attachment topology plus a Poisson trace over [0, duration).
/// Fee fields start uniform on [0, 2 x default]; initial policy timestamps
/// lie one to two days before the epoch.
SyntheticWorkload generate_synthetic(const SyntheticParams& params);

}  // namespace lngossip
