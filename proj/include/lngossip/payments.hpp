#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "lngossip/rng.hpp"
#include "lngossip/time.hpp"
#include "lngossip/topology.hpp"

namespace lngossip {

using Millisatoshi = std::uint64_t;

/// Policy lookup for one directed edge; nullptr when the edge is unannounced.
using PolicyLookup = std::function<const ChannelPolicy*(EdgeIndex)>;

/// fee_base + floor(amount * fee_ppm / 1e6)
Millisatoshi edge_fee(const ChannelPolicy& policy, Millisatoshi amount);

struct Route {
  std::vector<EdgeIndex> edges;
  Millisatoshi total_fee = 0;
};

struct RouteFilter {
  /// Edges whose policy is older than now - prune_after are unusable.
  std::optional<UnixSeconds> now;
  std::uint64_t prune_after_seconds = 14 * 86'400;
};

/// Whether an edge may carry `amount` under the given policy.
bool edge_usable(const ChannelPolicy* policy, Millisatoshi amount, const RouteFilter& filter = {});

/// Least-total-fee path, each hop charged edge_fee(policy, amount). Ties go
/// to fewer hops, then to the lexicographically smaller (scid, direction)
/// sequence. nullopt when dst is unreachable.
std::optional<Route> find_route(const NetworkSnapshot& snapshot, const PolicyLookup& view,
                                NodeId src, NodeId dst, Millisatoshi amount,
                                const RouteFilter& filter = {});

struct PaymentAttempt {
  SimTime time{0};
  NodeId source = 0;
  NodeId destination = 0;
  Millisatoshi amount_msat = 1000;
};

enum class PaymentStatus : std::uint8_t { Success, NoRoute, StaleFailure };

struct PaymentOutcome {
  PaymentStatus status = PaymentStatus::NoRoute;
  bool unconverged = false;
  std::vector<EdgeIndex> route;
};

/// Routes on the source's view, then checks every hop against ground truth.
PaymentOutcome evaluate_payment(const NetworkSnapshot& snapshot, const PolicyLookup& view,
                                const PolicyLookup& truth, const PaymentAttempt& attempt,
                                const RouteFilter& filter = {});

/// `count` attempts uniform over [0, duration), sorted by time; endpoints
/// uniform over distinct node pairs.
std::vector<PaymentAttempt> generate_payments(std::size_t count, SimTime duration,
                                              Millisatoshi amount, std::size_t node_count,
                                              Rng& rng);

/// JSON Lines: {"t":sec,"src":idx,"dst":idx,"amt":msat}
std::vector<PaymentAttempt> parse_payments(std::istream& in);
std::vector<PaymentAttempt> load_payments(const std::filesystem::path& path);

}  // namespace lngossip
