#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "lngossip/topology.hpp"
#include "lngossip/trace.hpp"

namespace lngossip {

enum class UpdateCategory : std::uint8_t {
  KeepAlive,
  ChannelClosure,
  ChannelReopen,
  Disruptive,
  NonDisruptive,
  Misc,
};

inline constexpr std::size_t kCategoryCount = 6;
inline constexpr std::array<UpdateCategory, kCategoryCount> kAllCategories{
    UpdateCategory::KeepAlive,  UpdateCategory::ChannelClosure, UpdateCategory::ChannelReopen,
    UpdateCategory::Disruptive, UpdateCategory::NonDisruptive,  UpdateCategory::Misc};

std::string_view to_string(UpdateCategory c);

/// Rule table, first match wins:
///   1. only the timestamp moved                  -> KeepAlive
///   2. enabled -> disabled                        -> ChannelClosure
///   3. disabled -> enabled                        -> ChannelReopen
///   4. fee/cltv raised or htlc_max lowered        -> Disruptive (wins over 5)
///   5. fee/cltv lowered or htlc_max raised        -> NonDisruptive
///   6. anything else, including no predecessor    -> Misc
/// An absent htlc_max counts as unbounded. Throws ContractViolation when the
/// predecessor is not strictly older.
UpdateCategory classify_update(const ChannelPolicy* prev, const ChannelPolicy& next);

struct CatalogOptions {
  /// Keep-alive inter-arrival histogram bucket width, seconds.
  std::uint64_t keepalive_bucket = 1800;
  /// Optional predecessor policies for each edge's first update.
  const NetworkSnapshot* baseline = nullptr;
};

struct CatalogReport {
  std::array<std::size_t, kCategoryCount> counts{};
  /// Same, restricted to updates that had a predecessor.
  std::array<std::size_t, kCategoryCount> counts_with_prev{};
  std::size_t updates = 0;
  std::size_t first_updates = 0;
  /// Updates not newer than their predecessor; skipped.
  std::size_t stale_updates = 0;
  std::array<std::size_t, 3> kind_counts{};  // indexed by MessageKind
  std::map<std::uint64_t, std::size_t> keepalive_interarrival;  // bucket start -> count
  std::vector<std::uint64_t> closure_durations;                 // ascending

  std::array<double, kCategoryCount> shares() const;
  std::array<double, kCategoryCount> shares_with_prev() const;
  std::array<double, 3> kind_shares() const;

  nlohmann::json to_json() const;
};

CatalogReport catalog_trace(const Trace& trace, const CatalogOptions& options = {});

}  // namespace lngossip
