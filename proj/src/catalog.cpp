#include "lngossip/catalog.hpp"

#include <algorithm>
#include <limits>
#include <unordered_map>

#include "lngossip/errors.hpp"

namespace lngossip {

std::string_view to_string(UpdateCategory c) {
  switch (c) {
    case UpdateCategory::KeepAlive: return "keep_alive";
    case UpdateCategory::ChannelClosure: return "channel_closure";
    case UpdateCategory::ChannelReopen: return "channel_reopen";
    case UpdateCategory::Disruptive: return "disruptive";
    case UpdateCategory::NonDisruptive: return "non_disruptive";
    case UpdateCategory::Misc: return "misc";
  }
  return "misc";
}

namespace {

std::uint64_t htlc_max_or_unbounded(const ChannelPolicy& p) {
  return p.htlc_maximum_msat.value_or(std::numeric_limits<std::uint64_t>::max());
}

}  // namespace

UpdateCategory classify_update(const ChannelPolicy* prev, const ChannelPolicy& next) {
  if (prev == nullptr) return UpdateCategory::Misc;
  if (prev->timestamp >= next.timestamp) {
    throw ContractViolation("classify_update: timestamp must strictly increase");
  }
  if (prev->equal_except_timestamp(next)) return UpdateCategory::KeepAlive;
  if (!prev->disabled && next.disabled) return UpdateCategory::ChannelClosure;
  if (prev->disabled && !next.disabled) return UpdateCategory::ChannelReopen;

  const auto prev_max = htlc_max_or_unbounded(*prev);
  const auto next_max = htlc_max_or_unbounded(next);
  const bool raises_cost = next.fee_base_msat > prev->fee_base_msat ||
                           next.fee_proportional_millionths > prev->fee_proportional_millionths ||
                           next.cltv_expiry_delta > prev->cltv_expiry_delta || next_max < prev_max;
  if (raises_cost) return UpdateCategory::Disruptive;
  const bool lowers_cost = next.fee_base_msat < prev->fee_base_msat ||
                           next.fee_proportional_millionths < prev->fee_proportional_millionths ||
                           next.cltv_expiry_delta < prev->cltv_expiry_delta || next_max > prev_max;
  if (lowers_cost) return UpdateCategory::NonDisruptive;
  return UpdateCategory::Misc;
}

namespace {

template <std::size_t N>
std::array<double, N> normalize(const std::array<std::size_t, N>& counts) {
  std::array<double, N> out{};
  std::size_t total = 0;
  for (auto c : counts) total += c;
  if (total == 0) return out;
  for (std::size_t i = 0; i < N; ++i) {
    out[i] = static_cast<double>(counts[i]) / static_cast<double>(total);
  }
  return out;
}

}  // namespace

std::array<double, kCategoryCount> CatalogReport::shares() const { return normalize(counts); }

std::array<double, kCategoryCount> CatalogReport::shares_with_prev() const {
  return normalize(counts_with_prev);
}

std::array<double, 3> CatalogReport::kind_shares() const { return normalize(kind_counts); }

nlohmann::json CatalogReport::to_json() const {
  using nlohmann::json;
  json cats = json::object();
  const auto s = shares();
  const auto sp = shares_with_prev();
  for (std::size_t i = 0; i < kCategoryCount; ++i) {
    cats[std::string(to_string(kAllCategories[i]))] = {
        {"count", counts[i]},
        {"share", s[i]},
        {"count_with_prev", counts_with_prev[i]},
        {"share_with_prev", sp[i]},
    };
  }
  json kinds = json::object();
  const auto ks = kind_shares();
  for (std::size_t i = 0; i < 3; ++i) {
    kinds[to_string(static_cast<MessageKind>(i))] = {{"count", kind_counts[i]}, {"share", ks[i]}};
  }
  json hist = json::array();
  for (const auto& [bucket, count] : keepalive_interarrival) hist.push_back({bucket, count});
  return {
      {"categories", cats},
      {"kinds", kinds},
      {"updates", updates},
      {"first_updates", first_updates},
      {"stale_updates", stale_updates},
      {"keepalive_interarrival", hist},
      {"closure_durations", closure_durations},
  };
}

CatalogReport catalog_trace(const Trace& trace, const CatalogOptions& options) {
  CatalogReport report;
  std::unordered_map<DedupKey, ChannelPolicy> last;
  std::unordered_map<DedupKey, UnixSeconds> open_closure;

  for (const auto& rec : trace.records) {
    const auto kind_index = rec.payload.index();
    ++report.kind_counts[kind_index];
    const auto* upd = std::get_if<ChannelUpdate>(&rec.payload);
    if (upd == nullptr) continue;

    ++report.updates;
    const DedupKey key{MessageKind::ChannelUpdate, upd->scid, upd->direction};
    const ChannelPolicy* prev = nullptr;
    if (auto it = last.find(key); it != last.end()) {
      prev = &it->second;
    } else if (options.baseline != nullptr) {
      if (auto e = options.baseline->find_edge(upd->scid, upd->direction)) {
        if (const auto& p = options.baseline->policy(*e)) prev = &*p;
      }
    }

    if (prev != nullptr && prev->timestamp >= upd->policy.timestamp) {
      ++report.stale_updates;
      continue;
    }

    const auto category = classify_update(prev, upd->policy);
    const auto ci = static_cast<std::size_t>(category);
    ++report.counts[ci];
    if (prev == nullptr) {
      ++report.first_updates;
    } else {
      ++report.counts_with_prev[ci];
      if (category == UpdateCategory::KeepAlive) {
        const auto diff = upd->policy.timestamp - prev->timestamp;
        ++report.keepalive_interarrival[diff / options.keepalive_bucket * options.keepalive_bucket];
      } else if (category == UpdateCategory::ChannelClosure) {
        open_closure[key] = upd->policy.timestamp;
      } else if (category == UpdateCategory::ChannelReopen) {
        if (auto it = open_closure.find(key); it != open_closure.end()) {
          report.closure_durations.push_back(upd->policy.timestamp - it->second);
          open_closure.erase(it);
        }
      }
    }
    last.insert_or_assign(key, upd->policy);
  }
  std::sort(report.closure_durations.begin(), report.closure_durations.end());
  return report;
}

}  // namespace lngossip
