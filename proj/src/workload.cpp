#include "lngossip/workload.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

namespace lngossip {

NodeId attribute_origin(const TraceRecord& record, const NetworkSnapshot& snapshot, Rng& rng) {
  const auto n = snapshot.node_count();
  if (n == 0) throw std::invalid_argument("attribute_origin: empty snapshot");
  if (record.origin_hint && *record.origin_hint < n) return *record.origin_hint;

  if (const auto* u = std::get_if<ChannelUpdate>(&record.payload)) {
    if (auto e = snapshot.find_edge(u->scid, u->direction)) return snapshot.edge_source(*e);
  } else if (const auto* a = std::get_if<ChannelAnnouncement>(&record.payload)) {
    if (auto idx = snapshot.find_channel(a->scid)) {
      const auto& c = snapshot.channel(*idx);
      return std::min(c.a, c.b);
    }
    if (a->a < n && a->b < n) return std::min(a->a, a->b);
  } else {
    const auto& na = std::get<NodeAnnouncement>(record.payload);
    if (na.node < n) return na.node;
  }
  return static_cast<NodeId>(rng.below(n));
}

namespace {

constexpr std::array<double, kCategoryCount> kObservedCategories{45.32, 19.29, 18.66,
                                                                 8.57,  7.22,  0.99};

template <std::size_t N>
std::array<double, N> normalized(std::array<double, N> v) {
  const double sum = std::accumulate(v.begin(), v.end(), 0.0);
  for (auto& x : v) x /= sum;
  return v;
}

template <std::size_t N>
std::size_t draw_index(const std::array<double, N>& shares, Rng& rng) {
  double u = rng.unit();
  for (std::size_t i = 0; i + 1 < N; ++i) {
    if (u < shares[i]) return i;
    u -= shares[i];
  }
  return N - 1;
}

/// Set of edge indexes with O(1) insert, erase and uniform draw.
class EdgePool {
 public:
  void insert(EdgeIndex e) {
    if (pos_.contains(e)) return;
    pos_[e] = items_.size();
    items_.push_back(e);
  }
  void erase(EdgeIndex e) {
    auto it = pos_.find(e);
    if (it == pos_.end()) return;
    const auto idx = it->second;
    pos_.erase(it);
    if (idx + 1 != items_.size()) {
      items_[idx] = items_.back();
      pos_[items_[idx]] = idx;
    }
    items_.pop_back();
  }
  bool empty() const { return items_.empty(); }
  EdgeIndex draw(Rng& rng) const { return items_[rng.below(items_.size())]; }

 private:
  std::vector<EdgeIndex> items_;
  std::unordered_map<EdgeIndex, std::size_t> pos_;
};

ChannelId make_scid(std::uint64_t i) {
  const std::uint64_t block = 600'000 + i / 1000;
  const std::uint64_t tx = i % 1000;
  return block << 40 | tx << 16;
}

}  // namespace

TrafficMix TrafficMix::observed(double rate) {
  TrafficMix m;
  m.kind_shares = normalized(std::array<double, 3>{0.34, 5.13, 94.53});
  m.category_shares = normalized(kObservedCategories);
  m.rate = rate;
  return m;
}

TrafficMix TrafficMix::updates_only(double rate) {
  TrafficMix m = observed(rate);
  m.kind_shares = {0.0, 0.0, 1.0};
  return m;
}

void TrafficMix::validate() const {
  auto check = [](const auto& shares, const char* what) {
    double sum = 0;
    for (double s : shares) {
      if (s < 0) throw std::invalid_argument(std::string(what) + " share is negative");
      sum += s;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument(std::string(what) + " shares must sum to 1");
  };
  check(kind_shares, "kind");
  check(category_shares, "category");
  if (!(rate >= 0)) throw std::invalid_argument("rate must be non-negative");
}

std::size_t attachment_channel_count(std::size_t nodes, std::size_t attach_m) {
  if (nodes < 2) return 0;
  std::size_t total = 1;
  for (std::size_t i = 2; i < nodes; ++i) total += std::min(attach_m, i);
  return total;
}

SyntheticWorkload generate_synthetic(const SyntheticParams& params) {
  if (params.attach_m < 1 || params.nodes <= params.attach_m) {
    throw std::invalid_argument("synthetic topology needs nodes > attach_m >= 1");
  }
  params.mix.validate();

  SyntheticWorkload out;
  auto& snap = out.snapshot;
  Rng topo_rng = Rng::stream(params.seed, "synth/topology");
  Rng policy_rng = Rng::stream(params.seed, "synth/policy");
  Rng traffic_rng = Rng::stream(params.seed, "synth/traffic");

  for (std::size_t i = 0; i < params.nodes; ++i) snap.add_node("n" + std::to_string(i));

  std::uint64_t scid_counter = 0;
  std::vector<NodeId> endpoints;  // one entry per channel end, for degree weighting
  auto open = [&](NodeId a, NodeId b) {
    snap.add_channel(make_scid(scid_counter++), a, b);
    endpoints.push_back(a);
    endpoints.push_back(b);
  };
  open(1, 0);
  for (NodeId i = 2; i < params.nodes; ++i) {
    const auto want = std::min<std::size_t>(params.attach_m, i);
    std::vector<NodeId> targets;
    while (targets.size() < want) {
      const NodeId t = endpoints[topo_rng.below(endpoints.size())];
      if (std::find(targets.begin(), targets.end(), t) == targets.end()) targets.push_back(t);
    }
    for (NodeId t : targets) open(i, t);
  }

  const auto& pd = params.policy;
  const auto day = std::uint64_t{86'400};
  for (const auto& c : snap.channels()) {
    for (unsigned dir = 0; dir < 2; ++dir) {
      ChannelPolicy p;
      p.timestamp = params.epoch - day - policy_rng.below(day);
      p.disabled = policy_rng.chance(pd.disabled_share);
      p.cltv_expiry_delta = pd.cltv;
      p.htlc_minimum_msat = pd.htlc_min_msat;
      p.htlc_maximum_msat = pd.htlc_max_msat;
      p.fee_base_msat = policy_rng.below(2 * pd.fee_base_msat + 1);
      p.fee_proportional_millionths = policy_rng.below(2 * pd.fee_ppm + 1);
      snap.set_policy(c.scid, dir, p);
    }
  }
  snap.finalize();

  // live policy state while generating
  std::vector<ChannelPolicy> current;
  EdgePool enabled, disabled, untouched;
  for (EdgeIndex e = 0; e < snap.edge_count(); ++e) {
    current.push_back(*snap.policy(e));
    (current.back().disabled ? disabled : enabled).insert(e);
    untouched.insert(e);
  }
  std::vector<UnixSeconds> node_ts(params.nodes);
  for (auto& ts : node_ts) ts = params.epoch - day - policy_rng.below(day);

  const double rate = params.mix.rate;
  if (rate <= 0 || params.duration.count() <= 0) return out;
  const double horizon = to_seconds(params.duration);
  double t = traffic_rng.exponential(rate);
  for (; t < horizon; t += traffic_rng.exponential(rate)) {
    TraceRecord rec;
    rec.inject_time = from_seconds(t);
    if (rec.inject_time >= params.duration) break;
    const UnixSeconds wall = params.epoch + static_cast<UnixSeconds>(std::floor(t));
    const auto kind = static_cast<MessageKind>(draw_index(params.mix.kind_shares, traffic_rng));

    if (kind == MessageKind::NodeAnnouncement) {
      const auto node = static_cast<NodeId>(traffic_rng.below(params.nodes));
      node_ts[node] = std::max(node_ts[node] + 1, wall);
      rec.payload = NodeAnnouncement{node, node_ts[node]};
    } else if (kind == MessageKind::ChannelAnnouncement) {
      const auto a = static_cast<NodeId>(traffic_rng.below(params.nodes));
      auto b = static_cast<NodeId>(traffic_rng.below(params.nodes - 1));
      if (b >= a) ++b;
      rec.payload = ChannelAnnouncement{make_scid(scid_counter++), a, b};
    } else {
      // redraw until the category is feasible on the current state
      UpdateCategory cat{};
      EdgeIndex edge = 0;
      while (true) {
        cat = kAllCategories[draw_index(params.mix.category_shares, traffic_rng)];
        if (cat == UpdateCategory::KeepAlive) {
          edge = untouched.empty() ? static_cast<EdgeIndex>(traffic_rng.below(current.size()))
                                   : untouched.draw(traffic_rng);
        } else if (cat == UpdateCategory::ChannelReopen) {
          if (disabled.empty()) continue;
          edge = disabled.draw(traffic_rng);
        } else if (cat == UpdateCategory::Misc) {
          edge = static_cast<EdgeIndex>(traffic_rng.below(current.size()));
        } else {
          if (enabled.empty()) continue;
          edge = enabled.draw(traffic_rng);
        }
        break;
      }

      ChannelPolicy next = current[edge];
      next.timestamp = std::max(current[edge].timestamp + 1, wall);
      switch (cat) {
        case UpdateCategory::KeepAlive: break;
        case UpdateCategory::ChannelClosure: next.disabled = true; break;
        case UpdateCategory::ChannelReopen: next.disabled = false; break;
        case UpdateCategory::Disruptive:
          switch (traffic_rng.below(3)) {
            case 0: next.fee_base_msat += 1 + traffic_rng.below(pd.fee_base_msat); break;
            case 1: next.fee_proportional_millionths += 1 + traffic_rng.below(pd.fee_ppm); break;
            default: next.cltv_expiry_delta = static_cast<std::uint16_t>(next.cltv_expiry_delta + 6 + traffic_rng.below(35)); break;
          }
          break;
        case UpdateCategory::NonDisruptive: {
          std::vector<int> options{3};  // raising htlc_max is always possible
          if (next.fee_base_msat > 0) options.push_back(0);
          if (next.fee_proportional_millionths > 0) options.push_back(1);
          if (next.cltv_expiry_delta > 18) options.push_back(2);
          switch (options[traffic_rng.below(options.size())]) {
            case 0: next.fee_base_msat -= 1 + traffic_rng.below(next.fee_base_msat); break;
            case 1: next.fee_proportional_millionths -= 1 + traffic_rng.below(next.fee_proportional_millionths); break;
            case 2: next.cltv_expiry_delta = static_cast<std::uint16_t>(next.cltv_expiry_delta - 1 - traffic_rng.below(next.cltv_expiry_delta - 18)); break;
            default: next.htlc_maximum_msat = next.htlc_maximum_msat.value_or(pd.htlc_max_msat) + 1'000'000; break;
          }
          break;
        }
        case UpdateCategory::Misc:
          next.htlc_minimum_msat = next.htlc_minimum_msat == pd.htlc_min_msat ? 1 : pd.htlc_min_msat;
          break;
      }

      if (next.disabled != current[edge].disabled) {
        if (next.disabled) {
          enabled.erase(edge);
          disabled.insert(edge);
        } else {
          disabled.erase(edge);
          enabled.insert(edge);
        }
      }
      untouched.erase(edge);
      current[edge] = next;
      rec.payload = ChannelUpdate{snap.edge_scid(edge), edge_direction(edge), next};
      out.intended.push_back(cat);
    }
    out.trace.records.push_back(std::move(rec));
  }
  return out;
}

}  // namespace lngossip
