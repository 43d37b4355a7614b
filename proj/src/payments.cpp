#include "lngossip/payments.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <limits>
#include <queue>
#include <tuple>

#include "json_io.hpp"

namespace lngossip {

Millisatoshi edge_fee(const ChannelPolicy& policy, Millisatoshi amount) {
  const auto prop = static_cast<unsigned __int128>(amount) * policy.fee_proportional_millionths /
                    1'000'000u;
  return policy.fee_base_msat + static_cast<Millisatoshi>(prop);
}

bool edge_usable(const ChannelPolicy* policy, Millisatoshi amount, const RouteFilter& filter) {
  if (policy == nullptr || policy->disabled) return false;
  if (amount < policy->htlc_minimum_msat) return false;
  if (policy->htlc_maximum_msat && amount > *policy->htlc_maximum_msat) return false;
  if (filter.now && policy->timestamp + filter.prune_after_seconds < *filter.now) return false;
  return true;
}

namespace {

constexpr Millisatoshi kUnreached = std::numeric_limits<Millisatoshi>::max();

struct Label {
  Millisatoshi fee = kUnreached;
  std::uint32_t hops = 0;
  EdgeIndex via = 0;
  bool has_via = false;
};

std::vector<EdgeIndex> path_to(const NetworkSnapshot& snapshot, const std::vector<Label>& labels,
                               NodeId node) {
  std::vector<EdgeIndex> path;
  while (labels[node].has_via) {
    path.push_back(labels[node].via);
    node = snapshot.edge_source(labels[node].via);
  }
  std::reverse(path.begin(), path.end());
  return path;
}

bool lex_less(const NetworkSnapshot& snapshot, const std::vector<EdgeIndex>& a,
              const std::vector<EdgeIndex>& b) {
  return std::lexicographical_compare(
      a.begin(), a.end(), b.begin(), b.end(), [&](EdgeIndex x, EdgeIndex y) {
        return std::make_pair(snapshot.edge_scid(x), edge_direction(x)) <
               std::make_pair(snapshot.edge_scid(y), edge_direction(y));
      });
}

}  // namespace

std::optional<Route> find_route(const NetworkSnapshot& snapshot, const PolicyLookup& view,
                                NodeId src, NodeId dst, Millisatoshi amount,
                                const RouteFilter& filter) {
  if (src == dst) throw std::invalid_argument("find_route: source equals destination");
  const auto n = snapshot.node_count();
  std::vector<Label> labels(n);
  std::vector<bool> done(n, false);
  using Entry = std::tuple<Millisatoshi, std::uint32_t, NodeId>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
  labels[src].fee = 0;
  heap.emplace(0, 0, src);

  while (!heap.empty()) {
    auto [fee, hops, u] = heap.top();
    heap.pop();
    if (done[u]) continue;
    done[u] = true;
    if (u == dst) break;
    for (const auto& adj : snapshot.adjacency(u)) {
      const NodeId v = adj.neighbor;
      if (done[v]) continue;
      const ChannelPolicy* p = view(adj.outgoing);
      if (!edge_usable(p, amount, filter)) continue;
      const Millisatoshi cand_fee = fee + edge_fee(*p, amount);
      const std::uint32_t cand_hops = hops + 1;
      auto& lv = labels[v];
      bool better = std::tie(cand_fee, cand_hops) < std::tie(lv.fee, lv.hops);
      if (!better && cand_fee == lv.fee && cand_hops == lv.hops) {
        auto cand = path_to(snapshot, labels, u);
        cand.push_back(adj.outgoing);
        better = lex_less(snapshot, cand, path_to(snapshot, labels, v));
      }
      if (better) {
        lv = {cand_fee, cand_hops, adj.outgoing, true};
        heap.emplace(cand_fee, cand_hops, v);
      }
    }
  }
  if (labels[dst].fee == kUnreached) return std::nullopt;
  return Route{path_to(snapshot, labels, dst), labels[dst].fee};
}

PaymentOutcome evaluate_payment(const NetworkSnapshot& snapshot, const PolicyLookup& view,
                                const PolicyLookup& truth, const PaymentAttempt& attempt,
                                const RouteFilter& filter) {
  PaymentOutcome out;
  auto route = find_route(snapshot, view, attempt.source, attempt.destination, attempt.amount_msat,
                          filter);
  if (!route) return out;
  out.route = std::move(route->edges);
  out.status = PaymentStatus::Success;
  for (EdgeIndex e : out.route) {
    const ChannelPolicy* seen = view(e);
    const ChannelPolicy* actual = truth(e);
    if (actual == nullptr || actual->timestamp > seen->timestamp) out.unconverged = true;
    const bool fails = actual == nullptr || !edge_usable(actual, attempt.amount_msat) ||
                       edge_fee(*actual, attempt.amount_msat) > edge_fee(*seen, attempt.amount_msat) ||
                       actual->cltv_expiry_delta > seen->cltv_expiry_delta;
    if (fails) out.status = PaymentStatus::StaleFailure;
  }
  return out;
}

std::vector<PaymentAttempt> generate_payments(std::size_t count, SimTime duration,
                                              Millisatoshi amount, std::size_t node_count,
                                              Rng& rng) {
  std::vector<PaymentAttempt> out;
  if (node_count < 2 || duration.count() <= 0) return out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    PaymentAttempt a;
    a.time = SimTime{static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(duration.count())))};
    a.source = static_cast<NodeId>(rng.below(node_count));
    a.destination = static_cast<NodeId>(rng.below(node_count - 1));
    if (a.destination >= a.source) ++a.destination;
    a.amount_msat = amount;
    out.push_back(a);
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const PaymentAttempt& x, const PaymentAttempt& y) { return x.time < y.time; });
  return out;
}

std::vector<PaymentAttempt> parse_payments(std::istream& in) {
  std::vector<PaymentAttempt> out;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto j = parse_json_line(text, line);
    PaymentAttempt a;
    a.time = from_seconds(json_field<double>(j, "t", line));
    a.source = json_field<NodeId>(j, "src", line);
    a.destination = json_field<NodeId>(j, "dst", line);
    a.amount_msat = json_field<Millisatoshi>(j, "amt", line);
    if (a.source == a.destination) throw ParseError(line, "payment source equals destination");
    if (a.time.count() < 0) throw ParseError(line, "negative payment time");
    out.push_back(a);
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const PaymentAttempt& x, const PaymentAttempt& y) { return x.time < y.time; });
  return out;
}

std::vector<PaymentAttempt> load_payments(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open payment schedule " + path.string());
  return parse_payments(in);
}

}  // namespace lngossip
