#include <doctest.h>

#include <sstream>

#include "lngossip/errors.hpp"
#include "lngossip/payments.hpp"
#include "route_oracle.hpp"
#include "support.hpp"

using namespace lngossip;
using lngossip::testing::graph;
using lngossip::testing::policy;

namespace {

struct MapView {
  std::vector<std::optional<ChannelPolicy>> policies;
  explicit MapView(const NetworkSnapshot& s) {
    for (EdgeIndex e = 0; e < s.edge_count(); ++e) policies.push_back(s.policy(e));
  }
  PolicyLookup lookup() const {
    return [this](EdgeIndex e) { return policies[e] ? &*policies[e] : nullptr; };
  }
};

PolicyLookup snapshot_view(const NetworkSnapshot& s) {
  return [&s](EdgeIndex e) { return s.policy(e) ? &*s.policy(e) : nullptr; };
}

}  // namespace

TEST_CASE("edge fee examples") {
  CHECK(edge_fee(policy(1, 1000, 100), 1'000'000) == 1100);
  CHECK(edge_fee(policy(1, 0, 0), 1'000'000) == 0);
  CHECK(edge_fee(policy(1, 1, 1'000'000), 5) == 6);
  CHECK(edge_fee(policy(1, 0, 1), 999'999) == 0);  // floor
}

TEST_CASE("cheaper of two parallel routes wins") {
  NetworkSnapshot s;
  s.add_node();
  s.add_node();
  s.add_channel(1, 0, 1);
  s.add_channel(2, 0, 1);
  s.set_policy(1, 0, policy(1, 20, 0));
  s.set_policy(2, 0, policy(1, 10, 0));
  s.finalize();
  const auto r = find_route(s, snapshot_view(s), 0, 1, 1000);
  REQUIRE(r);
  CHECK(r->edges == std::vector<EdgeIndex>{*s.find_edge(2, 0)});
  CHECK(r->total_fee == 10);
}

TEST_CASE("disabled edge in the view leaves no route") {
  auto s = graph(2, {{0, 1}});
  MapView view(s);
  view.policies[*s.find_edge(1, 0)]->disabled = true;
  CHECK_FALSE(find_route(s, view.lookup(), 0, 1, 1000));
}

TEST_CASE("two cheap hops beat one expensive hop") {
  // triangle 0-1, 1-2, 0-2
  NetworkSnapshot s;
  for (int i = 0; i < 3; ++i) s.add_node();
  s.add_channel(1, 0, 1);
  s.add_channel(2, 1, 2);
  s.add_channel(3, 0, 2);
  s.set_policy(1, 0, policy(1, 1, 0));
  s.set_policy(2, 0, policy(1, 1, 0));
  s.set_policy(3, 0, policy(1, 50, 0));
  s.finalize();
  const auto r = find_route(s, snapshot_view(s), 0, 2, 1000);
  REQUIRE(r);
  CHECK(r->edges.size() == 2);
  CHECK(r->total_fee == 2);
}

TEST_CASE("equal fees prefer fewer hops") {
  NetworkSnapshot s;
  for (int i = 0; i < 3; ++i) s.add_node();
  s.add_channel(1, 0, 1);
  s.add_channel(2, 1, 2);
  s.add_channel(3, 0, 2);
  s.set_policy(1, 0, policy(1, 0, 0));
  s.set_policy(2, 0, policy(1, 0, 0));
  s.set_policy(3, 0, policy(1, 0, 0));
  s.finalize();
  const auto r = find_route(s, snapshot_view(s), 0, 2, 1000);
  REQUIRE(r);
  CHECK(r->edges.size() == 1);
}

TEST_CASE("htlc limits exclude edges") {
  auto s = graph(2, {{0, 1}});
  MapView view(s);
  view.policies[*s.find_edge(1, 0)]->htlc_minimum_msat = 5000;
  CHECK_FALSE(find_route(s, view.lookup(), 0, 1, 1000));
  view.policies[*s.find_edge(1, 0)]->htlc_minimum_msat = 1;
  view.policies[*s.find_edge(1, 0)]->htlc_maximum_msat = 999;
  CHECK_FALSE(find_route(s, view.lookup(), 0, 1, 1000));
}

TEST_CASE("routing to self is rejected") {
  auto s = graph(2, {{0, 1}});
  CHECK_THROWS_AS(find_route(s, snapshot_view(s), 1, 1, 1000), std::invalid_argument);
}

TEST_CASE("prune filter drops stale policies") {
  auto s = graph(2, {{0, 1}});
  RouteFilter f;
  f.now = 1000 + 14 * 86'400;
  CHECK(find_route(s, snapshot_view(s), 0, 1, 1000, f));
  f.now = 1001 + 14 * 86'400;
  CHECK_FALSE(find_route(s, snapshot_view(s), 0, 1, 1000, f));
}

TEST_CASE("find_route matches exhaustive enumeration") {
  Rng rng(2024);
  int routed = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const auto s = lngossip::testing::random_small_graph(rng, 8);
    const auto view = snapshot_view(s);
    const auto src = static_cast<NodeId>(rng.below(s.node_count()));
    auto dst = static_cast<NodeId>(rng.below(s.node_count() - 1));
    if (dst >= src) ++dst;
    const Millisatoshi amount = rng.chance(0.5) ? 1000 : 100'000;
    const auto got = find_route(s, view, src, dst, amount);
    const auto want = lngossip::testing::exhaustive_route(s, view, src, dst, amount);
    REQUIRE(got.has_value() == want.has_value());
    if (!got) continue;
    ++routed;
    REQUIRE(got->total_fee == want->fee);
    REQUIRE(got->edges == want->edges);
  }
  CHECK(routed > 50);
}

TEST_CASE("payment outcomes against ground truth") {
  auto s = graph(3, {{0, 1}, {1, 2}});
  MapView view(s);
  MapView truth(s);
  const PaymentAttempt att{SimTime{0}, 0, 2, 1000};

  auto same = evaluate_payment(s, view.lookup(), truth.lookup(), att);
  CHECK(same.status == PaymentStatus::Success);
  CHECK_FALSE(same.unconverged);
  CHECK(same.route.size() == 2);

  // second hop disabled in truth
  auto& hop = *truth.policies[*s.find_edge(2, 0)];
  hop.disabled = true;
  hop.timestamp = 2000;
  auto stale = evaluate_payment(s, view.lookup(), truth.lookup(), att);
  CHECK(stale.status == PaymentStatus::StaleFailure);
  CHECK(stale.unconverged);

  // fee lowered: still succeeds, but the source is behind
  hop.disabled = false;
  hop.fee_base_msat = 1;
  auto cheaper = evaluate_payment(s, view.lookup(), truth.lookup(), att);
  CHECK(cheaper.status == PaymentStatus::Success);
  CHECK(cheaper.unconverged);

  // fee raised or cltv raised: fails
  hop.fee_base_msat = 5000;
  CHECK(evaluate_payment(s, view.lookup(), truth.lookup(), att).status == PaymentStatus::StaleFailure);
  hop.fee_base_msat = 1000;
  hop.cltv_expiry_delta = 144;
  CHECK(evaluate_payment(s, view.lookup(), truth.lookup(), att).status == PaymentStatus::StaleFailure);

  // no route
  auto isolated = graph(3, {{0, 1}});
  MapView iv(isolated);
  auto none = evaluate_payment(isolated, iv.lookup(), iv.lookup(), att);
  CHECK(none.status == PaymentStatus::NoRoute);
  CHECK(none.route.empty());
}

TEST_CASE("unconverged is false whenever route timestamps match") {
  Rng rng(77);
  for (int trial = 0; trial < 100; ++trial) {
    const auto s = lngossip::testing::random_small_graph(rng, 8);
    MapView view(s);
    MapView truth(s);
    for (auto& p : truth.policies) {
      if (p && rng.chance(0.3)) {
        p->timestamp += 10;
        p->fee_base_msat = rng.below(4);
      }
    }
    const PaymentAttempt att{SimTime{0}, 0, 1, 1000};
    const auto out = evaluate_payment(s, view.lookup(), truth.lookup(), att);
    bool lagging = false;
    for (auto e : out.route) lagging |= truth.policies[e]->timestamp != view.policies[e]->timestamp;
    REQUIRE(out.unconverged == lagging);
    if (out.status == PaymentStatus::NoRoute) REQUIRE(out.route.empty());
  }
}

TEST_CASE("generated payments are sorted with distinct endpoints") {
  Rng rng(3);
  const auto p = generate_payments(5000, whole_seconds(100), 1000, 10, rng);
  REQUIRE(p.size() == 5000);
  for (std::size_t i = 0; i < p.size(); ++i) {
    CHECK(p[i].source != p[i].destination);
    CHECK(p[i].destination < 10);
    CHECK(p[i].time < whole_seconds(100));
    if (i > 0) CHECK(p[i - 1].time <= p[i].time);
  }
  CHECK(generate_payments(10, SimTime{0}, 1000, 10, rng).empty());
}

TEST_CASE("payment schedule parses") {
  std::istringstream in("{\"t\":1.5,\"src\":0,\"dst\":2,\"amt\":1000}\n{\"t\":0.5,\"src\":1,\"dst\":0,\"amt\":7}\n");
  const auto p = parse_payments(in);
  REQUIRE(p.size() == 2);
  CHECK(p[0].time == SimTime{500'000});
  CHECK(p[1].amount_msat == 1000);
  std::istringstream bad("{\"t\":1,\"src\":0,\"dst\":0,\"amt\":1}\n");
  CHECK_THROWS(parse_payments(bad));
}
