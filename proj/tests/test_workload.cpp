#include <doctest.h>

#include <sstream>

#include "lngossip/catalog.hpp"
#include "lngossip/errors.hpp"
#include "lngossip/trace.hpp"
#include "lngossip/workload.hpp"
#include "support.hpp"

using namespace lngossip;
using lngossip::testing::graph;
using lngossip::testing::policy;

namespace {

Trace parse(const std::string& text) {
  std::istringstream in(text);
  return parse_trace(in);
}

SyntheticParams small(std::size_t nodes, std::size_t m, double messages, double seconds) {
  SyntheticParams p;
  p.nodes = nodes;
  p.attach_m = m;
  p.duration = from_seconds(seconds);
  p.mix = TrafficMix::observed(messages / seconds);
  return p;
}

}  // namespace

TEST_CASE("trace records parse and sort by time") {
  const auto t = parse(
      "{\"t\":\"node\",\"time\":5.0,\"node\":1,\"ts\":77}\n"
      "{\"t\":\"upd\",\"time\":1.5,\"scid\":3,\"dir\":1,\"ts\":10,\"disabled\":false,\"cltv\":40,"
      "\"htlc_min\":1,\"htlc_max\":null,\"fee_base\":0,\"fee_ppm\":0,\"origin\":2}\n"
      "\n"
      "{\"t\":\"ann\",\"time\":1.5,\"scid\":9,\"a\":0,\"b\":1}\n");
  REQUIRE(t.size() == 3);
  CHECK(t.records[0].inject_time == SimTime{1'500'000});
  CHECK(std::holds_alternative<ChannelUpdate>(t.records[0].payload));
  CHECK(t.records[0].origin_hint == NodeId{2});
  CHECK(std::holds_alternative<ChannelAnnouncement>(t.records[1].payload));  // stable among equal times
  CHECK(std::get<NodeAnnouncement>(t.records[2].payload).timestamp == 77);
}

TEST_CASE("trace errors carry the line number") {
  try {
    parse("{\"t\":\"ann\",\"time\":1,\"scid\":9,\"a\":0,\"b\":1}\n{\"t\":\"upd\",\"time\":2,\"scid\":1,\"dir\":2}\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(parse("{\"t\":\"ann\",\"time\":-1,\"scid\":9,\"a\":0,\"b\":1}\n"), ParseError);
  CHECK_THROWS_AS(parse("{\"t\":\"bogus\",\"time\":1}\n"), ParseError);
  CHECK_THROWS_AS(load_trace("/nonexistent/trace.jsonl"), std::runtime_error);
}

TEST_CASE("trace round trip") {
  const auto w = generate_synthetic(small(50, 2, 300, 100));
  std::ostringstream a;
  write_trace(a, w.trace);
  std::istringstream in(a.str());
  std::ostringstream b;
  write_trace(b, parse_trace(in));
  CHECK(a.str() == b.str());
}

TEST_CASE("origin attribution") {
  const auto s = graph(4, {{0, 1}, {2, 3}});
  Rng rng(1);
  TraceRecord r;
  r.payload = ChannelUpdate{2, 1, policy(5)};
  CHECK(attribute_origin(r, s, rng) == 3);
  r.origin_hint = 0;
  CHECK(attribute_origin(r, s, rng) == 0);
  r.origin_hint = 99;  // out of range hints are ignored
  CHECK(attribute_origin(r, s, rng) == 3);

  TraceRecord ann;
  ann.payload = ChannelAnnouncement{1, 1, 0};
  CHECK(attribute_origin(ann, s, rng) == 0);
  ann.payload = ChannelAnnouncement{500, 3, 2};
  CHECK(attribute_origin(ann, s, rng) == 2);

  TraceRecord node;
  node.payload = NodeAnnouncement{2, 1};
  CHECK(attribute_origin(node, s, rng) == 2);

  TraceRecord unknown;
  unknown.payload = ChannelUpdate{404, 0, policy(5)};
  for (int i = 0; i < 50; ++i) CHECK(attribute_origin(unknown, s, rng) < 4);
}

TEST_CASE("synthetic topology: n=100, m=2 opens 197 channels") {
  const auto w = generate_synthetic(small(100, 2, 0, 1));
  CHECK(w.snapshot.node_count() == 100);
  CHECK(w.snapshot.channel_count() == 197);
  CHECK(attachment_channel_count(100, 2) == 197);
  CHECK(w.snapshot.component_size(0) == 100);
  for (EdgeIndex e = 0; e < w.snapshot.edge_count(); ++e) CHECK(w.snapshot.policy(e).has_value());
}

TEST_CASE("zero duration yields an empty trace") {
  auto p = small(30, 2, 100, 10);
  p.duration = SimTime{0};
  const auto w = generate_synthetic(p);
  CHECK(w.trace.empty());
  CHECK(w.snapshot.channel_count() == attachment_channel_count(30, 2));
}

TEST_CASE("bad synthetic parameters are rejected") {
  CHECK_THROWS_AS(generate_synthetic(small(3, 4, 10, 10)), std::invalid_argument);
  auto p = small(30, 2, 10, 10);
  p.mix.kind_shares = {0.5, 0.5, 0.5};
  CHECK_THROWS_AS(generate_synthetic(p), std::invalid_argument);
}

TEST_CASE("generated updates classify as intended") {
  const auto w = generate_synthetic(small(200, 3, 5000, 1000));
  PolicyMap latest(w.snapshot);
  std::size_t i = 0;
  for (const auto& rec : w.trace.records) {
    const auto* u = std::get_if<ChannelUpdate>(&rec.payload);
    if (!u) continue;
    REQUIRE(i < w.intended.size());
    const auto got = classify_update(latest.find(u->scid, u->direction), u->policy);
    REQUIRE(to_string(got) == to_string(w.intended[i]));
    REQUIRE(apply_update(latest, *u));
    ++i;
  }
  CHECK(i == w.intended.size());
}

TEST_CASE("category shares are recovered within 2 points") {
  auto p = small(500, 3, 10'000, 1000);
  p.mix = TrafficMix::updates_only(10.0);
  const auto w = generate_synthetic(p);
  REQUIRE(w.trace.size() > 9000);
  CatalogOptions opts;
  opts.baseline = &w.snapshot;
  const auto report = catalog_trace(w.trace, opts);
  const auto target = p.mix.category_shares;
  const auto shares = report.shares_with_prev();
  for (std::size_t c = 0; c < kCategoryCount; ++c) CHECK(std::abs(shares[c] - target[c]) < 0.02);
}

TEST_CASE("synthetic generation is deterministic per seed") {
  auto p = small(80, 2, 500, 100);
  std::ostringstream a, b, c;
  write_trace(a, generate_synthetic(p).trace);
  write_trace(b, generate_synthetic(p).trace);
  p.seed = 2;
  write_trace(c, generate_synthetic(p).trace);
  CHECK(a.str() == b.str());
  CHECK(a.str() != c.str());
}

TEST_CASE("traffic mixes validate") {
  CHECK_NOTHROW(TrafficMix::observed(1.0).validate());
  const auto u = TrafficMix::updates_only(1.0);
  CHECK(u.kind_shares[static_cast<std::size_t>(MessageKind::ChannelUpdate)] == 1.0);
}
