#include <doctest.h>

#include <algorithm>
#include <set>

#include "lngossip/engine.hpp"
#include "lngossip/errors.hpp"
#include "lngossip/workload.hpp"
#include "support.hpp"

using namespace lngossip;
using lngossip::testing::path_edges;
using lngossip::testing::policy;
using lngossip::testing::shared_graph;

namespace {

EngineOptions options(const std::string& name) {
  EngineOptions o;
  o.protocol = preset(name);
  return o;
}

MessagePayload bump(ChannelId scid, unsigned dir, UnixSeconds ts) {
  return ChannelUpdate{scid, dir, policy(ts, 500)};
}

struct SmallWorld {
  Workload workload;
  explicit SmallWorld(std::uint64_t seed = 1, std::size_t nodes = 100) {
    SyntheticParams p;
    p.nodes = nodes;
    p.attach_m = 2;
    p.duration = whole_seconds(100);
    p.mix = TrafficMix::observed(2.0);
    p.seed = seed;
    auto w = generate_synthetic(p);
    workload.snapshot = std::make_shared<const NetworkSnapshot>(std::move(w.snapshot));
    workload.trace = std::move(w.trace);
    Rng rng = Rng::stream(seed, "payments");
    workload.payments = generate_payments(200, p.duration, 1000, nodes, rng);
    workload.duration = p.duration;
    workload.drain = whole_seconds(600);
  }
};

}  // namespace

TEST_CASE("event queue orders by time then insertion") {
  EventQueue q;
  q.schedule({SimTime{5}, 0, EventKind::StaggerTick, 0, 1});
  q.schedule({SimTime{3}, 0, EventKind::StaggerTick, 0, 2});
  q.schedule({SimTime{5}, 0, EventKind::StaggerTick, 0, 3});
  CHECK(q.pop().node == 2);
  CHECK(q.now() == SimTime{3});
  CHECK(q.pop().node == 1);
  CHECK(q.pop().node == 3);
  CHECK(q.empty());
  CHECK_THROWS_AS(q.schedule({SimTime{4}, 0, EventKind::StaggerTick}), ContractViolation);
  CHECK_NOTHROW(q.schedule({SimTime{5}, 0, EventKind::StaggerTick}));
}

TEST_CASE("delivery time is latency plus queued transfer") {
  Simulation sim(shared_graph(2, {{0, 1}}), options("flooding-4"));
  const auto msg = sim.inject(SimTime{0}, bump(1, 0, 2000), 0);
  sim.add_payments({PaymentAttempt{whole_seconds(10), 0, 1, 1000}});
  std::vector<SimTime> arrivals;
  sim.on_event([&](const Event& e) {
    if (e.kind != EventKind::PaymentAttempt) return;
    arrivals.push_back(sim.deliver(0, 1, msg, 128));
    arrivals.push_back(sim.deliver(0, 1, msg, 1'000'000));
    arrivals.push_back(sim.deliver(1, 0, msg, 0));
  });
  sim.run(whole_seconds(10));
  REQUIRE(arrivals.size() == 3);
  CHECK(arrivals[0] == SimTime{10'100'128});
  CHECK(arrivals[1] == SimTime{10'000'000 + 100'000 + 1'000'128});
  CHECK(arrivals[2] == SimTime{10'100'000});
  CHECK(sim.pending_in_bytes(1) == 1'000'128);
  sim.run(whole_seconds(20));
  CHECK(sim.pending_in_bytes(1) == 0);
  CHECK(sim.seen_count(1, msg) == 3);
}

TEST_CASE("an empty run reports nothing") {
  Simulation sim(shared_graph(3, path_edges(3)), options("lnd"));
  const auto r = sim.run(whole_seconds(100));
  CHECK(r.messages == 0);
  CHECK(r.total_bytes == 0);
  CHECK(r.convergence.population_pairs == 0);
  CHECK(r.redundancy.empty());
}

TEST_CASE("two-node flooding delivers exactly once") {
  Simulation sim(shared_graph(2, {{0, 1}}), options("flooding-4"));
  const auto msg = sim.inject(SimTime{0}, bump(1, 0, 2000), 0);
  const auto r = sim.run(whole_seconds(10));
  CHECK(sim.seen_count(1, msg) == 1);
  CHECK(sim.first_seen(1, msg) == SimTime{100'128});
  CHECK(sim.view_policy(1, *sim.snapshot().find_edge(1, 0))->fee_base_msat == 500);
  CHECK(r.total_bytes == 128);
  CHECK(r.convergence.p100 == doctest::Approx(0.100128));
}

TEST_CASE("spanning tree on a line relays hop by hop") {
  Simulation sim(shared_graph(3, path_edges(3)), options("spanning"));
  const auto msg = sim.inject(SimTime{0}, bump(1, 0, 2000), 0);
  const auto r = sim.run(whole_seconds(10));
  CHECK(sim.first_seen(1, msg) == SimTime{100'128});
  CHECK(sim.first_seen(2, msg) == SimTime{200'256});
  CHECK(sim.seen_count(0, msg) == 0);
  CHECK(r.total_bytes == 256);
}

TEST_CASE("identical inputs give identical reports") {
  SmallWorld w;
  for (const auto* name : {"lnd", "c-lightning", "flooding-4", "spanning", "minisketch-8"}) {
    CAPTURE(name);
    const auto a = run_experiment(w.workload, options(name)).canonical_json();
    const auto b = run_experiment(w.workload, options(name)).canonical_json();
    CHECK(a == b);
  }
  auto other = options("lnd");
  other.seed = 2;
  CHECK(run_experiment(w.workload, other).canonical_json() !=
        run_experiment(w.workload, options("lnd")).canonical_json());
}

TEST_CASE("clock is monotone and bytes are conserved") {
  SmallWorld w;
  for (const auto* name : {"lnd", "lnd-inv", "flooding-8", "spanning", "minisketch-4"}) {
    CAPTURE(name);
    Simulation sim(w.workload.snapshot, options(name));
    sim.load_trace(w.workload.trace);
    sim.add_payments(w.workload.payments);
    SimTime last{0};
    bool monotone = true;
    sim.on_event([&](const Event& e) {
      monotone &= e.time >= last;
      last = e.time;
    });
    // stop after the trace so periodic work has nothing left to move
    sim.run(w.workload.duration + w.workload.drain);
    CHECK(monotone);
    std::uint64_t in = 0, out = 0, pending = 0;
    for (NodeId v = 0; v < sim.snapshot().node_count(); ++v) {
      in += sim.bytes_in(v);
      out += sim.bytes_out(v);
      pending += sim.pending_in_bytes(v);
    }
    CHECK(out == sim.total_bytes());
    CHECK(in + pending == out);
  }
}

TEST_CASE("pending bytes drain to zero after quiescence") {
  SmallWorld w;
  Simulation sim(w.workload.snapshot, options("flooding-4"));
  sim.load_trace(w.workload.trace);
  sim.run(whole_seconds(10'000));
  for (NodeId v = 0; v < sim.snapshot().node_count(); ++v) CHECK(sim.pending_in_bytes(v) == 0);
}

TEST_CASE("spanning tree delivers each message once per node") {
  SmallWorld w;
  const auto r = run_experiment(w.workload, options("spanning"));
  REQUIRE(r.messages_broadcast > 0);
  CHECK(r.redundancy.size() == 1);
  CHECK(r.redundancy.begin()->first == 1);
}

TEST_CASE("inventory mode reaches the same nodes with fewer bytes") {
  SmallWorld w;
  auto inv = options("flooding-4");
  inv.protocol.inventory_mode = true;
  const auto full = run_experiment(w.workload, options("flooding-4"));
  const auto lean = run_experiment(w.workload, inv);
  CHECK(lean.convergence.seen_pairs == full.convergence.seen_pairs);
  CHECK(lean.total_bytes < full.total_bytes);
}

TEST_CASE("lnd copies per node stay near the syncer count") {
  SmallWorld w;
  const auto spec = preset("lnd");
  const auto r = run_experiment(w.workload, options("lnd"));
  REQUIRE_FALSE(r.redundancy.empty());
  CHECK(r.redundancy.rbegin()->first <= 2 * spec.syncer_count);
  CHECK(r.mean_seen_count > 1.0);
}

TEST_CASE("reconciliation rounds union the fresh sets") {
  SmallWorld w(3, 60);
  Simulation sim(w.workload.snapshot, options("minisketch-4"));
  sim.load_trace(w.workload.trace);
  std::size_t rounds = 0, moved = 0;
  bool unions = true;
  sim.on_reconcile([&](const ReconcileRecord& r) {
    ++rounds;
    std::set<MessageId> want_a(r.before_a.begin(), r.before_a.end());
    std::set<MessageId> want_b(r.before_b.begin(), r.before_b.end());
    for (auto* s : {&want_a, &want_b}) {
      s->insert(r.fresh_a.begin(), r.fresh_a.end());
      s->insert(r.fresh_b.begin(), r.fresh_b.end());
    }
    unions &= std::set<MessageId>(r.after_a.begin(), r.after_a.end()) == want_a;
    unions &= std::set<MessageId>(r.after_b.begin(), r.after_b.end()) == want_b;
    moved += r.after_a.size() - r.before_a.size() + r.after_b.size() - r.before_b.size();
  });
  sim.run(whole_seconds(700));
  CHECK(rounds > 0);
  CHECK(moved > 0);
  CHECK(unions);
}

TEST_CASE("a request for an unannounced message aborts the run") {
  Simulation sim(shared_graph(2, {{0, 1}}), options("lnd-inv"));
  const auto msg = sim.inject(whole_seconds(1), bump(1, 0, 2000), 0);
  sim.add_payments({PaymentAttempt{SimTime{0}, 0, 1, 1000}});
  sim.on_event([&](const Event& e) {
    if (e.kind == EventKind::PaymentAttempt) sim.deliver(0, 1, msg, 8, EventKind::RequestArrival);
  });
  try {
    sim.run(whole_seconds(5));
    FAIL("expected the run to abort");
  } catch (const std::runtime_error& e) {
    const std::string what = e.what();
    CHECK(what.find("RequestArrival") != std::string::npos);
    CHECK(what.find("node 1") != std::string::npos);
  }
}

TEST_CASE("payments are evaluated against ground truth") {
  SmallWorld w;
  const auto r = run_experiment(w.workload, options("flooding-4"));
  CHECK(r.payments.attempts == 200);
  CHECK(r.payments.success + r.payments.no_route + r.payments.stale_failure == 200);
  CHECK(r.payments.unconverged <= r.payments.attempts);
}
