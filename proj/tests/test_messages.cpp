#include <doctest.h>

#include "lngossip/errors.hpp"
#include "lngossip/messages.hpp"
#include "lngossip/rng.hpp"
#include "support.hpp"

using namespace lngossip;
using lngossip::testing::policy;

namespace {

GossipMessage update(MessageId id, ChannelId scid, unsigned dir, UnixSeconds ts) {
  return {id, 0, SimTime{0}, ChannelUpdate{scid, dir, policy(ts)}};
}

}  // namespace

TEST_CASE("wire sizes per kind") {
  CHECK(wire_size(update(0, 1, 0, 1)) == 128);
  CHECK(inventory_size() == 8);
  CHECK(wire_size({0, 0, SimTime{0}, NodeAnnouncement{3, 10}}) == 140);
  CHECK(wire_size({0, 0, SimTime{0}, ChannelAnnouncement{1, 0, 1}}) == 430);
  WireSizes custom;
  custom.node_announcement = 200;
  CHECK(wire_size({0, 0, SimTime{0}, NodeAnnouncement{3, 10}}, custom) == 200);
  CHECK(custom.of(MessageKind::NodeAnnouncement) == 200);
}

TEST_CASE("supersedes compares timestamps strictly") {
  CHECK(supersedes(update(0, 1, 0, 200), update(1, 1, 0, 100)));
  CHECK_FALSE(supersedes(update(0, 1, 0, 100), update(1, 1, 0, 200)));
  CHECK_FALSE(supersedes(update(0, 1, 0, 100), update(1, 1, 0, 100)));
}

TEST_CASE("supersedes rejects messages with different keys") {
  CHECK_THROWS_AS(supersedes(update(0, 1, 0, 200), update(1, 1, 1, 100)), ContractViolation);
  CHECK_THROWS_AS(supersedes(update(0, 1, 0, 200), update(1, 2, 0, 100)), ContractViolation);
  GossipMessage node{2, 0, SimTime{0}, NodeAnnouncement{1, 5}};
  CHECK_THROWS_AS(supersedes(update(0, 1, 0, 200), node), ContractViolation);
}

TEST_CASE("supersedes is a strict order within a dedup class") {
  Rng rng(9);
  for (int i = 0; i < 2000; ++i) {
    const auto a = update(0, 4, 1, rng.below(50));
    const auto b = update(1, 4, 1, rng.below(50));
    const auto c = update(2, 4, 1, rng.below(50));
    REQUIRE_FALSE(supersedes(a, a));
    if (supersedes(a, b)) REQUIRE_FALSE(supersedes(b, a));
    if (supersedes(a, b) && supersedes(b, c)) REQUIRE(supersedes(a, c));
  }
}

TEST_CASE("dedup keys follow the natural key of each kind") {
  CHECK(dedup_key(update(0, 7, 1, 5)) == dedup_key(update(1, 7, 1, 9)));
  CHECK_FALSE(dedup_key(update(0, 7, 1, 5)) == dedup_key(update(1, 7, 0, 5)));
  GossipMessage n1{0, 0, SimTime{0}, NodeAnnouncement{3, 1}};
  GossipMessage n2{1, 2, SimTime{0}, NodeAnnouncement{3, 2}};
  CHECK(dedup_key(n1) == dedup_key(n2));
  GossipMessage c1{0, 0, SimTime{0}, ChannelAnnouncement{7, 0, 1}};
  CHECK_FALSE(dedup_key(c1) == dedup_key(update(0, 7, 0, 0)));
  CHECK(n1.kind() == MessageKind::NodeAnnouncement);
  CHECK(n2.timestamp() == 2);
  CHECK(c1.timestamp() == 0);
}
