#include <doctest.h>

#include <sstream>

#include "lngossip/metrics.hpp"

using namespace lngossip;

TEST_CASE("b_min examples") {
  CHECK(b_min(1000, 2000, 128) == doctest::Approx(256'000'000.0));
  CHECK(b_min(0, 10, 128) == 0.0);
  CHECK(b_min(5, 3, 200) == doctest::Approx(3000.0));
}

TEST_CASE("convergence stats on a small sample") {
  std::vector<double> d{0.5, 1.5, 2.5, 3.0};
  for (int i = 0; i < 16; ++i) d.push_back(0.2);
  const auto s = convergence_stats(d, 25);
  CHECK(s.seen_pairs == 20);
  CHECK(s.population_pairs == 25);
  CHECK(s.p100 == doctest::Approx(3.0));
  CHECK(s.p95 == doctest::Approx(2.5));  // 19th of 20
  CHECK(s.mean == doctest::Approx((0.5 + 1.5 + 2.5 + 3.0 + 16 * 0.2) / 20));
  REQUIRE(s.curve.size() == 4);
  CHECK(s.curve[0] == 0.0);
  CHECK(s.curve[1] == doctest::Approx(17.0 / 25));
  CHECK(s.curve[3] == doctest::Approx(20.0 / 25));
}

TEST_CASE("single delay and empty samples") {
  const auto one = convergence_stats({4.0}, 1);
  CHECK(one.p95 == 4.0);
  CHECK(one.curve.back() == 1.0);
  const auto none = convergence_stats({}, 10);
  CHECK(none.seen_pairs == 0);
  CHECK(none.curve.empty());
  CHECK(none.p95 == 0.0);
}

TEST_CASE("convergence curve is nondecreasing and bounded") {
  std::vector<double> d;
  for (int i = 0; i < 500; ++i) d.push_back((i * 37 % 101) / 7.0);
  const auto s = convergence_stats(d, 600);
  for (std::size_t t = 1; t < s.curve.size(); ++t) CHECK(s.curve[t] >= s.curve[t - 1]);
  CHECK(s.curve.back() <= 1.0);
  CHECK(s.curve.back() == doctest::Approx(500.0 / 600));
}

TEST_CASE("fixed6 rounds to six places") {
  CHECK(fixed6(0.1234564) == 0.123456);
  CHECK(fixed6(0.1234566) == 0.123457);
  CHECK(fixed6(2.0) == 2.0);
}

TEST_CASE("report serialization is stable") {
  RunReport r;
  r.protocol = "lnd";
  r.seed = 7;
  r.convergence = convergence_stats({0.1, 0.3333333333}, 2);
  r.redundancy = {{1, 3}, {2, 1}};
  r.waiting_time = {{0, 5}, {12, 1}};
  r.total_bytes = 512;
  const auto a = r.canonical_json();
  CHECK(a == r.canonical_json());
  const auto j = nlohmann::json::parse(a);
  CHECK(j["convergence"]["mean_s"].get<double>() == doctest::Approx(0.216667));
  CHECK(j["redundancy"]["1"]["share"].get<double>() == doctest::Approx(0.75));
  CHECK(j["bandwidth"]["total_bytes"] == 512);
  CHECK(r.redundancy_shares().at(2) == doctest::Approx(0.25));
}

TEST_CASE("csv sidecars have headers") {
  RunReport r;
  r.convergence = convergence_stats({0.5}, 1);
  r.redundancy = {{2, 9}};
  r.waiting_time = {{3, 4}};
  std::ostringstream c, red, w;
  r.write_convergence_csv(c);
  r.write_redundancy_csv(red);
  r.write_waiting_csv(w);
  CHECK(c.str() == "time_s,share\n0,0\n1,1\n");
  CHECK(red.str() == "bucket,count\n2,9\n");
  CHECK(w.str() == "bucket,count\n3,4\n");
}
