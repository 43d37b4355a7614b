#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace lngossip {

/// Bandwidth lower bound: every node receives every message exactly once.
double b_min(std::uint64_t num_nodes, std::uint64_t num_messages, double avg_message_size);

struct ConvergenceStats {
  double mean = 0;
  double p95 = 0;
  double p100 = 0;
  /// Share of population pairs that have seen their message by t seconds,
  /// t = 0, 1, 2, ...
  std::vector<double> curve;
  std::uint64_t seen_pairs = 0;
  std::uint64_t population_pairs = 0;
};

/// Pools every (message, node) delay, in seconds. `population` counts the
/// pairs that should have been reached, including those never reached.
ConvergenceStats convergence_stats(std::vector<double> delays, std::uint64_t population);

struct PaymentCounts {
  std::uint64_t attempts = 0;
  std::uint64_t success = 0;
  std::uint64_t no_route = 0;
  std::uint64_t stale_failure = 0;
  std::uint64_t unconverged = 0;
};

struct RunCounters {
  std::uint64_t rate_limited = 0;
  std::uint64_t stale_dropped = 0;
  std::uint64_t keepalives_not_relayed = 0;
  std::uint64_t keepalives_emitted = 0;
  std::uint64_t unknown_channel_updates = 0;
  std::uint64_t stale_injections = 0;
  std::uint64_t reconcile_rounds = 0;
  std::uint64_t reconcile_decode_failures = 0;
  std::uint64_t events = 0;
};

struct RunReport {
  std::string protocol;
  std::uint64_t seed = 0;
  std::uint64_t nodes = 0;
  std::uint64_t messages = 0;
  std::uint64_t messages_broadcast = 0;
  /// Pairs whose node is outside the origin's component.
  std::uint64_t excluded_pairs = 0;

  ConvergenceStats convergence;

  std::uint64_t total_bytes = 0;
  double b_min = 0;
  double overhead_factor = 0;
  double mean_seen_count = 0;
  /// seen-count -> number of (message, node) pairs; zero counts omitted.
  std::map<std::uint32_t, std::uint64_t> redundancy;

  /// Broadcast-queue waiting time, 1 s buckets.
  std::map<std::int64_t, std::uint64_t> waiting_time;
  double max_waiting_time = 0;

  PaymentCounts payments;
  RunCounters counters;

  std::map<std::uint32_t, double> redundancy_shares() const;

  /// Sorted keys, doubles rounded to 6 decimals.
  nlohmann::json to_json() const;
  std::string canonical_json() const;

  void write_convergence_csv(std::ostream& out) const;  // time_s,share
  void write_redundancy_csv(std::ostream& out) const;   // bucket,count
  void write_waiting_csv(std::ostream& out) const;      // bucket,count
};

/// Rounds to 6 decimal places so serialized reports are stable.
double fixed6(double v);

}  // namespace lngossip
