#include "lngossip/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

namespace lngossip {

double b_min(std::uint64_t num_nodes, std::uint64_t num_messages, double avg_message_size) {
  return static_cast<double>(num_nodes) * static_cast<double>(num_messages) * avg_message_size;
}

double fixed6(double v) { return std::round(v * 1e6) / 1e6; }

ConvergenceStats convergence_stats(std::vector<double> delays, std::uint64_t population) {
  ConvergenceStats s;
  s.population_pairs = population;
  s.seen_pairs = delays.size();
  if (delays.empty()) return s;
  std::sort(delays.begin(), delays.end());
  s.mean = std::accumulate(delays.begin(), delays.end(), 0.0) / static_cast<double>(delays.size());
  const auto n = delays.size();
  const auto rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(n)));
  s.p95 = delays[std::max<std::size_t>(rank, 1) - 1];
  s.p100 = delays.back();

  const auto buckets = static_cast<std::size_t>(std::ceil(s.p100)) + 1;
  s.curve.assign(buckets, 0.0);
  std::size_t idx = 0;
  for (std::size_t t = 0; t < buckets; ++t) {
    while (idx < n && delays[idx] <= static_cast<double>(t)) ++idx;
    s.curve[t] = population == 0 ? 0.0 : static_cast<double>(idx) / static_cast<double>(population);
  }
  return s;
}

std::map<std::uint32_t, double> RunReport::redundancy_shares() const {
  std::uint64_t total = 0;
  for (const auto& [k, c] : redundancy) total += c;
  std::map<std::uint32_t, double> out;
  for (const auto& [k, c] : redundancy) {
    out[k] = total == 0 ? 0.0 : static_cast<double>(c) / static_cast<double>(total);
  }
  return out;
}

nlohmann::json RunReport::to_json() const {
  using nlohmann::json;
  json redundancy_json = json::object();
  for (const auto& [k, share] : redundancy_shares()) {
    redundancy_json[std::to_string(k)] = {{"pairs", redundancy.at(k)}, {"share", fixed6(share)}};
  }
  json waiting = json::object();
  for (const auto& [bucket, count] : waiting_time) waiting[std::to_string(bucket)] = count;

  return {
      {"protocol", protocol},
      {"seed", seed},
      {"nodes", nodes},
      {"messages", messages},
      {"messages_broadcast", messages_broadcast},
      {"excluded_pairs", excluded_pairs},
      {"convergence",
       {{"mean_s", fixed6(convergence.mean)},
        {"p95_s", fixed6(convergence.p95)},
        {"p100_s", fixed6(convergence.p100)},
        {"seen_pairs", convergence.seen_pairs},
        {"population_pairs", convergence.population_pairs},
        {"final_share", fixed6(convergence.curve.empty() ? 0.0 : convergence.curve.back())}}},
      {"bandwidth",
       {{"total_bytes", total_bytes},
        {"b_min_bytes", fixed6(b_min)},
        {"overhead_factor", fixed6(overhead_factor)},
        {"mean_seen_count", fixed6(mean_seen_count)}}},
      {"redundancy", redundancy_json},
      {"waiting_time", {{"histogram_1s", waiting}, {"max_s", fixed6(max_waiting_time)}}},
      {"payments",
       {{"attempts", payments.attempts},
        {"success", payments.success},
        {"no_route", payments.no_route},
        {"stale_failure", payments.stale_failure},
        {"unconverged", payments.unconverged}}},
      {"counters",
       {{"rate_limited", counters.rate_limited},
        {"stale_dropped", counters.stale_dropped},
        {"keepalives_not_relayed", counters.keepalives_not_relayed},
        {"keepalives_emitted", counters.keepalives_emitted},
        {"unknown_channel_updates", counters.unknown_channel_updates},
        {"stale_injections", counters.stale_injections},
        {"reconcile_rounds", counters.reconcile_rounds},
        {"reconcile_decode_failures", counters.reconcile_decode_failures},
        {"events", counters.events}}},
  };
}

std::string RunReport::canonical_json() const { return to_json().dump(2) + "\n"; }

void RunReport::write_convergence_csv(std::ostream& out) const {
  out << "time_s,share\n";
  for (std::size_t t = 0; t < convergence.curve.size(); ++t) {
    out << t << ',' << fixed6(convergence.curve[t]) << '\n';
  }
}

void RunReport::write_redundancy_csv(std::ostream& out) const {
  out << "bucket,count\n";
  for (const auto& [k, c] : redundancy) out << k << ',' << c << '\n';
}

void RunReport::write_waiting_csv(std::ostream& out) const {
  out << "bucket,count\n";
  for (const auto& [k, c] : waiting_time) out << k << ',' << c << '\n';
}

}  // namespace lngossip
