#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>

namespace lngossip {

/// Simulation clock value. Integer microseconds keep runs bit-reproducible;
/// 1 byte at 1 MB/s is exactly one tick.
using SimTime = std::chrono::microseconds;

/// Unix-epoch seconds as carried in policy timestamps.
using UnixSeconds = std::uint64_t;

inline SimTime from_seconds(double s) {
  return SimTime{static_cast<std::int64_t>(std::llround(s * 1e6))};
}

constexpr SimTime whole_seconds(std::int64_t s) { return SimTime{s * 1'000'000}; }

constexpr double to_seconds(SimTime t) { return static_cast<double>(t.count()) / 1e6; }

}  // namespace lngossip
