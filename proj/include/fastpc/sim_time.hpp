#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>

namespace fastpc {

/// Simulation clock: integer nanoseconds end to end.
using SimTime = std::chrono::nanoseconds;

inline SimTime from_seconds(double s) {
  return SimTime(static_cast<std::int64_t>(std::llround(s * 1e9)));
}

inline double to_seconds(SimTime t) { return static_cast<double>(t.count()) / 1e9; }

/// Serialization time of `bytes` on a link of `bits_per_second`.
inline SimTime transmission_time(std::uint32_t bytes, double bits_per_second) {
  return from_seconds(static_cast<double>(bytes) * 8.0 / bits_per_second);
}

}  // namespace fastpc
