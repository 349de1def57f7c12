#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <string>

namespace socketstore {

/// Simulated time. Integer nanoseconds since the start of a simulation run.
using SimTime = std::chrono::nanoseconds;
using SimDuration = std::chrono::nanoseconds;

constexpr SimDuration from_ms(double ms) {
  return SimDuration{static_cast<std::int64_t>(ms * 1e6 + (ms >= 0 ? 0.5 : -0.5))};
}

constexpr SimDuration from_seconds(double s) { return from_ms(s * 1e3); }

constexpr double to_ms(SimDuration d) { return static_cast<double>(d.count()) / 1e6; }

constexpr double to_seconds(SimDuration d) { return static_cast<double>(d.count()) / 1e9; }

/// Exact decimal rendering of a duration in milliseconds with six fractional
/// digits (nanosecond resolution), independent of floating-point formatting.
std::string format_ms(SimDuration d);

}  // namespace socketstore
