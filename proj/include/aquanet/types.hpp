#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace aquanet {

// Simulation time base: whole seconds since scenario epoch. All protocol
// periodicities in this domain (60 s pings, 6 h weather polls, 10 s valve
// toggles) are integral seconds, and integer time keeps runs bit-reproducible.
using Timestamp = std::int64_t;
using Seconds = std::int64_t;

using HostId = std::string;

inline constexpr Seconds kSecondsPerHour = 3600;
inline constexpr Seconds kSecondsPerDay = 86400;

// Water volumes and flow rates are fixed-point thousandths (milli-m3 and
// milli-m3/h) so that solver agreement and differential-consumption checks
// are exact integer comparisons.
using MilliCubicMeters = std::int64_t;
using MilliCubicMetersPerHour = std::int64_t;

// One open valve-second at flow f milli-m3/h contributes f flow-seconds;
// 3.6e6 flow-seconds equal one cubic meter.
using FlowSeconds = std::int64_t;

inline double flow_seconds_to_m3(FlowSeconds fs) {
  return static_cast<double>(fs) / 3.6e6;
}

// Mean sprinkler flow over the 0.66..4.93 m3/h range.
inline constexpr MilliCubicMetersPerHour kSprinklerFlowMilli = 2795;
inline constexpr MilliCubicMetersPerHour kSprinklerFlowMinMilli = 660;
inline constexpr MilliCubicMetersPerHour kSprinklerFlowMaxMilli = 4930;

class SimError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace aquanet
