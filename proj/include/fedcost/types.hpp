#pragma once

#include <cmath>
#include <cstdint>
#include <string>

namespace fedcost {

using SimTime = double;  // simulated seconds since run start
using Money = double;    // dollars
using ClientId = std::string;
using ZoneId = std::string;
using InstanceId = std::uint64_t;

enum class PricingMode { Spot, OnDemand };
enum class StartKind { Cold, Warm };

inline constexpr double kSecondsPerHour = 3600.0;

// Exported money and time values carry six decimals; internal math stays at
// full precision.
inline double round6(double v) { return std::round(v * 1e6) / 1e6; }

inline const char* to_string(PricingMode m) {
  return m == PricingMode::Spot ? "spot" : "on_demand";
}

inline const char* to_string(StartKind k) {
  return k == StartKind::Cold ? "cold" : "warm";
}

}  // namespace fedcost
