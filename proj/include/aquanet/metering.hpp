#pragma once

#include <map>
#include <vector>

#include "aquanet/types.hpp"

namespace aquanet {

struct ConsumptionPeriod {
  Timestamp start = 0;
  FlowSeconds flow_seconds = 0;

  double m3() const { return flow_seconds_to_m3(flow_seconds); }
};

using ConsumptionSeries = std::vector<ConsumptionPeriod>;

// Aggregates water drawn by open valves into fixed periods. Volumes are kept
// as exact flow-seconds so attack-vs-baseline differentials compare exactly.
class ConsumptionMeter {
 public:
  explicit ConsumptionMeter(Seconds period = kSecondsPerHour) : period_(period) {}

  Seconds period() const { return period_; }

  // Accrue flow for one valve open over [from, to), split across periods.
  void add(const HostId& device, MilliCubicMetersPerHour flow_milli, Timestamp from, Timestamp to) {
    if (to <= from || flow_milli <= 0) return;
    Timestamp t = from;
    while (t < to) {
      const std::int64_t bucket = t / period_;
      const Timestamp bucket_end = (bucket + 1) * period_;
      const Seconds span = std::min(to, bucket_end) - t;
      const FlowSeconds fs = flow_milli * span;
      total_[bucket] += fs;
      per_device_[device][bucket] += fs;
      t += span;
    }
  }

  FlowSeconds total_flow_seconds() const {
    FlowSeconds sum = 0;
    for (const auto& [bucket, fs] : total_) sum += fs;
    return sum;
  }

  FlowSeconds device_flow_seconds(const HostId& device) const {
    auto it = per_device_.find(device);
    if (it == per_device_.end()) return 0;
    FlowSeconds sum = 0;
    for (const auto& [bucket, fs] : it->second) sum += fs;
    return sum;
  }

  // Dense series covering [0, horizon); trailing partial period included.
  ConsumptionSeries series(Timestamp horizon) const {
    ConsumptionSeries out;
    const std::int64_t buckets = (horizon + period_ - 1) / period_;
    out.reserve(static_cast<std::size_t>(buckets));
    for (std::int64_t b = 0; b < buckets; ++b) {
      auto it = total_.find(b);
      out.push_back({b * period_, it == total_.end() ? 0 : it->second});
    }
    return out;
  }

 private:
  Seconds period_;
  std::map<std::int64_t, FlowSeconds> total_;
  std::map<HostId, std::map<std::int64_t, FlowSeconds>> per_device_;
};

}  // namespace aquanet
