#pragma once

#include <algorithm>
#include <functional>
#include <string>
#include <vector>

#include "aquanet/sim.hpp"

namespace aquanet {

struct DailyEntry {
  Seconds offset = 0;    // start-of-day offset
  Seconds duration = 0;  // unscaled watering duration

  bool operator==(const DailyEntry&) const = default;
};

struct WateringPlan {
  std::vector<int> zones;  // 1-based zone indices
  Timestamp start = 0;
  Timestamp end = 0;
  std::vector<DailyEntry> daily;

  bool operator==(const WateringPlan&) const = default;
};

// Throws ConfigError naming the violated field.
inline void validate_plan(const WateringPlan& plan, int zone_count) {
  if (plan.start >= plan.end) throw ConfigError("plan start must precede end");
  if (plan.zones.empty()) throw ConfigError("plan has no zones");
  for (int z : plan.zones) {
    if (z < 1 || z > zone_count)
      throw ConfigError("zone index " + std::to_string(z) + " outside 1.." +
                        std::to_string(zone_count));
  }
  for (const auto& e : plan.daily) {
    if (e.offset < 0 || e.offset >= kSecondsPerDay) throw ConfigError("daily offset out of range");
    if (e.duration <= 0 || e.duration > kSecondsPerDay) throw ConfigError("daily duration out of range");
  }
}

// Drives a device's valve bank from its watering plans. Zones are
// ref-counted so overlapping plan entries behave; consumption accrues into
// the simulation meter on every 1 -> 0 transition and at finalize().
class WateringController {
 public:
  WateringController(HostId device, int zone_count, MilliCubicMetersPerHour zone_flow)
      : device_(std::move(device)),
        zone_flow_(zone_flow),
        valves_(static_cast<std::size_t>(zone_count), '0'),
        open_count_(static_cast<std::size_t>(zone_count), 0),
        opened_at_(static_cast<std::size_t>(zone_count), 0),
        open_seconds_(static_cast<std::size_t>(zone_count), 0) {}

  int zone_count() const { return static_cast<int>(valves_.size()); }
  const std::string& valves() const { return valves_; }
  const std::vector<WateringPlan>& plans() const { return plans_; }
  MilliCubicMetersPerHour zone_flow() const { return zone_flow_; }

  Seconds zone_open_seconds(int zone) const { return open_seconds_[static_cast<std::size_t>(zone - 1)]; }
  Seconds total_open_seconds() const {
    Seconds sum = 0;
    for (Seconds s : open_seconds_) sum += s;
    return sum;
  }

  // Per-day scaling in permille (RainMachine watering percentage); absent
  // means the base plan runs unscaled.
  void set_permille_fn(std::function<int(std::int64_t day)> fn) { permille_ = std::move(fn); }

  void set_plans(Simulation& sim, std::vector<WateringPlan> plans) {
    plans_ = std::move(plans);
    reschedule(sim);
  }

  // Recomputes all future valve transitions. Any currently open zone is
  // closed (consumption accrued) and reopened in the same step if the new
  // schedule still covers `now`, so no open time is lost or double counted.
  void reschedule(Simulation& sim) {
    for (auto& h : pending_) h.cancel();
    pending_.clear();
    for (int z = 1; z <= zone_count(); ++z) {
      auto idx = static_cast<std::size_t>(z - 1);
      if (open_count_[idx] > 0) {
        open_count_[idx] = 1;
        close_zone(sim, z);
      }
    }
    const Timestamp now = sim.now();
    const Timestamp horizon = sim.horizon();
    for (const auto& plan : plans_) {
      const Timestamp window_end = std::min(plan.end, horizon);
      std::int64_t day = (std::max<Timestamp>(plan.start, now) - kSecondsPerDay) / kSecondsPerDay;
      if (day < 0) day = 0;
      for (; day * kSecondsPerDay < window_end; ++day) {
        for (const auto& entry : plan.daily) {
          const Seconds scaled = entry.duration * permille_for(day) / 1000;
          if (scaled <= 0) continue;
          const Timestamp begin = day * kSecondsPerDay + entry.offset;
          const Timestamp lo = std::max({begin, plan.start, now});
          const Timestamp hi = std::min(begin + scaled, plan.end);
          if (hi <= lo) continue;
          pending_.push_back(sim.schedule(lo, [this, zones = plan.zones](Simulation& s) {
            for (int z : zones) open_zone(s, z);
          }));
          pending_.push_back(sim.schedule(hi, [this, zones = plan.zones](Simulation& s) {
            for (int z : zones) close_zone(s, z);
          }));
        }
      }
    }
  }

  // Direct valve write (the SSH exec path). Overrides plan state until the
  // next scheduled transition touches the same zones.
  void force_valves(Simulation& sim, const std::string& bits) {
    if (static_cast<int>(bits.size()) != zone_count())
      throw SimError("valve bitstring must have length " + std::to_string(zone_count()));
    for (char c : bits)
      if (c != '0' && c != '1') throw SimError("valve bitstring must be binary");
    for (int z = 1; z <= zone_count(); ++z) {
      auto idx = static_cast<std::size_t>(z - 1);
      const bool want = bits[idx] == '1';
      const bool is_open = open_count_[idx] > 0;
      if (want && !is_open) {
        open_count_[idx] = 1;
        opened_at_[idx] = sim.now();
        valves_[idx] = '1';
      } else if (!want && is_open) {
        open_count_[idx] = 1;
        close_zone(sim, z);
      }
    }
  }

  // Accrues still-open zones up to `at`. Call once when the run ends.
  void finalize(Simulation& sim, Timestamp at) {
    for (int z = 1; z <= zone_count(); ++z) {
      auto idx = static_cast<std::size_t>(z - 1);
      if (open_count_[idx] > 0) {
        sim.meter().add(device_, zone_flow_, opened_at_[idx], at);
        open_seconds_[idx] += at - opened_at_[idx];
        open_count_[idx] = 0;
        valves_[idx] = '0';
      }
    }
  }

 private:
  int permille_for(std::int64_t day) const { return permille_ ? permille_(day) : 1000; }

  void open_zone(Simulation& sim, int zone) {
    auto idx = static_cast<std::size_t>(zone - 1);
    if (open_count_[idx]++ == 0) {
      opened_at_[idx] = sim.now();
      valves_[idx] = '1';
    }
  }

  void close_zone(Simulation& sim, int zone) {
    auto idx = static_cast<std::size_t>(zone - 1);
    if (open_count_[idx] == 0) return;
    if (--open_count_[idx] == 0) {
      sim.meter().add(device_, zone_flow_, opened_at_[idx], sim.now());
      open_seconds_[idx] += sim.now() - opened_at_[idx];
      valves_[idx] = '0';
    }
  }

  HostId device_;
  MilliCubicMetersPerHour zone_flow_;
  std::string valves_;
  std::vector<int> open_count_;
  std::vector<Timestamp> opened_at_;
  std::vector<Seconds> open_seconds_;
  std::vector<WateringPlan> plans_;
  std::vector<EventHandle> pending_;
  std::function<int(std::int64_t)> permille_;
};

// --- plan document encodings ------------------------------------------

// GreenIQ configuration document: a flat plan list, one item per
// (zone, daily entry) pair, fields (zone, start, end, daily_offset, duration).
inline Document greeniq_config_document(Timestamp config_time,
                                        const std::vector<WateringPlan>& plans) {
  Document items = Document::array();
  for (const auto& p : plans)
    for (int zone : p.zones)
      for (const auto& e : p.daily)
        items.push_back({{"zone", zone},
                         {"start", p.start},
                         {"end", p.end},
                         {"daily_offset", e.offset},
                         {"duration", e.duration}});
  return {{"config_time", config_time}, {"plans", std::move(items)}};
}

inline std::vector<WateringPlan> parse_greeniq_config(const Document& doc, int zone_count) {
  std::vector<WateringPlan> plans;
  for (const auto& item : doc.at("plans")) {
    WateringPlan p;
    p.zones = {item.at("zone").get<int>()};
    p.start = item.at("start").get<Timestamp>();
    p.end = item.at("end").get<Timestamp>();
    p.daily = {{item.at("daily_offset").get<Seconds>(), item.at("duration").get<Seconds>()}};
    validate_plan(p, zone_count);
    plans.push_back(std::move(p));
  }
  return plans;
}

// BlueSpray schedule payload: {plans: [{zones, start, end, schedule}]}.
inline Document bluespray_schedule_document(const std::vector<WateringPlan>& plans) {
  Document items = Document::array();
  for (const auto& p : plans) {
    Document sched = Document::array();
    for (const auto& e : p.daily) sched.push_back({{"offset", e.offset}, {"duration", e.duration}});
    items.push_back(
        {{"zones", p.zones}, {"start", p.start}, {"end", p.end}, {"schedule", std::move(sched)}});
  }
  return {{"plans", std::move(items)}};
}

inline std::vector<WateringPlan> parse_bluespray_schedule(const Document& doc, int zone_count) {
  std::vector<WateringPlan> plans;
  for (const auto& item : doc.at("plans")) {
    WateringPlan p;
    p.zones = item.at("zones").get<std::vector<int>>();
    p.start = item.at("start").get<Timestamp>();
    p.end = item.at("end").get<Timestamp>();
    for (const auto& e : item.at("schedule"))
      p.daily.push_back({e.at("offset").get<Seconds>(), e.at("duration").get<Seconds>()});
    validate_plan(p, zone_count);
    plans.push_back(std::move(p));
  }
  return plans;
}

}  // namespace aquanet
