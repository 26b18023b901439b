#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "aquanet/devices.hpp"
#include "aquanet/services.hpp"
#include "aquanet/sim.hpp"
#include "aquanet/watering.hpp"
#include "aquanet/weather.hpp"

namespace aquanet {

enum class AttackKind {
  SpoofConfig,
  PermanentDoS,
  WeatherValueSpoof,
  WeatherLocationSpoof,
  ScheduleReplay,
  ValveToggle
};

inline const char* attack_kind_name(AttackKind k) {
  switch (k) {
    case AttackKind::SpoofConfig: return "spoof_config";
    case AttackKind::PermanentDoS: return "permanent_dos";
    case AttackKind::WeatherValueSpoof: return "weather_value_spoof";
    case AttackKind::WeatherLocationSpoof: return "weather_location_spoof";
    case AttackKind::ScheduleReplay: return "schedule_replay";
    case AttackKind::ValveToggle: return "valve_toggle";
  }
  return "?";
}

struct AttackDirective {
  AttackKind kind = AttackKind::SpoofConfig;
  Timestamp start = 0;
  Timestamp end = 0;

  // kind-specific parameters
  std::int64_t band_min_milli_c = 0;      // WeatherValueSpoof temperature band
  std::int64_t band_max_milli_c = 50000;
  std::int64_t rain_milli_mm = 0;         // WeatherValueSpoof per-hour precipitation
  double fake_lat = 0.0;                  // WeatherLocationSpoof coordinates
  double fake_lon = 0.0;
  Seconds toggle_period = 10;             // ValveToggle
  std::optional<Timestamp> dos_end;       // PermanentDoS latch timestamp
  std::optional<WateringPlan> plan;       // ScheduleReplay payload

  void validate() const {
    if (start >= end) throw ConfigError("attack directive start must precede end");
    if (kind == AttackKind::ValveToggle && toggle_period <= 0)
      throw ConfigError("valve toggle period must be positive");
    if (kind == AttackKind::WeatherValueSpoof && band_min_milli_c > band_max_milli_c)
      throw ConfigError("weather spoof band is inverted");
  }
};

// The injected configuration: one plan watering around the clock for the
// whole attack window.
inline WateringPlan continuous_watering_plan(Timestamp start, Timestamp end, int zone_count) {
  WateringPlan p;
  p.zones.resize(static_cast<std::size_t>(zone_count));
  for (int z = 1; z <= zone_count; ++z) p.zones[static_cast<std::size_t>(z - 1)] = z;
  p.start = start;
  p.end = end;
  p.daily = {{0, kSecondsPerDay}};
  return p;
}

// --- configuration spoofing -------------------------------------------------

// Impersonates the GreenIQ cloud from MITM position. Ping requests get a
// fabricated timestamp response carrying `end`; configxml requests get a
// fabricated plan document watering continuously over [start, end]. Anything
// not aimed at the GreenIQ cloud passes untouched.
inline InterceptOutcome spoof_configuration(const TrafficEvent& packet, Timestamp start,
                                            Timestamp end, const HostId& bot = {}) {
  if (packet.direction != Direction::Request) return InterceptOutcome::pass();
  if (packet.dst_host != kGreenIqHost) return InterceptOutcome::pass();
  if (packet.method == Method::Post && packet.path == kGreenIqPingPath) {
    TrafficEvent resp = Simulation::make_response(packet, Document{{"timestamp", end}},
                                                  Origin::Interceptor);
    resp.origin_actor = bot;
    return InterceptOutcome::fabricate(packet, std::move(resp));
  }
  if (packet.method == Method::Get && packet.path == kGreenIqConfigPath) {
    const Document config = greeniq_config_document(
        end, {continuous_watering_plan(start, end, GreenIqDevice::kValveCount)});
    TrafficEvent resp = Simulation::make_response(packet, config, Origin::Interceptor);
    resp.origin_actor = bot;
    return InterceptOutcome::fabricate(packet, std::move(resp));
  }
  return InterceptOutcome::pass();
}

// --- weather forecast spoofing ------------------------------------------------

// Rewrites a forecast response in flight: temperatures are affinely rescaled
// into [band_min, band_max] and every hourly precipitation is set to `rain`.
// The document keeps its schema; anything that is not a weather response
// (or does not parse) passes untouched.
inline InterceptOutcome spoof_weather_values(const TrafficEvent& packet,
                                             std::int64_t band_min_milli_c,
                                             std::int64_t band_max_milli_c,
                                             std::int64_t rain_milli_mm,
                                             const HostId& bot = {}) {
  if (packet.direction != Direction::Response || packet.dst_host != kWeatherHost ||
      packet.path != kWeatherPath)
    return InterceptOutcome::pass();
  WeatherForecast f;
  try {
    f = forecast_from_document(packet.payload);
  } catch (const std::exception&) {
    return InterceptOutcome::pass();
  }
  std::int64_t obs_min = 0, obs_max = 0;
  if (!f.entries.empty()) {
    obs_min = obs_max = f.entries.front().temp_milli_c;
    for (const auto& e : f.entries) {
      obs_min = std::min(obs_min, e.temp_milli_c);
      obs_max = std::max(obs_max, e.temp_milli_c);
    }
  }
  for (auto& e : f.entries) {
    if (obs_max > obs_min)
      e.temp_milli_c = band_min_milli_c + (e.temp_milli_c - obs_min) *
                                              (band_max_milli_c - band_min_milli_c) /
                                              (obs_max - obs_min);
    else
      e.temp_milli_c = (band_min_milli_c + band_max_milli_c) / 2;
    e.precip_milli_mm = rain_milli_mm;
  }
  TrafficEvent injected = packet;
  injected.payload = forecast_to_document(f);
  injected.origin = Origin::Interceptor;
  injected.origin_actor = bot;
  return InterceptOutcome::modify(packet, std::move(injected));
}

// Rewrites the coordinates inside a weather request; the genuine (simulated)
// service then answers for the fake location and the device accepts it
// without checking.
inline InterceptOutcome spoof_weather_location(const TrafficEvent& packet, double fake_lat,
                                               double fake_lon, const HostId& bot = {}) {
  if (packet.direction != Direction::Request || packet.dst_host != kWeatherHost)
    return InterceptOutcome::pass();
  if (!packet.payload.is_object() || !packet.payload.contains("lat") ||
      !packet.payload.contains("lon"))
    return InterceptOutcome::pass();
  TrafficEvent injected = packet;
  injected.payload["lat"] = fake_lat;
  injected.payload["lon"] = fake_lon;
  injected.origin = Origin::Interceptor;
  injected.origin_actor = bot;
  return InterceptOutcome::modify(packet, std::move(injected));
}

// Handler factories binding the pure operations into the MITM hook.

inline MitmHandler make_spoof_config_handler(Timestamp start, Timestamp end, HostId bot) {
  return [start, end, bot = std::move(bot)](Simulation&, const TrafficEvent& ev) {
    return spoof_configuration(ev, start, end, bot);
  };
}

inline MitmHandler make_weather_value_handler(std::int64_t band_min, std::int64_t band_max,
                                              std::int64_t rain, HostId bot) {
  return [band_min, band_max, rain, bot = std::move(bot)](Simulation&, const TrafficEvent& ev) {
    return spoof_weather_values(ev, band_min, band_max, rain, bot);
  };
}

inline MitmHandler make_weather_location_handler(double lat, double lon, HostId bot) {
  return [lat, lon, bot = std::move(bot)](Simulation&, const TrafficEvent& ev) {
    return spoof_weather_location(ev, lat, lon, bot);
  };
}

// --- replay and valve attacks ---------------------------------------------

// Unauthenticated schedule replay against a BlueSpray local endpoint. Fails
// (returns false, nothing sent) when the target exposes no such endpoint.
// No credential exchange of any kind appears in the trace.
inline bool replay_schedule(Simulation& sim, const HostId& bot, const HostId& target,
                            const WateringPlan& plan) {
  if (!sim.has_local_http(target)) return false;
  TrafficEvent req;
  req.src = bot;
  req.dst_host = target;
  req.method = Method::LocalHttp;
  req.path = kBlueSpraySchedulePath;
  req.payload = bluespray_schedule_document({plan});
  req.origin = Origin::Bot;
  req.origin_actor = bot;
  sim.send_request(std::move(req));
  return true;
}

// Alternating valve bitstrings over SSH: open on even ticks, closed on odd,
// one tick per `period`, a final close at the end of the window. Total open
// time is the ceiling half of the toggle intervals.
class ValveToggleEngine {
 public:
  ValveToggleEngine(HostId bot, HostId target, Seconds period, Timestamp end)
      : bot_(std::move(bot)), target_(std::move(target)), period_(period), end_(end) {}

  // Returns false without emitting anything when SSH is disabled on the
  // target (the countermeasure).
  bool start(Simulation& sim, const GreenIqDevice& target_device) {
    if (!target_device.ssh_enabled()) return false;
    tick_ = sim.schedule(sim.now(), [this](Simulation& s) { tick(s); });
    running_ = true;
    return true;
  }

  void stop(Simulation& sim) {
    if (!running_) return;
    tick_.cancel();
    if (open_) send_valves(sim, all_closed());
    running_ = false;
    open_ = false;
  }

  bool running() const { return running_; }

 private:
  static std::string all_closed() { return std::string(GreenIqDevice::kValveCount, '0'); }
  static std::string master_open() {
    std::string bits = all_closed();
    bits[0] = '1';
    return bits;
  }

  void tick(Simulation& sim) {
    if (sim.now() >= end_) {
      stop(sim);
      return;
    }
    open_ = !open_;
    send_valves(sim, open_ ? master_open() : all_closed());
    tick_ = sim.schedule(sim.now() + period_, [this](Simulation& s) { tick(s); });
  }

  void send_valves(Simulation& sim, const std::string& bits) {
    TrafficEvent req;
    req.src = bot_;
    req.dst_host = target_;
    req.method = Method::SshExec;
    req.path = "set_gpio";
    req.payload = Document{{"valves", bits}};
    req.origin = Origin::Bot;
    req.origin_actor = bot_;
    sim.send_request(std::move(req));
  }

  HostId bot_;
  HostId target_;
  Seconds period_;
  Timestamp end_;
  EventHandle tick_;
  bool running_ = false;
  bool open_ = false;
};

}  // namespace aquanet
