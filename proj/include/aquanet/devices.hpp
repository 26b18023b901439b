#pragma once

#include <algorithm>
#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "aquanet/services.hpp"
#include "aquanet/sim.hpp"
#include "aquanet/watering.hpp"
#include "aquanet/weather.hpp"

namespace aquanet {

enum class IrrigationKind { GreenIq, RainMachine, BlueSpray };

inline const char* kind_name(IrrigationKind k) {
  switch (k) {
    case IrrigationKind::GreenIq: return "GreenIQ";
    case IrrigationKind::RainMachine: return "RainMachine";
    case IrrigationKind::BlueSpray: return "BlueSpray";
  }
  return "?";
}

// Each vendor's cloud servers interface only with that vendor's devices; the
// absence of overlap is what makes hostname-match detection sound.
inline const std::vector<std::string>& cloud_hosts(IrrigationKind k) {
  static const std::vector<std::string> greeniq{kGreenIqHost};
  static const std::vector<std::string> rainmachine{kRainMachineHost};
  static const std::vector<std::string> bluespray{kBlueSprayCloudHost, kBlueSprayWwwHost};
  switch (k) {
    case IrrigationKind::GreenIq: return greeniq;
    case IrrigationKind::RainMachine: return rainmachine;
    case IrrigationKind::BlueSpray: return bluespray;
  }
  return greeniq;
}

inline constexpr std::array<IrrigationKind, 3> kAllIrrigationKinds{
    IrrigationKind::GreenIq, IrrigationKind::RainMachine, IrrigationKind::BlueSpray};

// Cloud TCP sessions are re-established a few times per hour. Gap ranges are
// chosen so every kind stays in the 6-11 sessions/hour band with GreenIQ the
// most frequent; RainMachine and BlueSpray occasionally stretch a gap toward
// the 15 minute ceiling, which keeps the 26 h p99 near 10 minutes.
struct SessionGapProfile {
  Seconds gap_min = 450;
  Seconds gap_max = 600;
  double long_p = 0.0;
  Seconds long_min = 0;
  Seconds long_max = 0;

  Seconds draw(RandomStream& rng) const {
    if (long_p > 0.0 && rng.chance(long_p)) return rng.uniform(long_min, long_max);
    return rng.uniform(gap_min, gap_max);
  }
};

inline SessionGapProfile default_gap_profile(IrrigationKind k) {
  switch (k) {
    case IrrigationKind::GreenIq: return {330, 400, 0.0, 0, 0};
    case IrrigationKind::RainMachine: return {450, 600, 0.003, 620, 880};
    case IrrigationKind::BlueSpray: return {420, 600, 0.003, 620, 880};
  }
  return {};
}

inline constexpr Seconds kGreenIqPingPeriod = 60;
inline constexpr Seconds kWeatherPollPeriod = 21600;  // four requests per day
inline constexpr Seconds kWeatherBootDelay = 1;

// Shared session machinery: TCP_CONNECT at each gap-drawn boundary,
// optionally followed by one sync request on the fresh connection. Owned by
// a device, which must outlive the simulation run.
class SessionEmitter {
 public:
  SessionEmitter(HostId host, std::function<std::string(RandomStream&)> pick_host,
                 std::string sync_path)
      : host_(std::move(host)), pick_host_(std::move(pick_host)), sync_path_(std::move(sync_path)) {}

  void start(Simulation& sim, RandomStream& rng, const SessionGapProfile& gaps) {
    rng_ = &rng;
    gaps_ = gaps;
    sim.schedule(sim.now() + rng.uniform(0, 59), [this](Simulation& s) { tick(s); });
  }

 private:
  void tick(Simulation& sim) {
    const std::string dst = pick_host_(*rng_);
    TrafficEvent connect;
    connect.src = host_;
    connect.dst_host = dst;
    connect.method = Method::TcpConnect;
    sim.send_request(std::move(connect));
    if (!sync_path_.empty()) {
      TrafficEvent syn;
      syn.src = host_;
      syn.dst_host = dst;
      syn.method = Method::Post;
      syn.path = sync_path_;
      syn.payload = Document{{"device", host_}};
      sim.send_request(std::move(syn));
    }
    sim.schedule(sim.now() + gaps_.draw(*rng_), [this](Simulation& s) { tick(s); });
  }

  HostId host_;
  std::function<std::string(RandomStream&)> pick_host_;
  std::string sync_path_;
  RandomStream* rng_ = nullptr;
  SessionGapProfile gaps_;
};

// --- GreenIQ ------------------------------------------------------------

struct GreenIqConfig {
  HostId id;
  MilliCubicMetersPerHour zone_flow = kSprinklerFlowMilli;
  bool ssh_enabled = true;
  std::vector<WateringPlan> initial_plans;
  SessionGapProfile gaps = default_gap_profile(IrrigationKind::GreenIq);
};

// GreenIQ hub: polls its cloud every minute for the timestamp of the last
// user update and fetches the plan configuration only when that timestamp is
// strictly newer than the one it stores. The stored timestamp is a latch:
// it never decreases, which is exactly what the permanent-DoS spoof abuses.
class GreenIqDevice {
 public:
  static constexpr int kValveCount = 8;

  GreenIqDevice(Simulation& sim, GreenIqConfig cfg)
      : cfg_(std::move(cfg)),
        session_rng_(sim.stream(cfg_.id + "/sessions")),
        ctl_(cfg_.id, kValveCount, cfg_.zone_flow),
        sessions_(cfg_.id, [](RandomStream&) { return std::string(kGreenIqHost); }, "") {}

  const HostId& id() const { return cfg_.id; }
  IrrigationKind kind() const { return IrrigationKind::GreenIq; }
  Timestamp current_config() const { return current_config_; }
  const std::string& valves() const { return ctl_.valves(); }
  const std::vector<WateringPlan>& plans() const { return ctl_.plans(); }

  // every applied configuration: when it was applied and which user-update
  // timestamp it carried
  struct AcceptedConfig {
    Timestamp at = 0;
    Timestamp config = 0;
  };
  const std::vector<AcceptedConfig>& accepted_configs() const { return accepted_configs_; }
  bool ssh_enabled() const { return cfg_.ssh_enabled; }
  WateringController& controller() { return ctl_; }

  void install(Simulation& sim) {
    ctl_.set_plans(sim, cfg_.initial_plans);
    sim.register_inbox(cfg_.id, [this](Simulation& s, const TrafficEvent& ev) { on_response(s, ev); });
    sim.register_ssh(cfg_.id, [this](Simulation& s, const TrafficEvent& ev) { return on_ssh(s, ev); });
    sim.schedule(sim.now() + kGreenIqPingPeriod, [this](Simulation& s) { ping_tick(s); });
    sessions_.start(sim, session_rng_, cfg_.gaps);
  }

  // One step of the minute cadence: ping_to_cloud carrying the user id.
  void ping_tick(Simulation& sim) {
    TrafficEvent ping;
    ping.src = cfg_.id;
    ping.dst_host = kGreenIqHost;
    ping.method = Method::Post;
    ping.path = kGreenIqPingPath;
    ping.payload = Document{{"user", cfg_.id}};
    sim.send_request(std::move(ping));
    sim.schedule(sim.now() + kGreenIqPingPeriod, [this](Simulation& s) { ping_tick(s); });
  }

  void factory_reset(Simulation& sim) {
    current_config_ = 0;
    pending_config_ = 0;
    ctl_.set_plans(sim, {});
  }

  // Direct valve write; models the weak-password SSH path. Bad bitstrings
  // are rejected without touching state.
  void exec_valves(Simulation& sim, const std::string& bits) { ctl_.force_valves(sim, bits); }

  // Attack-experiment support: capture and restore the spoofable state.
  struct Snapshot {
    Timestamp current_config = 0;
    std::vector<WateringPlan> plans;
  };
  Snapshot snapshot() const { return {current_config_, ctl_.plans()}; }
  void restore(Simulation& sim, Snapshot snap) {
    current_config_ = snap.current_config;
    pending_config_ = snap.current_config;
    ctl_.set_plans(sim, std::move(snap.plans));
  }

 private:
  void on_response(Simulation& sim, const TrafficEvent& ev) {
    if (ev.path == kGreenIqPingPath) {
      if (!ev.payload.is_object() || !ev.payload.contains("timestamp") ||
          !ev.payload.at("timestamp").is_number_integer()) {
        sim.log(cfg_.id + ": malformed ping response ignored");
        return;
      }
      const Timestamp new_config = ev.payload.at("timestamp").get<Timestamp>();
      if (new_config > current_config_) {
        pending_config_ = new_config;
        TrafficEvent fetch;
        fetch.src = cfg_.id;
        fetch.dst_host = kGreenIqHost;
        fetch.method = Method::Get;
        fetch.path = kGreenIqConfigPath;
        fetch.payload = Document{{"user", cfg_.id}};
        sim.send_request(std::move(fetch));
      }
      return;
    }
    if (ev.path == kGreenIqConfigPath) {
      std::vector<WateringPlan> plans;
      try {
        plans = parse_greeniq_config(ev.payload, kValveCount);
      } catch (const std::exception& e) {
        sim.log(cfg_.id + ": malformed config ignored: " + e.what());
        return;
      }
      ctl_.set_plans(sim, std::move(plans));
      current_config_ = pending_config_;
      accepted_configs_.push_back({sim.now(), current_config_});
      return;
    }
  }

  Document on_ssh(Simulation& sim, const TrafficEvent& ev) {
    if (!cfg_.ssh_enabled) return Document{{"error", "connection refused"}};
    try {
      exec_valves(sim, ev.payload.at("valves").get<std::string>());
    } catch (const std::exception& e) {
      return Document{{"error", e.what()}};
    }
    return Document{{"ok", true}, {"valves", ctl_.valves()}};
  }

  GreenIqConfig cfg_;
  RandomStream session_rng_;
  WateringController ctl_;
  SessionEmitter sessions_;
  Timestamp current_config_ = 0;
  Timestamp pending_config_ = 0;
  std::vector<AcceptedConfig> accepted_configs_;
};

// --- RainMachine ----------------------------------------------------------

struct RainMachineConfig {
  HostId id;
  double lat = 0.0;
  double lon = 0.0;
  int zone_count = 8;
  MilliCubicMetersPerHour zone_flow = kSprinklerFlowMilli;
  WateringPlan base_plan;
  NeedModel need;
  SessionGapProfile gaps = default_gap_profile(IrrigationKind::RainMachine);
};

// RainMachine: a user-configured base plan scaled per day by the forecast.
// The device never checks that a forecast response matches the coordinates
// it asked for, which is what the location-spoof attack exploits.
class RainMachineDevice {
 public:
  explicit RainMachineDevice(Simulation& sim, RainMachineConfig cfg)
      : cfg_(std::move(cfg)),
        session_rng_(sim.stream(cfg_.id + "/sessions")),
        ctl_(cfg_.id, cfg_.zone_count, cfg_.zone_flow),
        sessions_(cfg_.id, [](RandomStream&) { return std::string(kRainMachineHost); },
                  kRainMachineSyncPath) {}

  const HostId& id() const { return cfg_.id; }
  IrrigationKind kind() const { return IrrigationKind::RainMachine; }
  const WeatherForecast& forecast_cache() const { return cache_; }
  bool has_forecast() const { return has_cache_; }
  const std::map<std::int64_t, int>& permille_by_day() const { return permille_; }
  WateringController& controller() { return ctl_; }
  std::pair<double, double> location() const { return {cfg_.lat, cfg_.lon}; }

  int permille_for_day(std::int64_t day) const {
    auto it = permille_.find(day);
    return it == permille_.end() ? kDefaultPermille : it->second;
  }

  void install(Simulation& sim) {
    ctl_.set_permille_fn([this](std::int64_t day) { return permille_for_day(day); });
    ctl_.set_plans(sim, {cfg_.base_plan});
    sim.register_inbox(cfg_.id, [this](Simulation& s, const TrafficEvent& ev) { on_response(s, ev); });
    sim.schedule(sim.now() + kWeatherBootDelay, [this](Simulation& s) { poll_tick(s); });
    sessions_.start(sim, session_rng_, cfg_.gaps);
  }

  // Six-hour weather cadence; the query carries the configured coordinates.
  void poll_tick(Simulation& sim) {
    TrafficEvent req;
    req.src = cfg_.id;
    req.dst_host = kWeatherHost;
    req.method = Method::Get;
    req.path = kWeatherPath;
    req.payload = Document{{"lat", cfg_.lat}, {"lon", cfg_.lon}};
    sim.send_request(std::move(req));
    sim.schedule(sim.now() + kWeatherPollPeriod, [this](Simulation& s) { poll_tick(s); });
  }

  // Attack-experiment support: capture and restore the adapted state.
  struct Snapshot {
    WeatherForecast cache;
    bool has_cache = false;
    std::map<std::int64_t, int> permille;
  };
  Snapshot snapshot() const { return {cache_, has_cache_, permille_}; }
  void restore(Simulation& sim, Snapshot snap) {
    cache_ = std::move(snap.cache);
    has_cache_ = snap.has_cache;
    permille_ = std::move(snap.permille);
    ctl_.reschedule(sim);
  }

 private:
  static constexpr int kDefaultPermille = 1000;  // base plan, until a forecast arrives

  void on_response(Simulation& sim, const TrafficEvent& ev) {
    if (ev.dst_host != kWeatherHost || ev.path != kWeatherPath) return;
    WeatherForecast f;
    try {
      f = forecast_from_document(ev.payload);
    } catch (const std::exception& e) {
      sim.log(cfg_.id + ": unusable forecast ignored: " + e.what());
      return;  // cache retained
    }
    cache_ = std::move(f);
    has_cache_ = true;
    permille_ = watering_permille(cache_, cfg_.need);
    ctl_.reschedule(sim);
  }

  RainMachineConfig cfg_;
  RandomStream session_rng_;
  WateringController ctl_;
  SessionEmitter sessions_;
  WeatherForecast cache_;
  bool has_cache_ = false;
  std::map<std::int64_t, int> permille_;
};

// --- BlueSpray ------------------------------------------------------------

struct BlueSprayConfig {
  HostId id;
  int zone_count = 8;
  MilliCubicMetersPerHour zone_flow = kSprinklerFlowMilli;
  std::vector<WateringPlan> initial_plans;
  SessionGapProfile gaps = default_gap_profile(IrrigationKind::BlueSpray);
};

// BlueSpray: a local HTTP C&C endpoint that accepts scheduling requests from
// any LAN host. auth_required is always false; that is the vulnerability.
class BlueSprayDevice {
 public:
  explicit BlueSprayDevice(Simulation& sim, BlueSprayConfig cfg)
      : cfg_(std::move(cfg)),
        session_rng_(sim.stream(cfg_.id + "/sessions")),
        ctl_(cfg_.id, cfg_.zone_count, cfg_.zone_flow),
        sessions_(cfg_.id,
                  [](RandomStream& rng) {
                    return std::string(rng.chance(0.5) ? kBlueSprayCloudHost : kBlueSprayWwwHost);
                  },
                  kBlueSpraySyncPath) {}

  const HostId& id() const { return cfg_.id; }
  IrrigationKind kind() const { return IrrigationKind::BlueSpray; }
  bool auth_required() const { return false; }
  const std::vector<WateringPlan>& plans() const { return plans_; }
  WateringController& controller() { return ctl_; }

  void install(Simulation& sim) {
    plans_ = cfg_.initial_plans;
    ctl_.set_plans(sim, plans_);
    sim.register_inbox(cfg_.id, [](Simulation&, const TrafficEvent&) {});
    sim.register_local_http(cfg_.id, [this](Simulation& s, const TrafficEvent& ev) {
      return handle_local(s, ev);
    });
    sessions_.start(sim, session_rng_, cfg_.gaps);
  }

  // Schedule endpoint: no credentials checked. Malformed payloads get an
  // error response and leave state untouched; replaying an identical request
  // is idempotent.
  Document handle_local(Simulation& sim, const TrafficEvent& ev) {
    if (ev.method != Method::LocalHttp || ev.path != kBlueSpraySchedulePath)
      return Document{{"error", "not found"}};
    std::vector<WateringPlan> incoming;
    try {
      incoming = parse_bluespray_schedule(ev.payload, cfg_.zone_count);
    } catch (const std::exception& e) {
      return Document{{"error", e.what()}};
    }
    for (auto& p : incoming) {
      if (std::find(plans_.begin(), plans_.end(), p) == plans_.end()) plans_.push_back(std::move(p));
    }
    ctl_.set_plans(sim, plans_);
    return Document{{"ok", true}, {"plans", plans_.size()}};
  }

  struct Snapshot {
    std::vector<WateringPlan> plans;
  };
  Snapshot snapshot() const { return {plans_}; }
  void restore(Simulation& sim, Snapshot snap) {
    plans_ = std::move(snap.plans);
    ctl_.set_plans(sim, plans_);
  }

 private:
  BlueSprayConfig cfg_;
  RandomStream session_rng_;
  WateringController ctl_;
  SessionEmitter sessions_;
  std::vector<WateringPlan> plans_;
};

// --- background IoT / non-IoT hosts ----------------------------------------

// Detection negatives. Destination pools must stay disjoint from every
// irrigation cloud host; that disjointness is Algorithm-style hostname
// matching's soundness precondition and is validated here and at load time.
struct BackgroundProfile {
  std::string device_class;  // bulb, refrigerator, camera, laptop, smartphone, smartwatch
  std::vector<std::string> destinations;
  int sessions_per_hour_min = 4;
  int sessions_per_hour_max = 10;
  double unique_destinations_mean = 3.0;
};

class BackgroundDevice {
 public:
  BackgroundDevice(Simulation& sim, HostId id, BackgroundProfile profile)
      : id_(std::move(id)), profile_(std::move(profile)), rng_(sim.stream(id_ + "/background")) {}

  const HostId& id() const { return id_; }
  const BackgroundProfile& profile() const { return profile_; }

  void install(Simulation& sim) {
    for (IrrigationKind k : kAllIrrigationKinds)
      for (const auto& cloud : cloud_hosts(k))
        if (std::find(profile_.destinations.begin(), profile_.destinations.end(), cloud) !=
            profile_.destinations.end())
          throw ConfigError(id_ + ": background pool contains irrigation cloud host " + cloud);
    sim.register_inbox(id_, [](Simulation&, const TrafficEvent&) {});
    sim.schedule(sim.now(), [this](Simulation& s) { hour_tick(s); });
  }

  void hour_tick(Simulation& sim) {
    if (!profile_.destinations.empty()) {
      const int pool = static_cast<int>(profile_.destinations.size());
      int uniques = static_cast<int>(profile_.unique_destinations_mean);
      const double frac = profile_.unique_destinations_mean - uniques;
      if (rng_.chance(frac)) ++uniques;
      uniques = std::clamp(uniques, profile_.unique_destinations_mean > 0 ? 1 : 0, pool);
      if (uniques > 0) {
        int sessions = static_cast<int>(
            rng_.uniform(profile_.sessions_per_hour_min, profile_.sessions_per_hour_max));
        sessions = std::max(sessions, uniques);

        // choose `uniques` distinct destinations by partial shuffle
        std::vector<int> idx(static_cast<std::size_t>(pool));
        for (int i = 0; i < pool; ++i) idx[static_cast<std::size_t>(i)] = i;
        for (int i = 0; i < uniques; ++i) {
          const auto j = static_cast<std::size_t>(rng_.uniform(i, pool - 1));
          std::swap(idx[static_cast<std::size_t>(i)], idx[j]);
        }

        std::vector<Seconds> offsets;
        offsets.reserve(static_cast<std::size_t>(sessions));
        for (int i = 0; i < sessions; ++i) offsets.push_back(rng_.uniform(0, 3599));
        std::sort(offsets.begin(), offsets.end());

        for (int i = 0; i < sessions; ++i) {
          const int pick = i < uniques ? i : static_cast<int>(rng_.uniform(0, uniques - 1));
          const std::string& dst =
              profile_.destinations[static_cast<std::size_t>(idx[static_cast<std::size_t>(pick)])];
          sim.schedule(sim.now() + offsets[static_cast<std::size_t>(i)],
                       [this, dst](Simulation& s) { emit_session(s, dst); });
        }
      }
    }
    const Timestamp next = sim.now() + kSecondsPerHour;
    if (next < sim.horizon()) sim.schedule(next, [this](Simulation& s) { hour_tick(s); });
  }

 private:
  void emit_session(Simulation& sim, const std::string& dst) {
    TrafficEvent connect;
    connect.src = id_;
    connect.dst_host = dst;
    connect.method = Method::TcpConnect;
    sim.send_request(std::move(connect));
    TrafficEvent get;
    get.src = id_;
    get.dst_host = dst;
    get.method = Method::Get;
    get.path = "/";
    sim.send_request(std::move(get));
  }

  HostId id_;
  BackgroundProfile profile_;
  RandomStream rng_;
};

// Default background mix fixture. Pools are disjoint from the irrigation
// clouds; unique-destination means follow the qualitative ordering
// smartphone > refrigerator > camera > bulb.
inline BackgroundProfile default_background_profile(const std::string& device_class) {
  auto make = [&](std::vector<std::string> pool, int smin, int smax, double umean) {
    return BackgroundProfile{device_class, std::move(pool), smin, smax, umean};
  };
  if (device_class == "bulb")
    return make({"api.lights.example", "fw.lights.example", "time.pool.example"}, 6, 10, 2.0);
  if (device_class == "refrigerator")
    return make({"telemetry.fridge.example", "recipes.fridge.example", "fw.fridge.example",
                 "cdn.fridge.example", "time.pool.example", "store.fridge.example",
                 "ads.fridge.example"},
                6, 11, 6.0);
  if (device_class == "camera")
    return make({"relay.cam.example", "stream.cam.example", "fw.cam.example",
                 "stun.cam.example", "time.pool.example"},
                6, 11, 4.0);
  if (device_class == "laptop")
    return make({"www.search.example", "mail.example", "cdn.media.example", "news.example",
                 "social.example", "updates.os.example", "video.example", "docs.example",
                 "chat.example", "wiki.example", "shop.example", "maps.example"},
                8, 14, 9.0);
  if (device_class == "smartphone")
    return make({"push.mobile.example", "www.search.example", "social.example",
                 "video.example", "chat.example", "maps.example", "appstore.example",
                 "cdn.media.example", "mail.example", "news.example", "shop.example",
                 "photos.example", "music.example", "weather.app.example"},
                10, 16, 10.0);
  if (device_class == "smartwatch")
    return make({"sync.watch.example", "health.watch.example", "time.pool.example",
                 "fw.watch.example"},
                6, 10, 2.5);
  throw ConfigError("unknown background device class: " + device_class);
}

}  // namespace aquanet
