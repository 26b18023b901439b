#pragma once

#include <map>
#include <string>
#include <vector>

#include "aquanet/sim.hpp"
#include "aquanet/watering.hpp"
#include "aquanet/weather.hpp"

namespace aquanet {

inline constexpr const char* kGreenIqHost = "www.greeniq.net";
inline constexpr const char* kGreenIqPingPath = "/php/ping_to_cloud.php";
inline constexpr const char* kGreenIqConfigPath = "/php/api/v2/hub/configxml.php";

inline constexpr const char* kRainMachineHost = "proxy1.rainmachine.com";
inline constexpr const char* kRainMachineSyncPath = "/api/sync";

inline constexpr const char* kBlueSprayCloudHost = "cloud.bluespray.net";
inline constexpr const char* kBlueSprayWwwHost = "www.bluespray.net";
inline constexpr const char* kBlueSpraySyncPath = "/api/sync";

inline constexpr const char* kWeatherHost = "api.met.no";
inline constexpr const char* kWeatherPath = "/weatherapi/locationforecast/2.0/classic";

inline constexpr const char* kBlueSpraySchedulePath = "/api/schedule";

// GreenIQ cloud: stores each hub's user configuration and serves the
// ping/configxml pair. The ping response carries only the timestamp of the
// last user update; the configxml response carries the full plan document.
class GreenIqCloud {
 public:
  void set_user_config(const HostId& device, Timestamp config_time,
                       std::vector<WateringPlan> plans) {
    store_[device] = {config_time, std::move(plans)};
  }

  Timestamp config_time(const HostId& device) const {
    auto it = store_.find(device);
    return it == store_.end() ? 0 : it->second.config_time;
  }

  std::uint64_t pings_seen() const { return pings_seen_; }
  std::uint64_t config_fetches_seen() const { return config_fetches_; }

  void install(Simulation& sim) {
    sim.register_service(kGreenIqHost, [this](Simulation& s, const TrafficEvent& req) {
      return handle(s, req);
    });
  }

 private:
  struct Entry {
    Timestamp config_time = 0;
    std::vector<WateringPlan> plans;
  };

  std::optional<Document> handle(Simulation& sim, const TrafficEvent& req) {
    if (req.method == Method::TcpConnect) return std::nullopt;
    const Entry& e = store_[req.src];
    if (req.method == Method::Post && req.path == kGreenIqPingPath) {
      ++pings_seen_;
      return Document{{"timestamp", e.config_time}};
    }
    if (req.method == Method::Get && req.path == kGreenIqConfigPath) {
      ++config_fetches_;
      return greeniq_config_document(e.config_time, e.plans);
    }
    sim.log("greeniq-cloud: unhandled " + req.path);
    return Document{{"error", "not found"}};
  }

  std::map<HostId, Entry> store_;
  std::uint64_t pings_seen_ = 0;
  std::uint64_t config_fetches_ = 0;
};

// RainMachine and BlueSpray clouds only need to exist as session peers; sync
// exchanges succeed with an empty status document.
inline void install_sync_cloud(Simulation& sim, const std::string& hostname) {
  sim.register_service(hostname, [](Simulation&, const TrafficEvent& req)
                                     -> std::optional<Document> {
    if (req.method == Method::TcpConnect) return std::nullopt;
    return Document{{"ok", true}};
  });
}

// Forecast service: answers for whatever coordinates the request carries,
// using the nearest configured climate profile.
class WeatherService {
 public:
  explicit WeatherService(std::vector<WeatherProfile> profiles, int horizon_days = 7)
      : profiles_(std::move(profiles)), horizon_days_(horizon_days) {}

  const WeatherProfile& nearest(double lat, double lon) const {
    if (profiles_.empty()) throw ConfigError("weather service has no profiles");
    const WeatherProfile* best = &profiles_.front();
    double best_d = 1e300;
    for (const auto& p : profiles_) {
      const double d = (p.lat - lat) * (p.lat - lat) + (p.lon - lon) * (p.lon - lon);
      if (d < best_d) {
        best_d = d;
        best = &p;
      }
    }
    return *best;
  }

  void install(Simulation& sim) {
    sim.register_service(kWeatherHost, [this](Simulation& s, const TrafficEvent& req)
                                           -> std::optional<Document> {
      if (req.method == Method::TcpConnect) return std::nullopt;
      if (req.path != kWeatherPath || !req.payload.contains("lat") ||
          !req.payload.contains("lon")) {
        s.log("weather: malformed request from " + req.src);
        return Document{{"error", "bad request"}};
      }
      const double lat = req.payload.at("lat").get<double>();
      const double lon = req.payload.at("lon").get<double>();
      const WeatherProfile& p = nearest(lat, lon);
      const Timestamp day_start = (s.now() / kSecondsPerDay) * kSecondsPerDay;
      WeatherForecast f = synthesize_forecast(p, day_start, horizon_days_);
      // the response echoes the REQUESTED coordinates' nearest profile
      // location, exactly what a real service keyed on coordinates returns
      return forecast_to_document(f);
    });
  }

 private:
  std::vector<WeatherProfile> profiles_;
  int horizon_days_;
};

}  // namespace aquanet
