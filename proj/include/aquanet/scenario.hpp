#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "aquanet/botnet.hpp"
#include "aquanet/damage.hpp"
#include "aquanet/devices.hpp"
#include "aquanet/weather.hpp"

namespace aquanet {

struct DeviceSpec {
  IrrigationKind kind = IrrigationKind::GreenIq;
  int zone_count = 8;
  MilliCubicMetersPerHour zone_flow = kSprinklerFlowMilli;
  bool ssh_enabled = true;
  double lat = 0.0;
  double lon = 0.0;
  std::vector<WateringPlan> plans;  // initial plans; RainMachine uses the first as base plan
  SessionGapProfile gaps;
  bool gaps_overridden = false;
};

struct ScenarioHost {
  HostId id;
  std::optional<DeviceSpec> device;
  std::optional<BackgroundProfile> background;
};

struct ScenarioLan {
  std::string id;
  std::string region;
  Seconds latency = 0;
  std::vector<ScenarioHost> hosts;
};

struct InfectedHost {
  HostId host;
  Timestamp time = 0;
};

struct UserUpdate {
  HostId host;
  Timestamp time = 0;
  std::vector<WateringPlan> plans;
};

struct FactoryReset {
  HostId host;
  Timestamp time = 0;
};

struct Scenario {
  std::uint64_t seed = 0;
  Timestamp horizon = 0;
  Seconds consumption_period = kSecondsPerHour;
  Seconds recon_period = 900;
  std::vector<Seconds> detection_periods;
  std::int64_t detection_trials = 200;
  double anomaly_threshold = 0.5;
  double tariff_per_m3 = 8.0;
  MilliCubicMetersPerHour w_milli = kSprinklerFlowMilli;
  std::optional<double> assess_hours;
  NeedModel need;
  std::string cnc_host = kDefaultCncHost;
  std::vector<WeatherProfile> weather_profiles;
  std::vector<ScenarioLan> lans;
  std::vector<InfectedHost> infected;
  std::vector<BotCommand> commands;
  std::vector<UserUpdate> user_updates;
  std::vector<FactoryReset> factory_resets;
  AttackPolicy policy = AttackPolicy::defaults();
  std::optional<PipelineTopology> topology;
  std::string source_digest;  // digest of the scenario file bytes

  const ScenarioHost* find_host(const HostId& id) const {
    for (const auto& lan : lans)
      for (const auto& h : lan.hosts)
        if (h.id == id) return &h;
    return nullptr;
  }
};

namespace scenario_detail {

// Accumulates validation failures so a bad file reports every problem with
// its location in one pass.
struct ErrorSink {
  std::vector<std::string> errors;
  void add(const std::string& where, const std::string& what) {
    errors.push_back(where + ": " + what);
  }
  void raise_if_any(const std::string& name) {
    if (errors.empty()) return;
    std::string msg = "invalid scenario " + name + ":";
    for (const auto& e : errors) msg += "\n  " + e;
    throw ConfigError(msg);
  }
};

inline std::string expand_index(std::string pattern, std::int64_t i) {
  const std::string token = "{i}";
  for (std::size_t pos = pattern.find(token); pos != std::string::npos;
       pos = pattern.find(token, pos))
    pattern.replace(pos, token.size(), std::to_string(i));
  return pattern;
}

inline WateringPlan parse_plan(const Document& d) {
  WateringPlan p;
  p.zones = d.at("zones").get<std::vector<int>>();
  p.start = d.at("start_s").get<Timestamp>();
  p.end = d.at("end_s").get<Timestamp>();
  for (const auto& e : d.at("daily"))
    p.daily.push_back({e.at("offset_s").get<Seconds>(), e.at("duration_s").get<Seconds>()});
  return p;
}

inline IrrigationKind parse_kind(const std::string& s) {
  if (s == "greeniq") return IrrigationKind::GreenIq;
  if (s == "rainmachine") return IrrigationKind::RainMachine;
  if (s == "bluespray") return IrrigationKind::BlueSpray;
  throw ConfigError("unknown device kind: " + s);
}

inline AttackKind parse_attack_kind(const std::string& s) {
  if (s == "spoof_config") return AttackKind::SpoofConfig;
  if (s == "permanent_dos") return AttackKind::PermanentDoS;
  if (s == "weather_value_spoof") return AttackKind::WeatherValueSpoof;
  if (s == "weather_location_spoof") return AttackKind::WeatherLocationSpoof;
  if (s == "schedule_replay") return AttackKind::ScheduleReplay;
  if (s == "valve_toggle") return AttackKind::ValveToggle;
  throw ConfigError("unknown attack kind: " + s);
}

inline DeviceSpec parse_device(const Document& d) {
  DeviceSpec spec;
  spec.kind = parse_kind(d.at("kind").get<std::string>());
  spec.zone_count = d.value("zone_count", 8);
  if (spec.kind == IrrigationKind::GreenIq && spec.zone_count != 8)
    throw ConfigError("greeniq zone_count is fixed at 8");
  if (spec.zone_count < 4 || spec.zone_count > 24)
    throw ConfigError("zone_count must be in 4..24");
  if (d.contains("zone_flow_m3_per_h")) spec.zone_flow = milli_from_json(d.at("zone_flow_m3_per_h"));
  if (spec.zone_flow <= 0) throw ConfigError("zone_flow_m3_per_h must be positive");
  spec.ssh_enabled = d.value("ssh_enabled", true);
  spec.lat = d.value("lat", 0.0);
  spec.lon = d.value("lon", 0.0);
  if (d.contains("plans"))
    for (const auto& pd : d.at("plans")) {
      WateringPlan p = parse_plan(pd);
      validate_plan(p, spec.zone_count);
      spec.plans.push_back(std::move(p));
    }
  spec.gaps = default_gap_profile(spec.kind);
  if (d.contains("session_gap_s")) {
    const Document& g = d.at("session_gap_s");
    spec.gaps.gap_min = g.at("min").get<Seconds>();
    spec.gaps.gap_max = g.at("max").get<Seconds>();
    spec.gaps.long_p = g.value("long_p", 0.0);
    spec.gaps.long_min = g.value("long_min", spec.gaps.gap_max);
    spec.gaps.long_max = g.value("long_max", spec.gaps.gap_max);
    spec.gaps_overridden = true;
    if (spec.gaps.gap_min <= 0 || spec.gaps.gap_min > spec.gaps.gap_max)
      throw ConfigError("session_gap_s range is invalid");
  }
  if (spec.kind == IrrigationKind::RainMachine && spec.plans.empty())
    throw ConfigError("rainmachine device needs a base plan in plans[0]");
  return spec;
}

inline BackgroundProfile parse_background(const Document& d) {
  BackgroundProfile p = default_background_profile(d.at("class").get<std::string>());
  if (d.contains("destinations")) p.destinations = d.at("destinations").get<std::vector<std::string>>();
  if (d.contains("sessions_per_hour")) {
    p.sessions_per_hour_min = d.at("sessions_per_hour").at("min").get<int>();
    p.sessions_per_hour_max = d.at("sessions_per_hour").at("max").get<int>();
  }
  if (d.contains("unique_destinations_mean"))
    p.unique_destinations_mean = d.at("unique_destinations_mean").get<double>();
  if (p.sessions_per_hour_min < 0 || p.sessions_per_hour_min > p.sessions_per_hour_max)
    throw ConfigError("sessions_per_hour range is invalid");
  if (p.unique_destinations_mean < 0 ||
      p.unique_destinations_mean > static_cast<double>(p.destinations.size()))
    throw ConfigError("unique_destinations_mean exceeds destination pool");
  return p;
}

inline AttackDirective parse_attack_override(const Document& d) {
  AttackDirective a;
  a.kind = parse_attack_kind(d.at("kind").get<std::string>());
  if (d.contains("band_min_c")) a.band_min_milli_c = milli_from_json(d.at("band_min_c"));
  if (d.contains("band_max_c")) a.band_max_milli_c = milli_from_json(d.at("band_max_c"));
  if (d.contains("rain_mm")) a.rain_milli_mm = milli_from_json(d.at("rain_mm"));
  a.fake_lat = d.value("fake_lat", 0.0);
  a.fake_lon = d.value("fake_lon", 0.0);
  a.toggle_period = d.value("toggle_period_s", Seconds{10});
  if (d.contains("dos_end_s")) a.dos_end = d.at("dos_end_s").get<Timestamp>();
  if (d.contains("plan")) a.plan = parse_plan(d.at("plan"));
  if (a.toggle_period <= 0) throw ConfigError("toggle_period_s must be positive");
  if (a.band_min_milli_c > a.band_max_milli_c) throw ConfigError("band_min_c exceeds band_max_c");
  return a;
}

inline PipelineTopology parse_topology(const Document& d, ErrorSink& sink) {
  PipelineTopology topo;
  if (d.contains("reservoirs"))
    for (const auto& r : d.at("reservoirs"))
      topo.reservoirs.push_back({r.at("id").get<std::string>(), r.value("capacity_m3", 0.0)});
  if (d.contains("junctions"))
    for (const auto& j : d.at("junctions")) topo.junctions.push_back(j.get<std::string>());
  if (d.contains("consumers")) {
    std::size_t ci = 0;
    for (const auto& c : d.at("consumers")) {
      const std::int64_t replicate = c.value("replicate", std::int64_t{1});
      if (replicate < 1) sink.add("topology.consumers[" + std::to_string(ci) + "]", "replicate must be >= 1");
      for (std::int64_t i = 1; i <= replicate; ++i) {
        Consumer consumer;
        consumer.id = expand_index(c.at("id").get<std::string>(), i);
        consumer.has_irrigation = c.value("has_irrigation", false);
        if (c.contains("device")) consumer.device = expand_index(c.at("device").get<std::string>(), i);
        topo.consumers.push_back(std::move(consumer));
      }
      ++ci;
    }
  }
  if (d.contains("pipes")) {
    for (const auto& p : d.at("pipes")) {
      const std::int64_t replicate = p.value("replicate", std::int64_t{1});
      for (std::int64_t i = 1; i <= replicate; ++i) {
        Pipe pipe;
        pipe.from = expand_index(p.at("from").get<std::string>(), i);
        pipe.to = expand_index(p.at("to").get<std::string>(), i);
        pipe.capacity_milli = milli_from_json(p.at("capacity_m3_per_h"));
        topo.pipes.push_back(std::move(pipe));
      }
    }
  }
  return topo;
}

}  // namespace scenario_detail

inline Scenario parse_scenario(const std::string& text, const std::string& name) {
  using namespace scenario_detail;
  Document doc;
  try {
    doc = Document::parse(text);
  } catch (const std::exception& e) {
    throw ConfigError("cannot parse scenario " + name + ": " + e.what());
  }

  ErrorSink sink;
  Scenario sc;
  sc.source_digest = payload_digest(Document(text));

  try {
    sc.seed = doc.at("seed").get<std::uint64_t>();
    sc.horizon = doc.at("horizon_s").get<Timestamp>();
    if (sc.horizon <= 0) sink.add("horizon_s", "must be positive");
    sc.consumption_period = doc.value("consumption_period_s", kSecondsPerHour);
    if (sc.consumption_period <= 0) sink.add("consumption_period_s", "must be positive");
    sc.recon_period = doc.value("recon_period_s", Seconds{900});
    sc.detection_trials = doc.value("detection_trials", std::int64_t{200});
    sc.anomaly_threshold = doc.value("anomaly_threshold", 0.5);
    sc.tariff_per_m3 = doc.value("tariff_per_m3", 8.0);
    if (doc.contains("w_m3_per_h")) sc.w_milli = milli_from_json(doc.at("w_m3_per_h"));
    if (doc.contains("assess_hours")) sc.assess_hours = doc.at("assess_hours").get<double>();
    sc.cnc_host = doc.value("cnc_host", std::string(kDefaultCncHost));
    if (doc.contains("detection_periods_s"))
      sc.detection_periods = doc.at("detection_periods_s").get<std::vector<Seconds>>();
    for (Seconds p : sc.detection_periods)
      if (p < 0 || p > sc.horizon) sink.add("detection_periods_s", "period outside [0, horizon]");
    if (doc.contains("need_model")) {
      const Document& nm = doc.at("need_model");
      sc.need.k_permille = nm.value("k_permille", std::int64_t{400});
      if (nm.contains("t_ref_c")) sc.need.t_ref_milli_c = milli_from_json(nm.at("t_ref_c"));
      if (nm.contains("base_need_mm")) sc.need.base_need_milli_mm = milli_from_json(nm.at("base_need_mm"));
      if (sc.need.base_need_milli_mm <= 0) sink.add("need_model.base_need_mm", "must be positive");
    }
  } catch (const std::exception& e) {
    sink.add("header", e.what());
  }

  if (doc.contains("weather_profiles")) {
    std::size_t wi = 0;
    for (const auto& w : doc.at("weather_profiles")) {
      try {
        WeatherProfile p;
        p.name = w.at("name").get<std::string>();
        p.lat = w.at("lat").get<double>();
        p.lon = w.at("lon").get<double>();
        p.temp_min_milli_c = milli_from_json(w.at("temp_min_c"));
        p.temp_max_milli_c = milli_from_json(w.at("temp_max_c"));
        p.rain_milli_mm_per_day = milli_from_json(w.value("rain_mm_per_day", Document(0.0)));
        if (p.temp_min_milli_c > p.temp_max_milli_c) throw ConfigError("temp_min_c exceeds temp_max_c");
        sc.weather_profiles.push_back(std::move(p));
      } catch (const std::exception& e) {
        sink.add("weather_profiles[" + std::to_string(wi) + "]", e.what());
      }
      ++wi;
    }
  }

  std::set<HostId> host_ids;
  bool any_rainmachine = false;
  if (doc.contains("lans")) {
    std::size_t li = 0;
    for (const auto& ld : doc.at("lans")) {
      ScenarioLan lan;
      const std::string lan_path = "lans[" + std::to_string(li) + "]";
      try {
        lan.id = ld.at("id").get<std::string>();
        lan.region = ld.value("region", std::string{});
        lan.latency = ld.value("latency_s", Seconds{0});
      } catch (const std::exception& e) {
        sink.add(lan_path, e.what());
      }
      if (ld.contains("hosts")) {
        std::size_t hi = 0;
        for (const auto& hd : ld.at("hosts")) {
          const std::string host_path = lan_path + ".hosts[" + std::to_string(hi) + "]";
          const std::int64_t replicate = hd.value("replicate", std::int64_t{1});
          if (replicate < 1) sink.add(host_path, "replicate must be >= 1");
          for (std::int64_t i = 1; i <= replicate; ++i) {
            try {
              ScenarioHost host;
              host.id = expand_index(hd.at("id").get<std::string>(), i);
              if (host.id.empty()) throw ConfigError("host id is empty");
              if (!host_ids.insert(host.id).second)
                throw ConfigError("duplicate host id: " + host.id);
              const bool has_device = hd.contains("device");
              const bool has_background = hd.contains("background");
              if (has_device == has_background)
                throw ConfigError("host needs exactly one of device/background");
              if (has_device) {
                host.device = parse_device(hd.at("device"));
                any_rainmachine |= host.device->kind == IrrigationKind::RainMachine;
              } else {
                host.background = parse_background(hd.at("background"));
              }
              lan.hosts.push_back(std::move(host));
            } catch (const std::exception& e) {
              sink.add(host_path, e.what());
            }
          }
          ++hi;
        }
      }
      sc.lans.push_back(std::move(lan));
      ++li;
    }
  }

  if (doc.contains("infected_hosts")) {
    std::size_t ii = 0;
    for (const auto& inf : doc.at("infected_hosts")) {
      try {
        InfectedHost h;
        if (inf.is_string()) {
          h.host = inf.get<std::string>();
        } else {
          h.host = inf.at("host").get<std::string>();
          h.time = inf.value("time_s", Timestamp{0});
        }
        if (!host_ids.count(h.host))
          throw ConfigError("infected host does not exist: " + h.host);
        sc.infected.push_back(std::move(h));
      } catch (const std::exception& e) {
        sink.add("infected_hosts[" + std::to_string(ii) + "]", e.what());
      }
      ++ii;
    }
  }

  if (doc.contains("commands")) {
    std::size_t ci = 0;
    for (const auto& cd : doc.at("commands")) {
      try {
        BotCommand cmd;
        const std::string op = cd.at("op").get<std::string>();
        if (op == "START")
          cmd.op = BotCommand::Op::Start;
        else if (op == "STOP")
          cmd.op = BotCommand::Op::Stop;
        else
          throw ConfigError("op must be START or STOP");
        cmd.start_time = cd.at("start_time_s").get<Timestamp>();
        cmd.duration = cd.value("duration_s", Seconds{0});
        if (cd.contains("region")) cmd.region = cd.at("region").get<std::string>();
        cmd.validate();
        sc.commands.push_back(std::move(cmd));
      } catch (const std::exception& e) {
        sink.add("commands[" + std::to_string(ci) + "]", e.what());
      }
      ++ci;
    }
  }

  auto parse_host_time_list = [&](const char* key, auto&& push) {
    if (!doc.contains(key)) return;
    std::size_t i = 0;
    for (const auto& d : doc.at(key)) {
      try {
        const HostId host = d.at("host").get<std::string>();
        if (!host_ids.count(host)) throw ConfigError("unknown host: " + host);
        const ScenarioHost* sh = sc.find_host(host);
        if (!sh || !sh->device || sh->device->kind != IrrigationKind::GreenIq)
          throw ConfigError(std::string(key) + " target must be a greeniq device: " + host);
        push(d, host);
      } catch (const std::exception& e) {
        sink.add(std::string(key) + "[" + std::to_string(i) + "]", e.what());
      }
      ++i;
    }
  };
  parse_host_time_list("user_updates", [&](const Document& d, const HostId& host) {
    UserUpdate u;
    u.host = host;
    u.time = d.at("time_s").get<Timestamp>();
    for (const auto& pd : d.at("plans")) {
      WateringPlan p = scenario_detail::parse_plan(pd);
      validate_plan(p, GreenIqDevice::kValveCount);
      u.plans.push_back(std::move(p));
    }
    sc.user_updates.push_back(std::move(u));
  });
  parse_host_time_list("factory_resets", [&](const Document& d, const HostId& host) {
    sc.factory_resets.push_back({host, d.at("time_s").get<Timestamp>()});
  });

  if (doc.contains("attacks")) {
    for (const auto& [key, value] : doc.at("attacks").items()) {
      try {
        sc.policy.by_kind[parse_kind(key)] = parse_attack_override(value);
      } catch (const std::exception& e) {
        sink.add("attacks." + key, e.what());
      }
    }
  }

  if (doc.contains("topology")) {
    try {
      PipelineTopology topo = parse_topology(doc.at("topology"), sink);
      topo.validate();
      for (const auto& c : topo.consumers) {
        if (!c.has_irrigation) continue;
        if (c.device.empty()) {
          sink.add("topology", "irrigated consumer " + c.id + " names no device");
          continue;
        }
        const ScenarioHost* sh = sc.find_host(c.device);
        if (!sh || !sh->device)
          sink.add("topology", "irrigated consumer " + c.id +
                                   " maps to no device instance: " + c.device);
      }
      sc.topology = std::move(topo);
    } catch (const std::exception& e) {
      sink.add("topology", e.what());
    }
  }

  // cross checks
  if (any_rainmachine && sc.weather_profiles.empty())
    sink.add("weather_profiles", "rainmachine devices need at least one weather profile");
  const HostnameTable table = HostnameTable::defaults();
  for (const auto& lan : sc.lans)
    for (const auto& h : lan.hosts)
      if (h.background)
        for (const auto& dst : h.background->destinations)
          if (table.contains(dst))
            sink.add("lans", "background host " + h.id + " pool contains cloud host " + dst);

  sink.raise_if_any(name);
  return sc;
}

inline Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open scenario file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path.filename().string());
}

}  // namespace aquanet
