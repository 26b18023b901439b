#include <gtest/gtest.h>

#include <set>

#include "support.hpp"

using namespace aquanet;
using aquanet::testing::load_fixture;

namespace {

struct GreenIqHarness {
  Simulation sim{77};
  GreenIqCloud cloud;
  std::unique_ptr<GreenIqDevice> device;

  GreenIqHarness() {
    sim.set_horizon(93600);
    sim.add_lan("lan-1", "A");
    sim.add_host("lan-1", "greeniq-1");
    cloud.install(sim);
    GreenIqConfig cfg;
    cfg.id = "greeniq-1";
    device = std::make_unique<GreenIqDevice>(sim, std::move(cfg));
    device->install(sim);
  }
};

std::vector<WateringPlan> one_plan(Timestamp start, Timestamp end) {
  WateringPlan p;
  p.zones = {1};
  p.start = start;
  p.end = end;
  p.daily = {{0, 600}};
  return {p};
}

struct RainMachineHarness {
  Simulation sim{88};
  std::unique_ptr<WeatherService> weather;
  std::unique_ptr<RainMachineDevice> device;

  explicit RainMachineHarness(std::vector<WeatherProfile> profiles, bool install_weather = true) {
    sim.set_horizon(172800);
    sim.add_lan("lan-1", "A");
    sim.add_host("lan-1", "rainmachine-1");
    install_sync_cloud(sim, kRainMachineHost);
    if (install_weather) {
      weather = std::make_unique<WeatherService>(std::move(profiles));
      weather->install(sim);
    } else {
      sim.set_default_responder(false);
    }
    RainMachineConfig cfg;
    cfg.id = "rainmachine-1";
    cfg.lat = 51.5;
    cfg.lon = -0.12;
    WateringPlan base;
    base.zones = {1, 2};
    base.start = 0;
    base.end = 172800;
    base.daily = {{21600, 3600}};
    cfg.base_plan = base;
    device = std::make_unique<RainMachineDevice>(sim, std::move(cfg));
    device->install(sim);
  }
};

WeatherProfile london() { return {"london", 51.5, -0.12, -1000, 12000, 5000}; }
WeatherProfile sahara() { return {"sahara", 27.0, 2.5, 22000, 46000, 0}; }

}  // namespace

// --- GreenIQ ------------------------------------------------------------

TEST(GreenIq, EqualTimestampDoesNotTriggerConfigFetch) {
  GreenIqHarness h;
  h.cloud.set_user_config("greeniq-1", 100, one_plan(100, 7200));
  h.sim.run_until(600);
  EXPECT_EQ(h.device->current_config(), 100);
  EXPECT_EQ(h.cloud.config_fetches_seen(), 1u);  // fetched once, then T == current
  h.sim.run_until(1800);
  EXPECT_EQ(h.cloud.config_fetches_seen(), 1u);
}

TEST(GreenIq, NewerTimestampReplacesPlansAndAdvancesLatch) {
  GreenIqHarness h;
  h.cloud.set_user_config("greeniq-1", 100, one_plan(100, 7200));
  h.sim.run_until(300);
  ASSERT_EQ(h.device->plans().size(), 1u);
  EXPECT_EQ(h.device->plans()[0].start, 100);

  h.cloud.set_user_config("greeniq-1", 101, one_plan(500, 9000));
  h.sim.run_until(600);
  EXPECT_EQ(h.device->current_config(), 101);
  ASSERT_EQ(h.device->plans().size(), 1u);
  EXPECT_EQ(h.device->plans()[0].start, 500);
  EXPECT_EQ(h.cloud.config_fetches_seen(), 2u);
}

TEST(GreenIq, FarFutureTimestampLatchesOutLegitimateUpdates) {
  GreenIqHarness h;
  const Timestamp far_future = 40000000;  // far beyond this scenario's clock
  h.cloud.set_user_config("greeniq-1", far_future, one_plan(0, 86400));
  h.sim.run_until(120);
  EXPECT_EQ(h.device->current_config(), far_future);

  // a later legitimate update carries a smaller timestamp and is ignored
  h.cloud.set_user_config("greeniq-1", 3000, one_plan(3000, 9000));
  h.sim.run_until(7200);
  EXPECT_EQ(h.device->current_config(), far_future);
  EXPECT_EQ(h.device->plans()[0].start, 0);

  // factory reset clears the latch; the stored user config is picked up again
  h.device->factory_reset(h.sim);
  h.sim.run_until(7400);
  EXPECT_EQ(h.device->current_config(), 3000);
  EXPECT_EQ(h.device->plans()[0].start, 3000);
}

TEST(GreenIq, LatchIsNonDecreasingOverAnyUpdateSequence) {
  GreenIqHarness h;
  RandomStream rng(4, "devices/latch");
  Timestamp t = 60;
  for (int i = 0; i < 40; ++i) {
    h.cloud.set_user_config("greeniq-1", rng.uniform(0, 50000), one_plan(0, 86400));
    t += 120;
    h.sim.run_until(t);
  }
  const auto& accepted = h.device->accepted_configs();
  for (std::size_t i = 1; i < accepted.size(); ++i)
    EXPECT_GT(accepted[i].config, accepted[i - 1].config);
}

TEST(GreenIq, MalformedPingResponseIsIgnored) {
  GreenIqHarness h;
  h.sim.register_service(kGreenIqHost,
                         [](Simulation&, const TrafficEvent& req) -> std::optional<Document> {
                           if (req.method == Method::TcpConnect) return std::nullopt;
                           return Document{{"timestamp", "tomorrow"}};
                         });
  h.sim.run_until(600);
  EXPECT_EQ(h.device->current_config(), 0);
  EXPECT_TRUE(h.device->plans().empty());
  bool logged = false;
  for (const auto& line : h.sim.logs())
    logged |= line.find("malformed ping response") != std::string::npos;
  EXPECT_TRUE(logged);
}

TEST(GreenIq, MalformedConfigDocumentLeavesStateUnchangedAndRetries) {
  GreenIqHarness h;
  h.sim.register_service(kGreenIqHost,
                         [](Simulation&, const TrafficEvent& req) -> std::optional<Document> {
                           if (req.method == Method::TcpConnect) return std::nullopt;
                           if (req.path == kGreenIqPingPath) return Document{{"timestamp", 500}};
                           return Document{{"plans", "garbage"}};
                         });
  h.sim.run_until(300);
  EXPECT_EQ(h.device->current_config(), 0);  // never latched
  EXPECT_TRUE(h.device->plans().empty());
  EXPECT_TRUE(h.device->accepted_configs().empty());
}

TEST(GreenIq, ValveExecValidatesBitstrings) {
  GreenIqHarness h;
  h.sim.run_until(10);
  EXPECT_THROW(h.device->exec_valves(h.sim, "0000000"), SimError);    // wrong length
  EXPECT_THROW(h.device->exec_valves(h.sim, "0000000x"), SimError);   // not binary
  h.device->exec_valves(h.sim, "11111111");
  EXPECT_EQ(h.device->valves(), "11111111");
  h.sim.run_until(100);
  h.device->exec_valves(h.sim, "00000000");
  EXPECT_EQ(h.device->valves(), "00000000");
  // 8 zones open for 90 s each
  EXPECT_EQ(h.sim.meter().total_flow_seconds(), 8 * kSprinklerFlowMilli * 90);
}

TEST(GreenIq, MasterValveToggleEvery10SecondsWaters30SecondsPerMinute) {
  GreenIqHarness h;
  h.sim.run_until(10);
  for (int k = 0; k < 6; ++k) {
    h.device->exec_valves(h.sim, k % 2 == 0 ? "10000000" : "00000000");
    h.sim.run_until(h.sim.now() + 10);
  }
  h.device->controller().finalize(h.sim, h.sim.now());
  EXPECT_EQ(h.device->controller().zone_open_seconds(1), 30);
}

// --- RainMachine ----------------------------------------------------------

TEST(RainMachine, LondonWinterNeedsNoWatering) {
  const auto permille = watering_permille(synthesize_forecast(london(), 0, 7), NeedModel{});
  ASSERT_EQ(permille.size(), 7u);
  for (const auto& [day, p] : permille) EXPECT_EQ(p, 0) << "day " << day;
}

TEST(RainMachine, HotDryForecastSchedulesWatering) {
  WeatherProfile hot{"hot", 0, 0, 0, 50000, 0};
  const auto permille = watering_permille(synthesize_forecast(hot, 0, 7), NeedModel{});
  for (const auto& [day, p] : permille) EXPECT_GT(p, 0) << "day " << day;
}

TEST(RainMachine, RainExactlyCoveringNeedGivesZero) {
  // constant 16 C: ET0 = 0.4 * 6 = 2.4 mm/day; 100 milli-mm per hour = 2.4 mm/day
  WeatherForecast f;
  for (int h = 0; h < 48; ++h)
    f.entries.push_back({h * kSecondsPerHour, 16000, 100, 80, 3000, 75});
  const auto permille = watering_permille(f, NeedModel{});
  for (const auto& [day, p] : permille) EXPECT_EQ(p, 0);
}

TEST(RainMachine, AdaptationIsMonotoneInTemperatureAndRain) {
  RandomStream rng(2222, "devices/monotone");
  for (int iter = 0; iter < 200; ++iter) {
    WeatherForecast base;
    const int hours = 24 * static_cast<int>(rng.uniform(1, 3));
    for (int h = 0; h < hours; ++h)
      base.entries.push_back({h * kSecondsPerHour,
                              rng.uniform(-5000, 45000),
                              rng.uniform(0, 400),
                              80, 3000, 50});
    WeatherForecast warmer = base;
    WeatherForecast wetter = base;
    for (std::size_t i = 0; i < base.entries.size(); ++i) {
      warmer.entries[i].temp_milli_c += rng.uniform(0, 8000);
      wetter.entries[i].precip_milli_mm += rng.uniform(0, 300);
    }
    const NeedModel model;
    const auto p0 = watering_permille(base, model);
    const auto p_warm = watering_permille(warmer, model);
    const auto p_wet = watering_permille(wetter, model);
    for (const auto& [day, p] : p0) {
      EXPECT_GE(p_warm.at(day), p) << "iter " << iter << " day " << day;
      EXPECT_LE(p_wet.at(day), p) << "iter " << iter << " day " << day;
    }
  }
}

TEST(RainMachine, FourWeatherRequestsPerDay) {
  RainMachineHarness h({london()});
  const Trace& trace = h.sim.run_until(86400);
  int polls = 0;
  for (const auto& ev : trace)
    if (ev.direction == Direction::Request && ev.dst_host == kWeatherHost) {
      ++polls;
      EXPECT_TRUE(ev.payload.contains("lat"));
      EXPECT_TRUE(ev.payload.contains("lon"));
    }
  EXPECT_EQ(polls, 4);
}

TEST(RainMachine, AcceptsForecastForWrongCoordinatesUnchecked) {
  // service answers with Sahara data and Sahara coordinates regardless of
  // what was asked; the device never validates the echo
  RainMachineHarness h({london()});
  h.sim.register_service(kWeatherHost,
                         [](Simulation& s, const TrafficEvent& req) -> std::optional<Document> {
                           if (req.method == Method::TcpConnect) return std::nullopt;
                           (void)req;
                           return forecast_to_document(
                               synthesize_forecast(sahara(), (s.now() / kSecondsPerDay) * kSecondsPerDay, 7));
                         });
  h.sim.run_until(600);
  ASSERT_TRUE(h.device->has_forecast());
  EXPECT_DOUBLE_EQ(h.device->forecast_cache().lat, 27.0);
  EXPECT_GT(h.device->permille_for_day(0), 0);
}

TEST(RainMachine, NoResponseRetainsCache) {
  RainMachineHarness h({london()}, false);  // weather host unreachable
  h.sim.run_until(43200);
  EXPECT_FALSE(h.device->has_forecast());
  EXPECT_TRUE(h.device->permille_by_day().empty());
  // without a forecast the base plan runs unscaled
  EXPECT_GT(h.sim.meter().total_flow_seconds(), 0);
}

TEST(RainMachine, LondonBaselineConsumesNoWater) {
  RainMachineHarness h({london()});
  h.sim.run_until(172800);
  h.device->controller().finalize(h.sim, 172800);
  EXPECT_EQ(h.sim.meter().total_flow_seconds(), 0);
}

// --- BlueSpray ------------------------------------------------------------

namespace {

struct BlueSprayHarness {
  Simulation sim{99};
  std::unique_ptr<BlueSprayDevice> device;

  BlueSprayHarness() {
    sim.set_horizon(86400);
    sim.add_lan("lan-1", "A");
    sim.add_host("lan-1", "bluespray-1");
    sim.add_host("lan-1", "attacker");
    install_sync_cloud(sim, kBlueSprayCloudHost);
    install_sync_cloud(sim, kBlueSprayWwwHost);
    BlueSprayConfig cfg;
    cfg.id = "bluespray-1";
    device = std::make_unique<BlueSprayDevice>(sim, std::move(cfg));
    device->install(sim);
  }

  void send_schedule(const Document& payload) {
    sim.schedule(sim.now(), [payload](Simulation& s) {
      TrafficEvent req;
      req.src = "attacker";
      req.dst_host = "bluespray-1";
      req.method = Method::LocalHttp;
      req.path = kBlueSpraySchedulePath;
      req.payload = payload;
      s.send_request(std::move(req));
    });
  }
};

}  // namespace

TEST(BlueSpray, AcceptsScheduleFromAnyLanHostWithoutCredentials) {
  BlueSprayHarness h;
  WateringPlan week;
  week.zones = {1, 2, 3};
  week.start = 0;
  week.end = 7 * kSecondsPerDay;
  week.daily = {{21600, 1800}};
  h.send_schedule(bluespray_schedule_document({week}));
  h.sim.run_until(10);
  ASSERT_EQ(h.device->plans().size(), 1u);
  EXPECT_EQ(h.device->plans()[0], week);
  EXPECT_FALSE(h.device->auth_required());
}

TEST(BlueSpray, ReplayedRequestIsIdempotent) {
  BlueSprayHarness h;
  WateringPlan p;
  p.zones = {4};
  p.start = 100;
  p.end = 4000;
  p.daily = {{0, 1200}};
  const Document payload = bluespray_schedule_document({p});
  h.send_schedule(payload);
  h.sim.run_until(5);
  const auto snapshot = h.device->plans();
  h.send_schedule(payload);
  h.sim.run_until(10);
  EXPECT_EQ(h.device->plans(), snapshot);
  EXPECT_EQ(h.device->plans().size(), 1u);
}

TEST(BlueSpray, ZoneZeroIsRejectedWithoutStateChange) {
  BlueSprayHarness h;
  WateringPlan bad;
  bad.zones = {0};
  bad.start = 0;
  bad.end = 600;
  bad.daily = {{0, 60}};
  Document payload = Document{{"plans", Document::array()}};
  payload["plans"].push_back({{"zones", bad.zones},
                              {"start", bad.start},
                              {"end", bad.end},
                              {"schedule", Document::array({{{"offset", 0}, {"duration", 60}}})}});
  h.send_schedule(payload);
  h.sim.run_until(10);
  EXPECT_TRUE(h.device->plans().empty());
  bool error_response = false;
  for (const auto& ev : h.sim.trace())
    if (ev.direction == Direction::Response && ev.path == kBlueSpraySchedulePath)
      error_response = ev.payload.contains("error");
  EXPECT_TRUE(error_response);
}

// --- background profiles --------------------------------------------------

TEST(Background, CameraUniqueDestinationsTrackConfiguredMean) {
  Simulation sim(314);
  const Timestamp horizon = 100 * kSecondsPerHour;
  sim.set_horizon(horizon);
  sim.add_lan("lan-1", "A");
  sim.add_host("lan-1", "cam-1");
  BackgroundDevice cam(sim, "cam-1", default_background_profile("camera"));
  cam.install(sim);
  const Trace& trace = sim.run_until(horizon);

  double total_unique = 0;
  for (int hour = 0; hour < 100; ++hour) {
    std::set<std::string> dsts;
    for (const auto& ev : trace) {
      if (ev.direction != Direction::Request) continue;
      if (ev.time >= hour * kSecondsPerHour && ev.time < (hour + 1) * kSecondsPerHour)
        dsts.insert(ev.dst_host);
    }
    total_unique += static_cast<double>(dsts.size());
  }
  const double mean = total_unique / 100.0;
  const double configured = default_background_profile("camera").unique_destinations_mean;
  EXPECT_NEAR(mean, configured, configured * 0.10);
}

TEST(Background, EmptyDestinationPoolEmitsNothing) {
  Simulation sim(1);
  sim.set_horizon(7200);
  sim.add_lan("lan-1", "A");
  sim.add_host("lan-1", "dead");
  BackgroundDevice dev(sim, "dead", BackgroundProfile{"bulb", {}, 4, 8, 0.0});
  dev.install(sim);
  EXPECT_TRUE(sim.run_until(7200).empty());
}

TEST(Background, PoolContainingCloudHostIsRejected) {
  Simulation sim(1);
  sim.add_lan("lan-1", "A");
  sim.add_host("lan-1", "evil");
  BackgroundProfile p{"bulb", {"api.lights.example", kGreenIqHost}, 4, 8, 1.0};
  BackgroundDevice dev(sim, "evil", p);
  EXPECT_THROW(dev.install(sim), ConfigError);
}

// --- fixture-level invariants over the 26 h scenario -----------------------

namespace {

struct Fixture26h {
  Scenario scenario = load_fixture("detection26h.json");
  World world{scenario, {}};
  const Trace& trace;
  Fixture26h() : trace(world.run()) {}

  std::vector<Timestamp> cloud_sessions(const HostId& host) const {
    const HostnameTable table = HostnameTable::defaults();
    std::vector<Timestamp> out;
    for (const auto& ev : trace)
      if (ev.src == host && ev.direction == Direction::Request &&
          ev.method == Method::TcpConnect && table.contains(ev.dst_host))
        out.push_back(ev.time);
    return out;
  }
};

}  // namespace

TEST(Fixture26hInvariants, IrrigationAndBackgroundDestinationsAreDisjoint) {
  Fixture26h f;
  const HostnameTable table = HostnameTable::defaults();
  std::set<std::string> irrigation_dsts, background_dsts;
  for (const auto& ev : f.trace) {
    if (ev.direction != Direction::Request) continue;
    const bool is_device = f.scenario.find_host(ev.src)->device.has_value();
    (is_device ? irrigation_dsts : background_dsts).insert(ev.dst_host);
  }
  for (const auto& d : background_dsts) {
    EXPECT_FALSE(table.contains(d)) << d;
    EXPECT_FALSE(irrigation_dsts.count(d)) << d;
  }
}

TEST(Fixture26hInvariants, CloudSessionsPerHourStayInBand) {
  Fixture26h f;
  for (const auto& host : {"greeniq-1", "rainmachine-1", "bluespray-1"}) {
    const auto sessions = f.cloud_sessions(host);
    for (int hour = 0; hour < 26; ++hour) {
      int count = 0;
      for (Timestamp t : sessions)
        if (t >= hour * kSecondsPerHour && t < (hour + 1) * kSecondsPerHour) ++count;
      EXPECT_GE(count, 6) << host << " hour " << hour;
      EXPECT_LE(count, 11) << host << " hour " << hour;
    }
  }
}

TEST(Fixture26hInvariants, InterSessionGapsRespectCeilingAndP99) {
  Fixture26h f;
  const HostnameTable table = HostnameTable::defaults();
  for (const auto& host : {"greeniq-1", "rainmachine-1", "bluespray-1"}) {
    const FeatureRow row = extract_features(f.trace, host, 0, f.scenario.horizon, table);
    ASSERT_TRUE(row.gap_max.has_value()) << host;
    EXPECT_LE(*row.gap_max, 900) << host;
    EXPECT_LE(*row.gap_p99, 600) << host;
  }
}

TEST(Fixture26hInvariants, SmartphoneUniqueDestinationsExceedEveryIrrigationDevice) {
  Fixture26h f;
  const HostnameTable table = HostnameTable::defaults();
  auto hourly_unique_mean = [&](const HostId& host) {
    double total = 0;
    for (int hour = 0; hour < 26; ++hour) {
      const FeatureRow row = extract_features(f.trace, host, hour * kSecondsPerHour,
                                              (hour + 1) * kSecondsPerHour, table);
      total += static_cast<double>(row.unique_destinations);
    }
    return total / 26.0;
  };
  const double phone = hourly_unique_mean("phone-1");
  for (const auto& host : {"greeniq-1", "rainmachine-1", "bluespray-1"})
    EXPECT_GT(phone, hourly_unique_mean(host)) << host;
}

TEST(Fixture26hInvariants, UserUpdateIsPickedUpWithinAMinute) {
  Fixture26h f;
  const auto* dev = f.world.greeniq("greeniq-1");
  ASSERT_NE(dev, nullptr);
  ASSERT_EQ(dev->accepted_configs().size(), 1u);
  EXPECT_EQ(dev->accepted_configs()[0].config, 36000);
  EXPECT_LE(dev->accepted_configs()[0].at, 36000 + 2 * kGreenIqPingPeriod);
}
