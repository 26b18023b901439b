#include <gtest/gtest.h>

#include "support.hpp"

using namespace aquanet;
using aquanet::testing::scenario_from;
using aquanet::testing::scenario_skeleton;

namespace {

// One GreenIQ on one LAN with a laptop to act as interceptor in MITM tests.
struct MiniWorld {
  Simulation sim{12345};
  GreenIqCloud cloud;
  std::unique_ptr<GreenIqDevice> device;

  explicit MiniWorld(bool with_plan = false) {
    sim.set_horizon(86400);
    sim.add_lan("lan-1", "A");
    sim.add_host("lan-1", "greeniq-1");
    sim.add_host("lan-1", "laptop-1");
    cloud.install(sim);
    GreenIqConfig cfg;
    cfg.id = "greeniq-1";
    if (with_plan) {
      WateringPlan p;
      p.zones = {1};
      p.start = 0;
      p.end = 86400;
      p.daily = {{600, 300}};
      cfg.initial_plans = {p};
    }
    device = std::make_unique<GreenIqDevice>(sim, std::move(cfg));
    device->install(sim);
  }
};

std::string trace_text(const Trace& trace) {
  std::string out;
  for (const auto& ev : trace) {
    out += trace_line(ev);
    out += '\n';
  }
  return out;
}

}  // namespace

TEST(EventQueue, ZeroDelayEventFiresInSameStep) {
  Simulation sim(1);
  std::vector<int> order;
  sim.schedule(5, [&](Simulation& s) {
    order.push_back(1);
    s.schedule(5, [&](Simulation&) { order.push_back(2); });
  });
  sim.schedule(6, [&](Simulation&) { order.push_back(3); });
  sim.run_until(10);
  EXPECT_EQ(order, (std::vector<int>{1, 2, 3}));
}

TEST(EventQueue, FifoTieBreakAtSameTimestamp) {
  Simulation sim(1);
  std::vector<char> order;
  sim.schedule(100, [&](Simulation&) { order.push_back('A'); });
  sim.schedule(100, [&](Simulation&) { order.push_back('B'); });
  sim.run_until(100);
  EXPECT_EQ(order, (std::vector<char>{'A', 'B'}));
}

TEST(EventQueue, SchedulingInThePastIsRejected) {
  Simulation sim(1);
  sim.schedule(10, [](Simulation& s) {
    EXPECT_THROW(s.schedule(9, [](Simulation&) {}), SimError);
  });
  sim.run_until(20);
  EXPECT_THROW(sim.schedule(19, [](Simulation&) {}), SimError);
}

TEST(EventQueue, EmptyQueueAdvancesClockToHorizon) {
  Simulation sim(1);
  const Trace& trace = sim.run_until(3600);
  EXPECT_TRUE(trace.empty());
  EXPECT_EQ(sim.now(), 3600);
}

TEST(EventQueue, CancelledEventNeverFires) {
  Simulation sim(1);
  bool fired = false;
  EventHandle h = sim.schedule(50, [&](Simulation&) { fired = true; });
  h.cancel();
  sim.run_until(100);
  EXPECT_FALSE(fired);
}

TEST(NetSim, GreenIqEmitsFivePingsInFirst300Seconds) {
  MiniWorld world;
  const Trace& trace = world.sim.run_until(300);
  int pings = 0;
  for (const auto& ev : trace)
    if (ev.direction == Direction::Request && ev.path == kGreenIqPingPath) ++pings;
  EXPECT_EQ(pings, 5);  // minute cadence: 60, 120, 180, 240, 300
}

TEST(NetSim, IdenticalSeedsYieldByteIdenticalTraces) {
  const Scenario sc = aquanet::testing::load_fixture("regional.json");
  World a(sc, {true, std::nullopt});
  World b(sc, {true, std::nullopt});
  EXPECT_EQ(trace_text(a.run()), trace_text(b.run()));

  // a different seed perturbs the trace
  World c(sc, {true, std::uint64_t{999}});
  EXPECT_NE(trace_text(a.trace()), trace_text(c.run()));
}

TEST(NetSim, ResponsesNeverPrecedeTheirRequests) {
  MiniWorld world;
  const Trace& trace = world.sim.run_until(3600);
  std::map<std::uint64_t, std::size_t> index_of;
  for (std::size_t i = 0; i < trace.size(); ++i) index_of[trace[i].id] = i;
  int responses = 0;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const auto& ev = trace[i];
    if (ev.direction != Direction::Response) continue;
    ++responses;
    ASSERT_TRUE(index_of.count(ev.request_id));
    const std::size_t req_index = index_of[ev.request_id];
    EXPECT_LT(req_index, i);
    EXPECT_LE(trace[req_index].time, ev.time);
  }
  EXPECT_GT(responses, 0);
}

TEST(Mitm, UnknownHostsAreRejected) {
  Simulation sim(1);
  sim.add_lan("lan-1", "A");
  sim.add_host("lan-1", "a");
  sim.add_host("lan-1", "b");
  auto pass = [](Simulation&, const TrafficEvent&) { return InterceptOutcome::pass(); };
  EXPECT_THROW(sim.set_mitm("lan-1", "ghost", {"a"}, pass), SimError);
  EXPECT_THROW(sim.set_mitm("lan-1", "a", {"ghost"}, pass), SimError);
  EXPECT_THROW(sim.set_mitm("lan-1", "a", {"a"}, pass), SimError);
  sim.set_mitm("lan-1", "a", {"b"}, pass);
  EXPECT_THROW(sim.set_mitm("lan-1", "b", {"a"}, pass), SimError);  // one interceptor per LAN
  sim.clear_mitm("lan-1");
  sim.set_mitm("lan-1", "b", {"a"}, pass);
}

TEST(Mitm, PassThroughInterceptorLeavesTraceIdentical) {
  MiniWorld plain;
  const Trace& reference = plain.sim.run_until(7200);

  MiniWorld tapped;
  tapped.sim.set_mitm("lan-1", "laptop-1", {"greeniq-1"},
                      [](Simulation&, const TrafficEvent&) { return InterceptOutcome::pass(); });
  const Trace& observed = tapped.sim.run_until(7200);

  EXPECT_EQ(trace_text(reference), trace_text(observed));
}

TEST(Mitm, NoVictimsMeansAllTrafficUntouched) {
  MiniWorld plain;
  const Trace& reference = plain.sim.run_until(3600);

  MiniWorld tapped;
  int seen = 0;
  tapped.sim.set_mitm("lan-1", "laptop-1", {}, [&](Simulation&, const TrafficEvent&) {
    ++seen;
    return InterceptOutcome::pass();
  });
  const Trace& observed = tapped.sim.run_until(3600);
  EXPECT_EQ(seen, 0);
  EXPECT_EQ(trace_text(reference), trace_text(observed));
}

TEST(Mitm, FabricatedResponseSuppressesDeliveryToCloud) {
  MiniWorld world;
  world.sim.set_mitm(
      "lan-1", "laptop-1", {"greeniq-1"}, [](Simulation&, const TrafficEvent& ev) {
        if (ev.direction == Direction::Request && ev.path == kGreenIqPingPath) {
          TrafficEvent resp =
              Simulation::make_response(ev, Document{{"timestamp", 999}}, Origin::Interceptor);
          return InterceptOutcome::fabricate(ev, std::move(resp));
        }
        return InterceptOutcome::pass();
      });
  world.sim.run_until(200);

  EXPECT_EQ(world.cloud.pings_seen(), 0u);  // the cloud never saw a ping
  // the device trusted the fabricated timestamp and pulled the (real) config
  EXPECT_EQ(world.device->current_config(), 999);
  EXPECT_GE(world.cloud.config_fetches_seen(), 1u);
}

TEST(Consumption, MeterSplitsAcrossPeriodsExactly) {
  ConsumptionMeter meter(600);
  meter.add("dev", 3600000, 500, 1300);  // 3600 m3/h for 800 s crossing two boundaries
  const auto series = meter.series(1800);
  ASSERT_EQ(series.size(), 3u);
  EXPECT_EQ(series[0].flow_seconds, 3600000ll * 100);
  EXPECT_EQ(series[1].flow_seconds, 3600000ll * 600);
  EXPECT_EQ(series[2].flow_seconds, 3600000ll * 100);
  EXPECT_EQ(meter.total_flow_seconds(), 3600000ll * 800);
  EXPECT_DOUBLE_EQ(series[1].m3(), 600.0);
}

TEST(Watering, ControllerAccruesOpenSecondsExactly) {
  Simulation sim(3);
  sim.set_horizon(600);
  sim.add_lan("lan-1", "A");
  sim.add_host("lan-1", "dev");
  WateringController ctl("dev", 8, 2795);
  WateringPlan p;
  p.zones = {1, 3};
  p.start = 100;
  p.end = 400;
  p.daily = {{0, kSecondsPerDay}};
  ctl.set_plans(sim, {p});
  sim.run_until(600);
  ctl.finalize(sim, 600);
  EXPECT_EQ(ctl.zone_open_seconds(1), 300);
  EXPECT_EQ(ctl.zone_open_seconds(3), 300);
  EXPECT_EQ(ctl.zone_open_seconds(2), 0);
  EXPECT_EQ(sim.meter().total_flow_seconds(), 2 * 2795ll * 300);
  EXPECT_EQ(ctl.valves(), "00000000");
}

TEST(Watering, PlanValidationNamesTheProblem) {
  WateringPlan p;
  p.zones = {0};
  p.start = 0;
  p.end = 100;
  p.daily = {{0, 60}};
  try {
    validate_plan(p, 8);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("zone index 0"), std::string::npos);
  }
  p.zones = {1};
  p.start = 100;
  p.end = 100;
  EXPECT_THROW(validate_plan(p, 8), ConfigError);
}
