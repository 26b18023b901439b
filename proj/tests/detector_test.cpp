#include <gtest/gtest.h>

#include "support.hpp"

using namespace aquanet;
using aquanet::testing::load_fixture;

namespace {

TrafficEvent request(Timestamp t, const HostId& src, const std::string& dst,
                     Method m = Method::TcpConnect) {
  TrafficEvent ev;
  ev.time = t;
  ev.src = src;
  ev.dst_host = dst;
  ev.method = m;
  ev.direction = Direction::Request;
  return ev;
}

const HostnameTable& table() {
  static const HostnameTable t = HostnameTable::defaults();
  return t;
}

}  // namespace

TEST(HostnameTable, DefaultsCoverTheFiveCloudHosts) {
  EXPECT_EQ(table().match("www.greeniq.net"), IrrigationKind::GreenIq);
  EXPECT_EQ(table().match("proxy1.rainmachine.com"), IrrigationKind::RainMachine);
  EXPECT_EQ(table().match("cloud.bluespray.net"), IrrigationKind::BlueSpray);
  EXPECT_EQ(table().match("www.bluespray.net"), IrrigationKind::BlueSpray);
  EXPECT_FALSE(table().match("www.search.example").has_value());
  EXPECT_EQ(table().entries().size(), 5u);
}

TEST(HostnameTable, ConflictingMappingIsRejected) {
  HostnameTable t = HostnameTable::defaults();
  EXPECT_THROW(t.add("www.greeniq.net", IrrigationKind::BlueSpray), ConfigError);
  t.add("cloud.newvendor.example", IrrigationKind::GreenIq);  // new kinds are data
}

TEST(Classifier, FirstCloudPacketDecidesKindAndElapsed) {
  Trace trace{request(3, "h", "mail.example"), request(5, "h", "www.greeniq.net")};
  const Verdict v = is_smart_irrigation_system(trace, 93600, "h", 0, 900, table());
  ASSERT_TRUE(v.result.has_value());
  EXPECT_EQ(*v.result, IrrigationKind::GreenIq);
  EXPECT_EQ(v.elapsed, 5);
  EXPECT_EQ(*v.matched_host, "www.greeniq.net");
  EXPECT_FALSE(v.truncated);
}

TEST(Classifier, LaptopTrafficIsNoneAfterFullPeriod) {
  Trace trace;
  for (int i = 0; i < 100; ++i) trace.push_back(request(i * 9, "laptop", "news.example"));
  const Verdict v = is_smart_irrigation_system(trace, 93600, "laptop", 0, 900, table());
  EXPECT_FALSE(v.result.has_value());
  EXPECT_EQ(v.elapsed, 900);
  EXPECT_FALSE(v.truncated);
}

TEST(Classifier, ResponsesAndOtherHostsDoNotMatch) {
  TrafficEvent resp = request(5, "h", "www.greeniq.net");
  resp.direction = Direction::Response;
  Trace trace{resp, request(7, "other", "www.greeniq.net")};
  const Verdict v = is_smart_irrigation_system(trace, 93600, "h", 0, 900, table());
  EXPECT_FALSE(v.result.has_value());
}

TEST(Classifier, TapClosedEarlyIsFlaggedTruncated) {
  Trace trace{request(10, "h", "news.example")};
  const Verdict v = is_smart_irrigation_system(trace, 500, "h", 200, 900, table());
  EXPECT_FALSE(v.result.has_value());
  EXPECT_TRUE(v.truncated);
  EXPECT_EQ(v.elapsed, 300);  // horizon - phase < period
}

TEST(Classifier, VerdictInvariantMatchedHostBelongsToKind) {
  Trace trace{request(4, "h", "cloud.bluespray.net")};
  const Verdict v = is_smart_irrigation_system(trace, 93600, "h", 0, 900, table());
  ASSERT_TRUE(v.result.has_value() && v.matched_host.has_value());
  const auto& hosts = cloud_hosts(*v.result);
  EXPECT_NE(std::find(hosts.begin(), hosts.end(), *v.matched_host), hosts.end());
}

TEST(Classifier, ZeroFalsePositivesOnArbitraryNonCloudTraffic) {
  RandomStream rng(606, "detector/fp");
  const std::vector<std::string> pool{"a.example", "b.example", "c.example",
                                      "time.pool.example", "cdn.media.example"};
  for (int iter = 0; iter < 200; ++iter) {
    Trace trace;
    Timestamp t = 0;
    for (int i = 0; i < 50; ++i) {
      t += rng.uniform(1, 120);
      trace.push_back(request(t, "host", pool[static_cast<std::size_t>(rng.uniform(0, 4))]));
    }
    for (Seconds period : {0, 60, 600, 900, 86400}) {
      const Verdict v = is_smart_irrigation_system(trace, t + 1000000, "host", 0, period, table());
      EXPECT_FALSE(v.result.has_value());
    }
  }
}

TEST(Classifier, ExtendingThePeriodNeverFlipsAVerdict) {
  RandomStream rng(607, "detector/stability");
  for (int iter = 0; iter < 200; ++iter) {
    Trace trace;
    Timestamp t = 0;
    for (int i = 0; i < 30; ++i) {
      t += rng.uniform(1, 300);
      const bool cloud = rng.chance(0.2);
      trace.push_back(request(t, "h", cloud ? "proxy1.rainmachine.com" : "news.example"));
    }
    std::optional<IrrigationKind> prev;
    for (Seconds period : {60, 300, 600, 900, 3600, 100000}) {
      const Verdict v = is_smart_irrigation_system(trace, t + 1000000, "h", 0, period, table());
      if (prev) {
        ASSERT_TRUE(v.result.has_value());
        EXPECT_EQ(*v.result, *prev);
      }
      if (v.result) prev = v.result;
    }
  }
}

TEST(Classifier, LiveTapAgreesWithOfflineScan) {
  const Scenario sc = load_fixture("regional.json");
  World world(sc, {});
  const Trace& trace = world.run();
  RandomStream rng(17, "detector/live");
  for (int iter = 0; iter < 50; ++iter) {
    const HostId host = iter % 2 == 0 ? "greeniq-a" : "laptop-a1";
    const Timestamp phase = rng.uniform(0, sc.horizon - 1000);
    const Seconds period = rng.uniform(30, 900);

    LiveClassifier live(host, phase, period, table());
    for (const auto& ev : trace) {
      if (ev.time < phase) continue;
      if (live.feed(ev)) break;
    }
    const Verdict from_live = live.finish(sc.horizon);
    const Verdict offline = is_smart_irrigation_system(trace, sc.horizon, host, phase, period, table());
    EXPECT_EQ(from_live.result, offline.result) << host << " phase " << phase;
    if (from_live.result) EXPECT_EQ(from_live.elapsed, offline.elapsed);
  }
}

// --- detection bound over the bundled 26 h scenario -------------------------

namespace {

struct TraceFixture {
  Scenario scenario = load_fixture("detection26h.json");
  Trace trace;
  TraceFixture() {
    World world(scenario, {});
    trace = world.run();
  }
};

const TraceFixture& fixture() {
  static const TraceFixture f;
  return f;
}

}  // namespace

TEST(DetectionBound, PeriodCoveringMaxGapGuaranteesDetectionAtEveryPhase) {
  const auto& f = fixture();
  const Seconds guarantee = 900;
  for (const auto& host : {"greeniq-1", "rainmachine-1", "bluespray-1"}) {
    const FeatureRow row = extract_features(f.trace, host, 0, f.scenario.horizon, table());
    ASSERT_TRUE(row.gap_max.has_value());
    ASSERT_LE(*row.gap_max, guarantee);
    for (Timestamp phase = 0; phase + guarantee <= f.scenario.horizon; phase += 97) {
      const Verdict v =
          is_smart_irrigation_system(f.trace, f.scenario.horizon, host, phase, guarantee, table());
      ASSERT_TRUE(v.result.has_value()) << host << " phase " << phase;
      ASSERT_LE(v.elapsed, guarantee);
    }
  }
}

TEST(Features, SingleSessionWindowHasNoGapStatistics) {
  Trace trace{request(100, "h", "www.greeniq.net")};
  const FeatureRow row = extract_features(trace, "h", 0, 900, table());
  EXPECT_EQ(row.unique_destinations, 1);
  EXPECT_EQ(row.cloud_sessions, 1);
  EXPECT_FALSE(row.gap_p99.has_value());
  EXPECT_FALSE(row.gap_max.has_value());
}

TEST(Features, GapPercentileIsBoundedByMax) {
  const auto& f = fixture();
  for (const auto& host : {"greeniq-1", "rainmachine-1", "bluespray-1"}) {
    const FeatureRow row = extract_features(f.trace, host, 0, f.scenario.horizon, table());
    ASSERT_TRUE(row.gap_p99 && row.gap_max);
    EXPECT_LE(*row.gap_p99, *row.gap_max);
    EXPECT_GE(row.cloud_sessions, 0);
  }
}

TEST(Features, GreenIqTwentySixHourP99IsAtMostTenMinutes) {
  const auto& f = fixture();
  const FeatureRow row = extract_features(f.trace, "greeniq-1", 0, f.scenario.horizon, table());
  ASSERT_TRUE(row.gap_p99.has_value());
  EXPECT_LE(*row.gap_p99, 600);
}

TEST(Features, WindowConcatenationBoundsUniqueDestinations) {
  const auto& f = fixture();
  for (const auto& host : {"phone-1", "laptop-1", "fridge-1"}) {
    const FeatureRow whole = extract_features(f.trace, host, 0, 7200, table());
    const FeatureRow first = extract_features(f.trace, host, 0, 3600, table());
    const FeatureRow second = extract_features(f.trace, host, 3601, 7200, table());
    EXPECT_LE(whole.unique_destinations, first.unique_destinations + second.unique_destinations);
  }
}

// --- accuracy harness --------------------------------------------------

TEST(Accuracy, DegenerateZeroPeriodClassifiesAllIrrigationAsNone) {
  const Scenario sc = load_fixture("detection26h.json");
  World probe(sc, {});
  const auto hosts = probe.labeled_hosts();
  const double background = 28.0, total = 31.0;
  const AccuracyReport report =
      evaluate_accuracy(table(), hosts, sc.horizon, {0}, 5, sc.seed, [&](std::uint64_t seed) {
        World w(sc, {false, seed});
        return w.run();
      });
  ASSERT_EQ(report.points.size(), 1u);
  // an event landing exactly on the phase second can still match, so allow
  // a small overshoot above the background fraction
  EXPECT_GE(report.points[0].accuracy, background / total - 1e-12);
  EXPECT_LE(report.points[0].accuracy, background / total + 0.05);
  EXPECT_EQ(report.points[0].false_positives, 0);
}

TEST(Accuracy, CurveIsMonotoneAndPerfectAtFifteenMinutes) {
  const Scenario sc = load_fixture("detection26h.json");
  World probe(sc, {});
  const auto hosts = probe.labeled_hosts();
  const AccuracyReport report = evaluate_accuracy(
      table(), hosts, sc.horizon, {60, 300, 600, 900}, 25, sc.seed, [&](std::uint64_t seed) {
        World w(sc, {false, seed});
        return w.run();
      });
  ASSERT_EQ(report.points.size(), 4u);
  for (std::size_t i = 1; i < report.points.size(); ++i)
    EXPECT_GE(report.points[i].accuracy, report.points[i - 1].accuracy);
  EXPECT_DOUBLE_EQ(report.points.back().accuracy, 1.0);
  for (const auto& pt : report.points) EXPECT_EQ(pt.false_positives, 0);
}
