#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "aquanet/devices.hpp"
#include "aquanet/rng.hpp"
#include "aquanet/traffic.hpp"

namespace aquanet {

// Hostname -> vendor table driving the classification. Data-driven so new
// device kinds are a config change, defaulting to the five known cloud hosts.
class HostnameTable {
 public:
  static HostnameTable defaults() {
    HostnameTable t;
    for (IrrigationKind k : kAllIrrigationKinds)
      for (const auto& h : cloud_hosts(k)) t.add(h, k);
    return t;
  }

  void add(const std::string& hostname, IrrigationKind kind) {
    auto [it, inserted] = entries_.emplace(hostname, kind);
    if (!inserted && it->second != kind)
      throw ConfigError("hostname " + hostname + " mapped to two kinds");
  }

  std::optional<IrrigationKind> match(const std::string& hostname) const {
    auto it = entries_.find(hostname);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
  }

  bool contains(const std::string& hostname) const { return entries_.count(hostname) != 0; }
  const std::map<std::string, IrrigationKind>& entries() const { return entries_; }

 private:
  std::map<std::string, IrrigationKind> entries_;
};

struct Verdict {
  std::optional<IrrigationKind> result;  // nullopt = None
  Seconds elapsed = 0;
  std::optional<std::string> matched_host;
  bool truncated = false;  // tap closed before the period elapsed
};

inline Document verdict_to_document(const HostId& host, const Verdict& v) {
  Document d{{"host", host},
             {"result", v.result ? kind_name(*v.result) : "None"},
             {"elapsed_s", v.elapsed},
             {"truncated", v.truncated}};
  d["matched_host"] = v.matched_host ? Document(*v.matched_host) : Document(nullptr);
  return d;
}

// Hostname-match classification over a recorded event stream: the verdict is
// the kind of the FIRST outgoing event to any known cloud host within
// [phase, phase + period]; None exactly when the period elapses unmatched.
// Payloads are never inspected.
inline Verdict is_smart_irrigation_system(const Trace& trace, Timestamp trace_end,
                                          const HostId& ip, Timestamp phase, Seconds period,
                                          const HostnameTable& table) {
  const Timestamp deadline = phase + period;
  for (const auto& ev : trace) {
    if (ev.time < phase) continue;
    if (ev.time > deadline) break;
    if (ev.src != ip || ev.direction != Direction::Request) continue;
    if (auto kind = table.match(ev.dst_host)) {
      return Verdict{*kind, ev.time - phase, ev.dst_host, false};
    }
  }
  if (trace_end < deadline) return Verdict{std::nullopt, trace_end - phase, std::nullopt, true};
  return Verdict{std::nullopt, period, std::nullopt, false};
}

// Incremental form of the same procedure, fed by a live tap (the bot's MITM
// position). Classification agrees with the offline form event for event.
class LiveClassifier {
 public:
  LiveClassifier(HostId target, Timestamp start, Seconds period, const HostnameTable& table)
      : target_(std::move(target)), start_(start), period_(period), table_(&table) {}

  // Returns true the moment a verdict is reached.
  bool feed(const TrafficEvent& ev) {
    if (verdict_) return true;
    if (ev.time > start_ + period_) {
      verdict_ = Verdict{std::nullopt, period_, std::nullopt, false};
      return true;
    }
    if (ev.src != target_ || ev.direction != Direction::Request || ev.time < start_) return false;
    if (auto kind = table_->match(ev.dst_host)) {
      verdict_ = Verdict{*kind, ev.time - start_, ev.dst_host, false};
      return true;
    }
    return false;
  }

  // Call when the observation window (or the tap) ends.
  Verdict finish(Timestamp now) {
    if (verdict_) return *verdict_;
    if (now < start_ + period_) return Verdict{std::nullopt, now - start_, std::nullopt, true};
    return Verdict{std::nullopt, period_, std::nullopt, false};
  }

  bool decided() const { return verdict_.has_value(); }
  const HostId& target() const { return target_; }

 private:
  HostId target_;
  Timestamp start_;
  Seconds period_;
  const HostnameTable* table_;
  std::optional<Verdict> verdict_;
};

// --- feature extraction -----------------------------------------------

struct FeatureRow {
  HostId host;
  Timestamp window_start = 0;
  Timestamp window_end = 0;
  std::int64_t unique_destinations = 0;
  std::int64_t cloud_sessions = 0;
  std::optional<Seconds> gap_p99;  // absent when fewer than two sessions
  std::optional<Seconds> gap_max;
};

inline Document feature_to_document(const FeatureRow& r) {
  Document d{{"host", r.host},
             {"window_start_s", r.window_start},
             {"window_end_s", r.window_end},
             {"unique_destinations", r.unique_destinations},
             {"cloud_sessions", r.cloud_sessions}};
  d["gap_p99_s"] = r.gap_p99 ? Document(*r.gap_p99) : Document(nullptr);
  d["gap_max_s"] = r.gap_max ? Document(*r.gap_max) : Document(nullptr);
  return d;
}

// Nearest-rank percentile over inter-session gaps.
inline Seconds percentile(std::vector<Seconds> values, double pct) {
  std::sort(values.begin(), values.end());
  const auto n = static_cast<std::int64_t>(values.size());
  std::int64_t rank = static_cast<std::int64_t>(std::ceil(pct / 100.0 * static_cast<double>(n)));
  rank = std::clamp<std::int64_t>(rank, 1, n);
  return values[static_cast<std::size_t>(rank - 1)];
}

inline FeatureRow extract_features(const Trace& trace, const HostId& host, Timestamp window_start,
                                   Timestamp window_end, const HostnameTable& table) {
  FeatureRow row;
  row.host = host;
  row.window_start = window_start;
  row.window_end = window_end;
  std::vector<std::string> dsts;
  std::vector<Timestamp> session_starts;
  for (const auto& ev : trace) {
    if (ev.time < window_start) continue;
    if (ev.time > window_end) break;
    if (ev.src != host || ev.direction != Direction::Request) continue;
    dsts.push_back(ev.dst_host);
    if (ev.method == Method::TcpConnect && table.contains(ev.dst_host))
      session_starts.push_back(ev.time);
  }
  std::sort(dsts.begin(), dsts.end());
  row.unique_destinations =
      static_cast<std::int64_t>(std::unique(dsts.begin(), dsts.end()) - dsts.begin());
  row.cloud_sessions = static_cast<std::int64_t>(session_starts.size());
  if (session_starts.size() >= 2) {
    std::vector<Seconds> gaps;
    gaps.reserve(session_starts.size() - 1);
    for (std::size_t i = 1; i < session_starts.size(); ++i)
      gaps.push_back(session_starts[i] - session_starts[i - 1]);
    row.gap_max = *std::max_element(gaps.begin(), gaps.end());
    row.gap_p99 = percentile(std::move(gaps), 99.0);
  }
  return row;
}

// --- accuracy evaluation ------------------------------------------------

struct LabeledHost {
  HostId host;
  std::optional<IrrigationKind> kind;  // nullopt for background hosts
};

struct AccuracyPoint {
  Seconds period = 0;
  double accuracy = 0.0;
  std::int64_t false_positives = 0;
  std::int64_t misses = 0;
};

struct AccuracyReport {
  std::vector<AccuracyPoint> points;
  std::int64_t trials = 0;
  std::int64_t hosts_per_trial = 0;
};

// Reproduces the accuracy-vs-period curve: `trials` independently seeded
// runs, each observed from a uniformly random phase, every host classified
// at every period. Accuracy is correct verdicts over all hosts and trials;
// the per-trial phase is shared across periods, so the curve is monotone by
// construction, not only in expectation.
template <typename RunTrialFn>
AccuracyReport evaluate_accuracy(const HostnameTable& table,
                                 const std::vector<LabeledHost>& hosts, Timestamp horizon,
                                 const std::vector<Seconds>& periods, std::int64_t trials,
                                 std::uint64_t seed, RunTrialFn run_trial) {
  AccuracyReport report;
  report.trials = trials;
  report.hosts_per_trial = static_cast<std::int64_t>(hosts.size());
  std::vector<std::int64_t> correct(periods.size(), 0);
  std::vector<std::int64_t> fps(periods.size(), 0);
  std::vector<std::int64_t> misses(periods.size(), 0);
  Seconds max_period = 0;
  for (Seconds p : periods) max_period = std::max(max_period, p);

  for (std::int64_t t = 0; t < trials; ++t) {
    const std::uint64_t trial_seed = mix_seed(seed, static_cast<std::uint64_t>(t));
    const Trace trace = run_trial(trial_seed);
    RandomStream phase_rng(trial_seed, "observation-phase");
    const Timestamp phase = phase_rng.uniform(0, std::max<Timestamp>(0, horizon - max_period));

    // first table-matching outgoing event at or after the phase, per host
    struct Match {
      Timestamp time;
      IrrigationKind kind;
    };
    std::map<HostId, Match> first_match;
    for (const auto& ev : trace) {
      if (ev.time < phase || ev.direction != Direction::Request) continue;
      if (first_match.count(ev.src)) continue;
      if (auto kind = table.match(ev.dst_host)) first_match.emplace(ev.src, Match{ev.time, *kind});
    }

    for (std::size_t pi = 0; pi < periods.size(); ++pi) {
      const Timestamp deadline = phase + periods[pi];
      for (const auto& labeled : hosts) {
        auto it = first_match.find(labeled.host);
        const bool detected = it != first_match.end() && it->second.time <= deadline;
        if (labeled.kind) {
          if (detected && it->second.kind == *labeled.kind)
            ++correct[pi];
          else
            ++misses[pi];
        } else {
          if (detected)
            ++fps[pi];
          else
            ++correct[pi];
        }
      }
    }
  }

  const double denom = static_cast<double>(trials) * static_cast<double>(hosts.size());
  for (std::size_t pi = 0; pi < periods.size(); ++pi) {
    report.points.push_back({periods[pi],
                             denom > 0 ? static_cast<double>(correct[pi]) / denom : 0.0,
                             fps[pi], misses[pi]});
  }
  return report;
}

}  // namespace aquanet
